// Command-line runner for the Mobius cross-energy library.

#include <fstream>
#include <iostream>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "mobius/mobius.hpp"

using namespace mobius;

namespace {

struct LinkSource {
  std::string name;
  std::string input;
  std::optional<std::uint64_t> seed;
  double amp = 0.1;
  int modes = 16;
};

void add_link_options(CLI::App* sub, LinkSource& src) {
  auto* name = sub->add_option("--link", src.name, "built-in link: hopf, hopf-r3, split, torus-2-4, perturbed-hopf, "
                                                   "perturbed-hopf-s3");
  auto* in = sub->add_option("--input", src.input, "link JSON file");
  name->excludes(in);
  sub->add_option("--seed", src.seed, "seed for perturbed links and randomized scans");
  sub->add_option("--amp", src.amp, "perturbation amplitude")->capture_default_str();
  sub->add_option("--link-modes", src.modes, "mode count of built-in R^3 links")->capture_default_str();
}

std::uint64_t need_seed(const LinkSource& src, const std::string& why) {
  if (!src.seed) throw Error(ErrorCode::kConfig, "--seed is required for " + why);
  return *src.seed;
}

Link load_link(const LinkSource& src) {
  if (!src.input.empty()) return read_link(src.input);
  const std::string& n = src.name;
  if (n == "hopf") return hopf_link();
  if (n == "hopf-r3") return hopf_link_r3(src.modes);
  if (n == "split") return split_link();
  if (n == "torus-2-4") return torus_link_2_4(src.modes);
  if (n == "perturbed-hopf") return perturbed_hopf_r3(need_seed(src, "perturbed-hopf"), src.amp, src.modes);
  if (n == "perturbed-hopf-s3") return perturbed_hopf_s3(need_seed(src, "perturbed-hopf-s3"), src.amp);
  if (n.empty()) throw Error(ErrorCode::kConfig, "give --link NAME or --input FILE");
  throw Error(ErrorCode::kConfig, "unknown built-in link '" + n + "'");
}

json source_json(const LinkSource& src, const Link& link) {
  json j = {{"link", src.name.empty() ? json(link_to_json(link)) : json(src.name)}, {"amp", src.amp}};
  if (src.seed) j["seed"] = *src.seed;
  return j;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path);
  return out;
}

void emit_record(const ResultRecord& r, const std::string& path) {
  if (path.empty()) return;
  open_out(path) << r.to_json().dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobius cross energy of two-component links"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values; unknown keys are errors");
  app.allow_config_extras(CLI::config_extras_mode::error);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (default: OMP_NUM_THREADS or all cores)");

  LinkSource src;
  int quad_n = 128;
  std::string json_out, out_path;
  auto common = [&](CLI::App* sub, int default_n) {
    add_link_options(sub, src);
    sub->add_option("--quad-n", quad_n, "quadrature nodes per curve")->default_val(default_n);
  };

  auto* energy = app.add_subcommand("energy", "Mobius cross energy");
  common(energy, 128);
  energy->add_option("--json", json_out, "write a result record");

  auto* linking = app.add_subcommand("linking", "Gauss linking integral");
  common(linking, 128);
  linking->add_option("--json", json_out, "write a result record");

  std::string map_path;
  auto* transform = app.add_subcommand("transform", "push a link forward by a conformal map");
  common(transform, 128);
  transform->add_option("--map", map_path, "conformal map JSON")->required();
  transform->add_option("--out", out_path, "image link JSON");

  int count = 2000;
  double boundary_fraction = 0.1;
  auto* family = app.add_subcommand("family-scan", "areas of the canonical family over sampled (v, z)");
  common(family, 96);
  family->add_option("--count", count, "Halton samples of B^4 x (0,1)")->capture_default_str();
  family->add_option("--boundary-fraction", boundary_fraction, "fraction of samples moved to |v| = 1")
      ->capture_default_str();
  family->add_option("--out", out_path, "CSV output (default stdout)");

  bool verify_spheres = false;
  int sweep_count = 200;
  double sweep_boundary = 0.25;
  auto* sweep = app.add_subcommand("sweepout-scan", "areas of the min-max family over sampled (x, t)");
  common(sweep, 96);
  sweep->add_option("--count", sweep_count, "random samples of I^5")->capture_default_str();
  sweep->add_option("--boundary-fraction", sweep_boundary, "fraction of x moved to the cube boundary")
      ->capture_default_str();
  sweep->add_flag("--verify-spheres", verify_spheres, "also integrate boundary spheres on the grid");
  sweep->add_option("--out", out_path, "CSV output (default stdout)");

  MinimizeOptions mopt;
  std::string final_path;
  auto* minimize_cmd = app.add_subcommand("minimize", "gradient descent on the discretized energy");
  common(minimize_cmd, 96);
  minimize_cmd->add_option("--out", out_path, "trace CSV (default stdout)");
  minimize_cmd->add_option("--final", final_path, "write the final link JSON");
  minimize_cmd->add_option("--max-iter", mopt.max_iter)->capture_default_str();
  minimize_cmd->add_option("--tol", mopt.tol, "projected gradient tolerance")->capture_default_str();
  minimize_cmd->add_option("--modes", mopt.modes, "Fourier modes during descent")->capture_default_str();
  minimize_cmd->add_flag("!--no-precondition", mopt.precondition, "plain gradient direction");

  std::vector<std::string> tol_overrides;
  VerifyOptions vopt;
  auto* verify = app.add_subcommand("verify", "run the invariant checks and print a pass/fail table");
  common(verify, 128);
  verify->add_option("--tol", tol_overrides, "override a tolerance: NAME=VALUE");
  verify->add_option("--family-samples", vopt.family_samples)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    const QuadratureSpec quad(quad_n);
    const Link link = load_link(src);
    const json inputs = source_json(src, link);
    std::cout.precision(12);

    if (energy->parsed()) {
      const double e = mobius_energy(link, quad);
      const double diff = std::abs(e - 2.0 * kPi * kPi);
      std::cout << "energy " << fmt(e) << "\nabs_diff_2pi2 " << fmt(diff) << "\nalpha " << fmt(link.alpha()) << "\n";
      emit_record({"energy", inputs_hash({{"inputs", inputs}, {"N", quad_n}}), quad_n, e,
                   {{"abs_diff_2pi2", diff}, {"alpha", link.alpha()}}},
                  json_out);
    } else if (linking->parsed()) {
      const double g = gauss_linking_integral_any(link, quad);
      const int lk = linking_number(link, quad);
      std::cout << "gauss_integral " << fmt(g) << "\nlk " << lk << "\nresidual " << fmt(std::abs(g - lk)) << "\n";
      emit_record({"linking", inputs_hash({{"inputs", inputs}, {"N", quad_n}}), quad_n, g,
                   {{"lk", double(lk)}, {"residual", std::abs(g - lk)}}},
                  json_out);
    } else if (transform->parsed()) {
      const ConformalMap map = map_from_json(read_json_file(map_path));
      const Link image = pushforward_link(map, link);
      const int modes = std::max(image.gamma1().modes(), image.gamma2().modes());
      const double e0 = mobius_energy(link, quad);
      const double e1 = mobius_energy(image, QuadratureSpec(std::max(quad_n, 4 * modes)));
      std::cout << "energy_before " << fmt(e0) << "\nenergy_after " << fmt(e1) << "\nrelative_change "
                << fmt(std::abs(e1 - e0) / e0) << "\nimage_modes " << modes << "\n";
      if (!out_path.empty()) open_out(out_path) << link_to_json(image).dump(2) << '\n';
    } else if (family->parsed()) {
      const Link s3 = lift_to_sphere(link);
      const CanonicalFamily fam(s3, quad);
      const auto params = family_samples(count, boundary_fraction);
      std::vector<SurfaceGrid> grids(params.size());
      std::vector<double> margins(params.size(), std::numeric_limits<double>::quiet_NaN());
      for (size_t i = 0; i < params.size(); ++i) {
        grids[i] = fam.area(params[i]);
        if (params[i].boundary && min_distance_to_link(s3, params[i].v) >= 1e-2)
          margins[i] = support_containment_check(s3, params[i].v, params[i].z, quad).min_margin;
      }
      std::ofstream file;
      if (!out_path.empty()) file = open_out(out_path);
      std::ostream& os = out_path.empty() ? std::cout : file;
      CsvWriter csv(os);
      csv.header({"v1", "v2", "v3", "v4", "z", "areaIntegral", "upperIntegrand", "maxJac", "minContainmentMargin"});
      double max_area = 0.0, max_upper = 0.0, worst_chain = -1e300,
             min_margin = std::numeric_limits<double>::quiet_NaN();
      for (size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        const auto& g = grids[i];
        csv.row(p.v[0], p.v[1], p.v[2], p.v[3], p.z, g.area, g.upper, g.max_jac, margins[i]);
        max_area = std::max(max_area, g.area);
        max_upper = std::max(max_upper, g.upper);
        worst_chain = std::max({worst_chain, g.area - g.upper, g.upper - fam.energy()});
        if (!std::isnan(margins[i])) min_margin = std::isnan(min_margin) ? margins[i] : std::min(min_margin, margins[i]);
      }
      std::cerr << "samples " << params.size() << " energy " << fmt(fam.energy()) << " max_area " << fmt(max_area)
                << " max_upper " << fmt(max_upper) << " worst_chain_excess " << fmt(worst_chain)
                << " min_containment_margin " << fmt(min_margin) << "\n";
    } else if (sweep->parsed()) {
      Rng rng(need_seed(src, "sweepout-scan"));
      const Link s3 = lift_to_sphere(link);
      const CanonicalFamily fam(s3, quad);
      std::ofstream file;
      if (!out_path.empty()) file = open_out(out_path);
      std::ostream& os = out_path.empty() ? std::cout : file;
      CsvWriter csv(os);
      csv.header({"x1", "x2", "x3", "x4", "t", "kind", "area", "sphereRadius", "gridArea", "sphereResidual"});
      double sup = 0.0, worst_sphere = 0.0;
      for (int i = 0; i < sweep_count; ++i) {
        Point x(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
        const double t = rng.uniform();
        if (rng.uniform() < sweep_boundary) {
          const int axis = static_cast<int>(rng.uniform() * 4.0) % 4;
          x[axis] = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
        const MinMaxSurface m = minmax_surface(fam, x, t, verify_spheres);
        sup = std::max(sup, m.area);
        if (!std::isnan(m.sphere_residual)) worst_sphere = std::max(worst_sphere, m.sphere_residual);
        csv.row(x[0], x[1], x[2], x[3], t, std::string(to_string(m.kind)), m.area, m.sphere_radius, m.grid_area,
                m.sphere_residual);
      }
      std::cerr << "samples " << sweep_count << " energy " << fmt(fam.energy()) << " sup_area " << fmt(sup)
                << " sup_minus_energy " << fmt(sup - fam.energy()) << " max_sphere_residual " << fmt(worst_sphere)
                << "\n";
    } else if (minimize_cmd->parsed()) {
      mopt.quad = quad;
      std::ofstream file;
      if (!out_path.empty()) file = open_out(out_path);
      std::ostream& os = out_path.empty() ? std::cout : file;
      CsvWriter csv(os);
      csv.header({"iter", "energy", "alpha", "step", "gradnorm", "lk"});
      const MinimizeResult r = minimize(link, mopt, [&](const TraceRow& row) {
        csv.row(row.iter, row.energy, row.alpha, row.step, row.gradnorm, row.lk);
      });
      if (!final_path.empty()) open_out(final_path) << link_to_json(r.link).dump(2) << '\n';
      const double e = r.trace.back().energy;
      std::cerr << "status " << to_string(r.status) << " iterations " << r.trace.back().iter << " energy " << fmt(e)
                << " minus_2pi2 " << fmt(e - 2.0 * kPi * kPi) << " lk " << r.trace.back().lk
                << (r.lk_preserved ? "" : " (CHANGED)") << "\n";
      if (!r.lk_preserved) return static_cast<int>(ErrorCode::kUnresolvedLinking);
      if (r.status == MinimizeStatus::kStalled) return static_cast<int>(ErrorCode::kStall);
    } else if (verify->parsed()) {
      vopt.quad = quad;
      vopt.seed = src.seed.value_or(1);
      vopt.hopf_reference = src.name == "hopf" || src.name == "hopf-r3";
      for (const auto& t : tol_overrides) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::kConfig, "--tol expects NAME=VALUE, got " + t);
        try {
          vopt.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kConfig, "--tol value is not a number: " + t);
        }
      }
      const auto checks = verify_link(link, vopt);
      for (const auto& [name, value] : vopt.tolerances) {
        const bool known = std::any_of(checks.begin(), checks.end(), [&](const Check& c) { return c.name == name; });
        if (!known) throw Error(ErrorCode::kConfig, "--tol names an unknown check: " + name);
      }
      bool ok = true;
      std::printf("%-26s %-6s %-20s %-12s %s\n", "check", "result", "measured", "tolerance", "note");
      for (const auto& c : checks) {
        ok = ok && c.pass;
        std::printf("%-26s %-6s %-20s %-12s %s\n", c.name.c_str(), c.skipped ? "SKIP" : (c.pass ? "PASS" : "FAIL"),
                    c.skipped ? "-" : fmt(c.measured).c_str(), c.skipped ? "-" : fmt(c.tolerance).c_str(),
                    c.note.c_str());
      }
      return ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::kConfig);
  }
  return 0;
}
