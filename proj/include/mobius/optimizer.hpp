#pragma once

#include <functional>
#include <numeric>
#include <string>

#include "mobius/canonical_family.hpp"

namespace mobius {

// ---------------------------------------------------------------------------
// Coefficient vectors of 3-dimensional links.
//
// Per component and coordinate r: cos coefficients k = 0..M followed by sin
// coefficients k = 1..M; component 1 first. Length 6 (2M + 1).

inline int coeffs_per_component(int modes) { return 3 * (2 * modes + 1); }

inline Eigen::VectorXd pack_curves(const Curve& c1, const Curve& c2, int modes) {
  const int per = 2 * modes + 1;
  Eigen::VectorXd out(2 * coeffs_per_component(modes));
  for (int c = 0; c < 2; ++c) {
    const Curve cur = (c == 0 ? c1 : c2).with_modes(modes);
    for (int r = 0; r < 3; ++r) {
      const int base = c * 3 * per + r * per;
      for (int k = 0; k <= modes; ++k) out[base + k] = cur.cos_coeffs()(r, k);
      for (int k = 1; k <= modes; ++k) out[base + modes + k] = cur.sin_coeffs()(r, k);
    }
  }
  return out;
}

inline Eigen::VectorXd pack_link(const Link& link, int modes) {
  if (link.dim() != 3) throw Error(ErrorCode::kConfig, "coefficient vectors are defined for links in R^3");
  return pack_curves(link.gamma1(), link.gamma2(), modes);
}

inline Curve unpack_curve(const Eigen::VectorXd& theta, int component, int modes) {
  const int per = 2 * modes + 1;
  Curve cur(3, modes);
  for (int r = 0; r < 3; ++r) {
    const int base = component * 3 * per + r * per;
    for (int k = 0; k <= modes; ++k) cur.cos_coeffs()(r, k) = theta[base + k];
    for (int k = 1; k <= modes; ++k) cur.sin_coeffs()(r, k) = theta[base + modes + k];
  }
  return cur;
}

inline Link unpack_link(const Eigen::VectorXd& theta, int modes) {
  return Link(unpack_curve(theta, 0, modes), unpack_curve(theta, 1, modes));
}

/// Mode number of each entry of a coefficient vector.
inline Eigen::VectorXd coefficient_modes(int modes) {
  const int per = 2 * modes + 1;
  Eigen::VectorXd out(2 * coeffs_per_component(modes));
  for (int blk = 0; blk < 6; ++blk) {
    for (int k = 0; k <= modes; ++k) out[blk * per + k] = k;
    for (int k = 1; k <= modes; ++k) out[blk * per + modes + k] = k;
  }
  return out;
}

/// Gradient of the trapezoid energy (the value returned by mobius_energy)
/// with respect to every real coefficient of pack_link(link, modes).
inline Eigen::VectorXd energy_gradient(const Link& link, const QuadratureSpec& quad, int modes,
                                       double* energy_out = nullptr) {
  if (link.dim() != 3) throw Error(ErrorCode::kConfig, "energy_gradient expects a link in R^3");
  if (link.alpha() <= 0.0) throw Error(ErrorCode::kIntersectingLink, "components intersect");
  const int n = quad.n;
  const double h2 = quad.step() * quad.step();
  const CurveSamples a = link.gamma1().with_modes(modes).sample(n), b = link.gamma2().with_modes(modes).sample(n);
  std::vector<double> sa(n), sb(n);
  for (int j = 0; j < n; ++j) {
    sa[j] = a.vel[j].norm();
    sb[j] = b.vel[j].norm();
  }
  // d E / d position and d E / d velocity at every node of both curves.
  std::vector<Point> gpa(n, Point::Zero()), gva(n, Point::Zero()), gpb(n, Point::Zero()), gvb(n, Point::Zero());
  std::vector<double> row_energy(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double inv_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const Point d = a.pos[i] - b.pos[j];
      const double r2 = d.squaredNorm();
      const double w = sa[i] * sb[j] / r2;
      row_energy[i] += w;
      inv_sum += sb[j] / r2;
      gpa[i] -= (2.0 * w / r2) * d;
    }
    gva[i] = a.vel[i] / sa[i] * inv_sum;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    double inv_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const Point d = a.pos[i] - b.pos[j];
      const double r2 = d.squaredNorm();
      const double w = sa[i] * sb[j] / r2;
      inv_sum += sa[i] / r2;
      gpb[j] += (2.0 * w / r2) * d;
    }
    gvb[j] = b.vel[j] / sb[j] * inv_sum;
  }
  if (energy_out) {
    double e = 0.0;
    for (double r : row_energy) e += r;
    *energy_out = h2 * e;
  }
  const int per = 2 * modes + 1;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * coeffs_per_component(modes));
  for (int c = 0; c < 2; ++c) {
    const auto& gp = c == 0 ? gpa : gpb;
    const auto& gv = c == 0 ? gva : gvb;
    for (int i = 0; i < n; ++i) {
      const double s = quad.node(i);
      for (int k = 0; k <= modes; ++k) {
        const double ck = std::cos(k * s), sk = std::sin(k * s);
        for (int r = 0; r < 3; ++r) {
          const int base = c * 3 * per + r * per;
          grad[base + k] += gp[i][r] * ck - k * gv[i][r] * sk;
          if (k > 0) grad[base + modes + k] += gp[i][r] * sk + k * gv[i][r] * ck;
        }
      }
    }
  }
  return h2 * grad;
}

/// Central finite-difference gradient of mobius_energy, for checking.
inline Eigen::VectorXd energy_gradient_fd(const Link& link, const QuadratureSpec& quad, int modes, double h = 1e-6) {
  const Eigen::VectorXd theta = pack_link(link, modes);
  Eigen::VectorXd out(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd p = theta, m = theta;
    p[k] += h;
    m[k] -= h;
    out[k] = (mobius_energy(unpack_link(p, modes), quad) - mobius_energy(unpack_link(m, modes), quad)) / (2.0 * h);
  }
  return out;
}

/// Mean distance of a curve from its constant coefficient.
inline double mean_radius(const Curve& c, int probes = 256) {
  const Point center = c.cos_coeffs().col(0);
  double sum = 0.0;
  for (int j = 0; j < probes; ++j) sum += (c.eval(kTwoPi * j / probes) - center).norm();
  return sum / probes;
}

/// Translate so the midpoint of the two constant coefficients is the
/// origin, then scale so component 1 has mean radius 1.
inline Link gauge_normalize(const Link& link) {
  const Point mid = 0.5 * (link.gamma1().cos_coeffs().col(0) + link.gamma2().cos_coeffs().col(0));
  const Curve c1 = link.gamma1().translated(-mid), c2 = link.gamma2().translated(-mid);
  const double r = mean_radius(c1);
  if (!(r > 0.0)) throw Error(ErrorCode::kDegenerateCurve, "component 1 has zero mean radius");
  return Link(c1.scaled(1.0 / r), c2.scaled(1.0 / r));
}

/// Orthonormal basis (columns) of the coefficient-space directions generated
/// by the 10 conformal vector fields of R^3: translations, rotations,
/// dilation and special conformal fields 2 <b,x> x - |x|^2 b.
inline Eigen::MatrixXd conformal_directions(const Link& link, int modes) {
  std::vector<std::function<Point(const Point&)>> fields;
  for (int i = 0; i < 3; ++i) fields.push_back([i](const Point&) { return Point(Point::Unit(i)); });
  for (int i = 0; i < 3; ++i)
    fields.push_back([i](const Point& x) {
      Point e = Point::Unit(i), out = Point::Zero();
      out.head<3>() = e.head<3>().cross(x.head<3>());
      return out;
    });
  fields.push_back([](const Point& x) { return x; });
  for (int i = 0; i < 3; ++i)
    fields.push_back([i](const Point& x) {
      const Point b = Point::Unit(i);
      return Point(2.0 * b.dot(x) * x - x.squaredNorm() * b);
    });
  const int samples = std::max(64, 4 * modes + 8);
  Eigen::MatrixXd dirs(2 * coeffs_per_component(modes), fields.size());
  for (size_t f = 0; f < fields.size(); ++f) {
    std::vector<Point> v1(samples), v2(samples);
    for (int j = 0; j < samples; ++j) {
      const double s = kTwoPi * j / samples;
      v1[j] = fields[f](link.gamma1().eval(s));
      v2[j] = fields[f](link.gamma2().eval(s));
    }
    dirs.col(f) = pack_curves(fit_uniform_samples(3, v1, modes), fit_uniform_samples(3, v2, modes), modes);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(dirs);
  return qr.householderQ() * Eigen::MatrixXd::Identity(dirs.rows(), dirs.cols());
}

inline Eigen::VectorXd project_out(const Eigen::MatrixXd& basis, const Eigen::VectorXd& g) {
  return g - basis * (basis.transpose() * g);
}

// ---------------------------------------------------------------------------
// Descent.

struct MinimizeOptions {
  int max_iter = 5000;
  double tol = 1e-6;
  int modes = 16;
  QuadratureSpec quad{96};
  double initial_step = 0.1;
  double armijo = 1e-4;
  double min_step = 1e-12;
  /// Separation floor as a fraction of the mean radius of component 1.
  double alpha_floor = 1e-3;
  /// Weight mode k of the search direction by 1 / (1 + k^2).
  bool precondition = true;
};

struct TraceRow {
  int iter = 0;
  double energy = 0.0;
  double alpha = 0.0;
  double step = 0.0;
  double gradnorm = 0.0;
  int lk = 0;
};

enum class MinimizeStatus { kConverged, kMaxIter, kStalled };

inline const char* to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::kConverged: return "converged";
    case MinimizeStatus::kMaxIter: return "max-iter";
    case MinimizeStatus::kStalled: return "stalled";
  }
  return "?";
}

struct MinimizeResult {
  Link link;
  std::vector<TraceRow> trace;
  MinimizeStatus status = MinimizeStatus::kMaxIter;
  int initial_lk = 0;
  bool lk_preserved = true;
};

/// Backtracking descent on the discretized energy over Fourier coefficients
/// of a link in R^3 (4-dimensional input is charted to R^3 first). The
/// search direction is the preconditioned gradient with the conformal
/// directions projected out; the gauge is re-normalized after every step.
inline MinimizeResult minimize(const Link& input, const MinimizeOptions& opt,
                               const std::function<void(const TraceRow&)>& on_row = {}) {
  Link start = input.dim() == 4 ? stereographic_chart(input, farthest_pole(input), opt.modes) : input;
  Link link = gauge_normalize(Link(start.gamma1().with_modes(opt.modes), start.gamma2().with_modes(opt.modes)));
  const Eigen::VectorXd kmode = coefficient_modes(opt.modes);
  const Eigen::VectorXd weight = opt.precondition ? Eigen::VectorXd((1.0 + kmode.array().square()).inverse())
                                                  : Eigen::VectorXd::Ones(kmode.size());
  MinimizeResult res{link, {}, MinimizeStatus::kMaxIter, 0, true};
  res.initial_lk = linking_number(link, opt.quad);
  double energy = mobius_energy(link, opt.quad);
  Eigen::VectorXd grad = energy_gradient(link, opt.quad, opt.modes);
  double step = opt.initial_step;
  auto record = [&](int iter, double used_step, double gnorm, int lk) {
    TraceRow row{iter, energy, link.alpha(), used_step, gnorm, lk};
    res.trace.push_back(row);
    if (on_row) on_row(row);
  };
  for (int iter = 0;; ++iter) {
    const Eigen::MatrixXd conf = conformal_directions(link, opt.modes);
    const Eigen::VectorXd pg = project_out(conf, grad);
    const double gnorm = pg.norm();
    const int lk = (iter % 50 == 0) ? linking_number(link, opt.quad) : res.initial_lk;
    if (lk != res.initial_lk) res.lk_preserved = false;
    if (iter == 0) record(0, 0.0, gnorm, lk);
    if (gnorm <= opt.tol) {
      res.status = MinimizeStatus::kConverged;
      break;
    }
    if (iter >= opt.max_iter) break;
    const Eigen::VectorXd dir = project_out(conf, weight.cwiseProduct(pg));
    const double slope = grad.dot(dir);
    const Eigen::VectorXd theta = pack_link(link, opt.modes);
    const double floor = opt.alpha_floor * mean_radius(link.gamma1());
    bool accepted = false;
    for (step = std::min(opt.initial_step, 4.0 * step); step >= opt.min_step; step *= 0.5) {
      try {
        Link trial = unpack_link(theta - step * dir, opt.modes);
        if (trial.alpha() < floor) continue;
        // Judge the normalized link, so the recorded energies are exactly
        // the ones compared here.
        trial = gauge_normalize(trial);
        const double e = mobius_energy(trial, opt.quad);
        if (e < energy && e <= energy - opt.armijo * step * slope) {
          link = trial;
          energy = e;
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kIntersectingLink) throw;
      }
    }
    if (!accepted) {
      res.status = MinimizeStatus::kStalled;
      break;
    }
    grad = energy_gradient(link, opt.quad, opt.modes);
    record(iter + 1, step, project_out(conformal_directions(link, opt.modes), grad).norm(),
           (iter + 1) % 50 == 0 ? linking_number(link, opt.quad) : res.initial_lk);
    if (res.trace.back().lk != res.initial_lk) res.lk_preserved = false;
  }
  const int final_lk = linking_number(link, opt.quad);
  if (final_lk != res.initial_lk) res.lk_preserved = false;
  res.trace.back().lk = final_lk;
  res.link = link;
  return res;
}

// ---------------------------------------------------------------------------
// Nelder-Mead on a box-free objective (callers penalize infeasible points).

inline std::pair<Eigen::VectorXd, double> nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                                      Eigen::VectorXd x0, double scale, int max_evals,
                                                      double ftol = 1e-12) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> simplex(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (int i = 0; i < n; ++i) simplex[i + 1][i] += scale;
  int evals = 0;
  for (int i = 0; i <= n; ++i, ++evals) vals[i] = f(simplex[i]);
  std::vector<int> order(n + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= ftol * (1.0 + std::abs(vals[best]))) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[order[i]];
    centroid /= n;
    const Eigen::VectorXd xr = centroid + (centroid - simplex[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) simplex[worst] = xe, vals[worst] = fe;
      else simplex[worst] = xr, vals[worst] = fr;
    } else if (fr < vals[second]) {
      simplex[worst] = xr, vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                         : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, vals[worst])) {
        simplex[worst] = xc, vals[worst] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[order[i]] = simplex[best] + 0.5 * (simplex[order[i]] - simplex[best]);
          vals[order[i]] = f(simplex[order[i]]);
          ++evals;
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {simplex[best], vals[best]};
}

/// Golden-section maximization of a unimodal function on [lo, hi].
inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double lo, double hi,
                                            double tol = 1e-6) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi, c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// ---------------------------------------------------------------------------
// Diagnostics at (near) minimizers.

struct FamilyMax {
  FamilyPoint argmax;
  double value = 0.0;
  double energy = 0.0;
  /// energy - value
  double gap = 0.0;
  int evaluations = 0;
};

/// Maximizes the family area over (v, z): scan of family_samples, then
/// Nelder-Mead in (v, z) and a golden-section refinement in z.
inline FamilyMax family_max_diagnostic(const Link& input, const QuadratureSpec& quad, int scan = 256,
                                       int max_evals = 600) {
  const Link link = lift_to_sphere(input);
  const CanonicalFamily fam(link, quad);
  FamilyMax out;
  auto area = [&](const Point& v, double z) {
    ++out.evaluations;
    if (!(z > 0.0 && z < 1.0) || v.norm() > 0.999) return -1.0;
    return fam.area(family_coeffs(v, z)).area;
  };
  double best = -1.0;
  for (const auto& fp : family_samples(scan, 0.0, 19)) {
    if (fp.v.norm() > 0.999) continue;
    const double a = area(fp.v, fp.z);
    if (a > best) best = a, out.argmax = fp;
  }
  Eigen::VectorXd x0(5);
  x0 << out.argmax.v, out.argmax.z;
  auto [x, negval] = nelder_mead(
      [&](const Eigen::VectorXd& x) { return -area(Point(x.head<4>()), x[4]); }, x0, 0.05, max_evals);
  Point v = x.head<4>();
  double z = x[4];
  if (-negval < best) v = out.argmax.v, z = out.argmax.z;
  auto [zr, val] = golden_max([&](double zz) { return area(v, zz); }, std::max(1e-3, z - 0.1),
                              std::min(1.0 - 1e-3, z + 0.1), 1e-7);
  out.argmax = family_coeffs(v, zr);
  out.value = val;
  out.energy = fam.energy();
  out.gap = out.energy - out.value;
  return out;
}

struct CircleFit {
  double radius = 0.0;
  /// Largest relative deviation: off-plane distance and |dist to center - R|, over R.
  double residual = 0.0;
};

/// Best-fit circle of a closed curve in R^3 or R^4: principal 2-plane of the
/// samples, algebraic (Kasa) circle fit inside it.
inline CircleFit fit_circle(const Curve& c, int probes = 256) {
  std::vector<Point> pts(probes);
  Point mean = Point::Zero();
  for (int j = 0; j < probes; ++j) mean += (pts[j] = c.eval(kTwoPi * j / probes));
  mean /= probes;
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(cov);
  const Point e1 = eig.eigenvectors().col(3), e2 = eig.eigenvectors().col(2);
  Eigen::MatrixXd a(probes, 3);
  Eigen::VectorXd rhs(probes);
  for (int j = 0; j < probes; ++j) {
    const double u = (pts[j] - mean).dot(e1), w = (pts[j] - mean).dot(e2);
    a.row(j) << u, w, 1.0;
    rhs[j] = u * u + w * w;
  }
  const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(rhs);
  const double cu = sol[0] / 2, cw = sol[1] / 2;
  CircleFit fit;
  fit.radius = std::sqrt(std::max(0.0, sol[2] + cu * cu + cw * cw));
  const Point center = mean + cu * e1 + cw * e2;
  for (const auto& p : pts) {
    const Point d = p - mean;
    const Point in_plane = d.dot(e1) * e1 + d.dot(e2) * e2;
    fit.residual = std::max({fit.residual, (d - in_plane).norm() / fit.radius,
                             std::abs((mean + in_plane - center).norm() - fit.radius) / fit.radius});
  }
  return fit;
}

struct RigidityReport {
  /// Largest of the cosines between x' and y', x' and x - y, y' and x - y.
  double max_ortho_residual = 0.0;
  /// (max - min) |x - y| over the mean chord.
  double chord_spread = 0.0;
  std::array<double, 2> circle_residuals{0.0, 0.0};
  Point v = Point::Zero();
  double family_area = 0.0;
  double energy = 0.0;
};

/// Rigidity residuals of F_v o gamma_i on a grid x grid parameter grid,
/// where v maximizes the family area at z = 1/2 (Halton scan, then
/// Nelder-Mead). Pass v to skip the search.
inline RigidityReport rigidity_report(const Link& input, const QuadratureSpec& quad, int grid = 128,
                                      std::optional<Point> fixed_v = {}) {
  const Link link = lift_to_sphere(input);
  const CanonicalFamily fam(link, quad);
  RigidityReport rep;
  rep.energy = fam.energy();
  auto area = [&](const Point& v) { return v.norm() > 0.95 ? -1.0 : fam.area(family_coeffs(v, 0.5)).area; };
  if (fixed_v) {
    rep.v = *fixed_v;
  } else {
    Point best = Point::Zero();
    double best_area = area(best);
    for (int i = 1; i <= 128; ++i) {
      const auto h = halton5(static_cast<std::uint64_t>(i));
      const Point v = 0.9 * cube_to_ball(Point(2 * h[0] - 1, 2 * h[1] - 1, 2 * h[2] - 1, 2 * h[3] - 1));
      const double a = area(v);
      if (a > best_area) best_area = a, best = v;
    }
    auto [x, neg] = nelder_mead([&](const Eigen::VectorXd& x) { return -area(Point(x)); }, Eigen::VectorXd(best),
                                0.05, 800, 1e-15);
    rep.v = -neg > best_area ? Point(x) : best;
  }
  rep.family_area = area(rep.v);
  const ConformalMap f = ConformalMap::inversion(rep.v);
  const Curve c1 = pushforward_curve(f, link.gamma1(), 1e-10), c2 = pushforward_curve(f, link.gamma2(), 1e-10);
  const CurveSamples a = c1.sample(grid), b = c2.sample(grid);
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0, csum = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const Point d = a.pos[i] - b.pos[j];
      const double r = d.norm(), sa = a.vel[i].norm(), sb = b.vel[j].norm();
      rep.max_ortho_residual = std::max({rep.max_ortho_residual, std::abs(a.vel[i].dot(b.vel[j])) / (sa * sb),
                                         std::abs(a.vel[i].dot(d)) / (sa * r), std::abs(b.vel[j].dot(d)) / (sb * r)});
      cmin = std::min(cmin, r);
      cmax = std::max(cmax, r);
      csum += r;
    }
  rep.chord_spread = (cmax - cmin) / (csum / (double(grid) * grid));
  rep.circle_residuals = {fit_circle(c1).residual, fit_circle(c2).residual};
  return rep;
}

}  // namespace mobius
