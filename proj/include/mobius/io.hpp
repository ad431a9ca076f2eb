#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mobius/conformal.hpp"

namespace mobius {

using json = nlohmann::json;

/// Shortest text of x with 12 significant digits; independent of locale.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, where + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw Error(ErrorCode::kConfig, where + ": unknown key '" + it.key() + "'");
}

inline const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorCode::kConfig, where + ": missing key '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorCode::kConfig, where + ": expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw Error(ErrorCode::kConfig, where + ": expected an integer");
  return j.get<int>();
}

}  // namespace detail

inline Point point_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() < 1 || j.size() > 4)
    throw Error(ErrorCode::kConfig, where + ": expected an array of 3 or 4 numbers");
  Point p = Point::Zero();
  for (size_t i = 0; i < j.size(); ++i) p[i] = detail::number(j[i], where);
  return p;
}

inline json point_to_json(const Point& p, int dim = 4) {
  json out = json::array();
  for (int i = 0; i < dim; ++i) out.push_back(p[i]);
  return out;
}

/// Curve file: {"dim", "modes", "coeffs"} with, per coordinate, modes+1
/// pairs [re, im] of c_k in x(s) = Re sum c_k e^{iks}; or {"dim",
/// "samples"[, "modes"]} with samples at s_j = 2 pi j / K, fitted by the
/// discrete Fourier transform.
inline Curve curve_from_json(const json& j, const std::string& where = "curve") {
  detail::require_keys(j, {"dim", "modes", "coeffs", "samples"}, where);
  const int dim = detail::integer(detail::need(j, "dim", where), where + ".dim");
  if (dim != 3 && dim != 4) throw Error(ErrorCode::kConfig, where + ".dim must be 3 or 4");
  if (j.contains("coeffs") == j.contains("samples"))
    throw Error(ErrorCode::kConfig, where + ": give exactly one of 'coeffs' and 'samples'");
  if (j.contains("samples")) {
    const json& s = j.at("samples");
    if (!s.is_array() || s.size() < 3) throw Error(ErrorCode::kConfig, where + ".samples: need at least 3 points");
    std::vector<Point> pts;
    for (size_t i = 0; i < s.size(); ++i) {
      const std::string w = where + ".samples[" + std::to_string(i) + "]";
      if (!s[i].is_array() || static_cast<int>(s[i].size()) != dim)
        throw Error(ErrorCode::kConfig, w + ": expected " + std::to_string(dim) + " numbers");
      pts.push_back(point_from_json(s[i], w));
    }
    const int k = static_cast<int>(pts.size());
    const int modes = j.contains("modes") ? detail::integer(j.at("modes"), where + ".modes") : std::min(64, (k - 1) / 2);
    if (modes < 1 || 2 * modes >= k)
      throw Error(ErrorCode::kConfig, where + ".modes must satisfy 1 <= modes < samples / 2");
    return fit_uniform_samples(dim, pts, modes);
  }
  const int modes = detail::integer(detail::need(j, "modes", where), where + ".modes");
  if (modes < 0) throw Error(ErrorCode::kConfig, where + ".modes must be nonnegative");
  const json& c = j.at("coeffs");
  if (!c.is_array() || static_cast<int>(c.size()) != dim)
    throw Error(ErrorCode::kConfig, where + ".coeffs: expected one list per coordinate");
  Curve out(dim, modes);
  for (int r = 0; r < dim; ++r) {
    if (!c[r].is_array() || static_cast<int>(c[r].size()) != modes + 1)
      throw Error(ErrorCode::kConfig, where + ".coeffs[" + std::to_string(r) + "]: expected modes+1 pairs");
    for (int k = 0; k <= modes; ++k) {
      const json& pr = c[r][k];
      const std::string w = where + ".coeffs[" + std::to_string(r) + "][" + std::to_string(k) + "]";
      if (!pr.is_array() || pr.size() != 2) throw Error(ErrorCode::kConfig, w + ": expected [re, im]");
      out.cos_coeffs()(r, k) = detail::number(pr[0], w);
      out.sin_coeffs()(r, k) = k == 0 ? 0.0 : -detail::number(pr[1], w);
    }
  }
  return Curve(dim, out.cos_coeffs(), out.sin_coeffs());
}

inline json curve_to_json(const Curve& c) {
  json coeffs = json::array();
  for (int r = 0; r < c.dim(); ++r) {
    json row = json::array();
    for (int k = 0; k <= c.modes(); ++k) row.push_back({c.cos_coeffs()(r, k), k == 0 ? 0.0 : -c.sin_coeffs()(r, k)});
    coeffs.push_back(row);
  }
  return {{"dim", c.dim()}, {"modes", c.modes()}, {"coeffs", coeffs}};
}

inline Link link_from_json(const json& j) {
  detail::require_keys(j, {"gamma1", "gamma2"}, "link");
  Curve a = curve_from_json(detail::need(j, "gamma1", "link"), "gamma1");
  Curve b = curve_from_json(detail::need(j, "gamma2", "link"), "gamma2");
  return Link(std::move(a), std::move(b));
}

inline json link_to_json(const Link& l) { return {{"gamma1", curve_to_json(l.gamma1())}, {"gamma2", curve_to_json(l.gamma2())}}; }

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
}

inline Link read_link(const std::string& path) { return link_from_json(read_json_file(path)); }

/// {"kind": "inversion", "v"} | {"kind": "dilation", "w", "lambda"} |
/// {"kind": "boundary", "v", "z"} | {"kind": "compose", "children"}.
inline ConformalMap map_from_json(const json& j, const std::string& where = "map") {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, where + ": expected a JSON object");
  const json& k = detail::need(j, "kind", where);
  if (!k.is_string()) throw Error(ErrorCode::kConfig, where + ".kind must be a string");
  const std::string kind = k.get<std::string>();
  if (kind == "inversion") {
    detail::require_keys(j, {"kind", "v"}, where);
    return ConformalMap::inversion(point_from_json(detail::need(j, "v", where), where + ".v"));
  }
  if (kind == "dilation") {
    detail::require_keys(j, {"kind", "w", "lambda"}, where);
    return ConformalMap::dilation(point_from_json(detail::need(j, "w", where), where + ".w"),
                                  detail::number(detail::need(j, "lambda", where), where + ".lambda"));
  }
  if (kind == "boundary") {
    detail::require_keys(j, {"kind", "v", "z"}, where);
    return ConformalMap::boundary(point_from_json(detail::need(j, "v", where), where + ".v"),
                                  detail::number(detail::need(j, "z", where), where + ".z"));
  }
  if (kind == "compose") {
    detail::require_keys(j, {"kind", "children"}, where);
    const json& ch = detail::need(j, "children", where);
    if (!ch.is_array()) throw Error(ErrorCode::kConfig, where + ".children must be an array");
    Composition maps;
    for (size_t i = 0; i < ch.size(); ++i) maps.push_back(map_from_json(ch[i], where + ".children[" + std::to_string(i) + "]"));
    return ConformalMap::compose(std::move(maps));
  }
  throw Error(ErrorCode::kConfig, where + ": unknown kind '" + kind + "'");
}

inline json map_to_json(const ConformalMap& m) {
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Inversion>) return {{"kind", "inversion"}, {"v", point_to_json(n.v)}};
        else if constexpr (std::is_same_v<T, Dilation>)
          return {{"kind", "dilation"}, {"w", point_to_json(n.w)}, {"lambda", n.lambda}};
        else if constexpr (std::is_same_v<T, BoundaryMap>)
          return {{"kind", "boundary"}, {"v", point_to_json(n.v)}, {"z", n.z}};
        else {
          json ch = json::array();
          for (const auto& c : n) ch.push_back(map_to_json(c));
          return {{"kind", "compose"}, {"children", ch}};
        }
      },
      m.node());
}

/// One computed quantity with the hash of its inputs.
struct ResultRecord {
  std::string operation;
  std::string inputs_hash;
  int n = 0;
  double value = 0.0;
  std::vector<std::pair<std::string, double>> residuals;

  json to_json() const {
    json r = json::object();
    for (const auto& [k, v] : residuals) r[k] = v;
    return {{"operation", operation}, {"inputs_hash", inputs_hash}, {"N", n}, {"value", value}, {"residuals", r}};
  }
};

inline std::string inputs_hash(const json& inputs) { return hex64(fnv1a(inputs.dump())); }

/// Minimal CSV writer; numbers use fmt().
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string> cols) { row_strings(std::vector<std::string>(cols)); }
  void header(const std::vector<std::string>& cols) { row_strings(cols); }

  template <class... T>
  void row(const T&... cells) {
    std::vector<std::string> s;
    (s.push_back(cell(cells)), ...);
    row_strings(s);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long long x) { return std::to_string(x); }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }

  std::ostream& out_;
};

}  // namespace mobius
