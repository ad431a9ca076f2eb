#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mobius/common.hpp"
#include "mobius/sampling.hpp"

namespace mobius {

/// Positions and first derivatives of a curve on a uniform grid.
struct CurveSamples {
  std::vector<Point> pos;
  std::vector<Point> vel;
};

/// Closed curve in R^3 or R^4 given by a truncated real Fourier series
///
///   x(s) = a_0 + sum_{k=1}^{M} a_k cos(ks) + b_k sin(ks),   s in [0, 2pi).
///
/// Equivalently x(s) = Re sum_{k=0}^{M} c_k e^{iks} with c_k = a_k - i b_k,
/// which is the form used by the JSON file format.
class Curve {
 public:
  Curve() : Curve(3, 1) {}

  Curve(int dim, int modes)
      : dim_(dim), cos_(Eigen::MatrixXd::Zero(4, modes + 1)), sin_(Eigen::MatrixXd::Zero(4, modes + 1)) {
    check_dim(dim);
    if (modes < 0) throw Error(ErrorCode::kConfig, "negative mode count");
  }

  Curve(int dim, Eigen::MatrixXd cos_coeffs, Eigen::MatrixXd sin_coeffs)
      : dim_(dim), cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
    check_dim(dim);
    if (cos_.rows() != 4 || sin_.rows() != 4 || cos_.cols() != sin_.cols() || cos_.cols() < 1)
      throw Error(ErrorCode::kConfig, "coefficient matrices must be 4 x (modes+1) and agree");
    sin_.col(0).setZero();
    for (int r = dim_; r < 4; ++r) {
      cos_.row(r).setZero();
      sin_.row(r).setZero();
    }
  }

  int dim() const { return dim_; }
  int modes() const { return static_cast<int>(cos_.cols()) - 1; }
  const Eigen::MatrixXd& cos_coeffs() const { return cos_; }
  const Eigen::MatrixXd& sin_coeffs() const { return sin_; }
  Eigen::MatrixXd& cos_coeffs() { return cos_; }
  Eigen::MatrixXd& sin_coeffs() { return sin_; }

  Point eval(double s) const { return eval_order(s, 0); }
  Point derivative(double s) const { return eval_order(s, 1); }
  Point second_derivative(double s) const { return eval_order(s, 2); }

  /// Derivative of the given order (0, 1 or 2), term by term.
  Point eval_order(double s, int order) const {
    Point out = order == 0 ? Point(cos_.col(0)) : Point::Zero();
    const double c1 = std::cos(s), s1 = std::sin(s);
    double ck = 1.0, sk = 0.0;
    for (int k = 1; k <= modes(); ++k) {
      const double cn = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = cn;
      switch (order) {
        case 0: out += cos_.col(k) * ck + sin_.col(k) * sk; break;
        case 1: out += k * (sin_.col(k) * ck - cos_.col(k) * sk); break;
        default: out -= double(k) * k * (cos_.col(k) * ck + sin_.col(k) * sk); break;
      }
    }
    return out;
  }

  /// Positions and derivatives at s_j = 2 pi j / n.
  CurveSamples sample(int n) const {
    CurveSamples out{std::vector<Point>(n), std::vector<Point>(n)};
    for (int j = 0; j < n; ++j) {
      const double s = kTwoPi * j / n;
      out.pos[j] = eval(s);
      out.vel[j] = derivative(s);
    }
    return out;
  }

  /// Same image traversed backwards: s -> -s.
  Curve reversed() const { return Curve(dim_, cos_, -sin_); }

  Curve translated(const Point& shift) const {
    Curve c = *this;
    c.cos_.col(0) += shift;
    c.clear_unused_rows();
    return c;
  }

  Curve scaled(double factor) const { return Curve(dim_, cos_ * factor, sin_ * factor); }

  /// Apply a linear map to the coefficient vectors (rotations, embeddings).
  Curve linear_image(const Eigen::Matrix4d& m, int new_dim) const {
    return Curve(new_dim, m * cos_, m * sin_);
  }

  /// Zero-padded or truncated copy with the given number of modes.
  Curve with_modes(int modes) const {
    Curve c(dim_, modes);
    const int keep = std::min(modes, this->modes()) + 1;
    c.cos_.leftCols(keep) = cos_.leftCols(keep);
    c.sin_.leftCols(keep) = sin_.leftCols(keep);
    return c;
  }

 private:
  static void check_dim(int dim) {
    if (dim != 3 && dim != 4) throw Error(ErrorCode::kConfig, "curve dimension must be 3 or 4");
  }
  void clear_unused_rows() {
    for (int r = dim_; r < 4; ++r) {
      cos_.row(r).setZero();
      sin_.row(r).setZero();
    }
  }

  int dim_;
  Eigen::MatrixXd cos_;
  Eigen::MatrixXd sin_;
};

/// Least-squares Fourier fit of samples taken at s_j = 2 pi j / K. For
/// uniform samples the discrete Fourier transform is the least-squares
/// solution, provided 2 * modes < K.
inline Curve fit_uniform_samples(int dim, std::span<const Point> samples, int modes) {
  const int n = static_cast<int>(samples.size());
  if (n < 3) throw Error(ErrorCode::kConfig, "need at least 3 samples to fit a curve");
  modes = std::min(modes, (n - 1) / 2);
  std::vector<double> ctab(n), stab(n);
  for (int m = 0; m < n; ++m) {
    ctab[m] = std::cos(kTwoPi * m / n);
    stab[m] = std::sin(kTwoPi * m / n);
  }
  Curve c(dim, modes);
  for (int k = 0; k <= modes; ++k) {
    Point a = Point::Zero(), b = Point::Zero();
    for (int j = 0; j < n; ++j) {
      const int idx = static_cast<int>((static_cast<long long>(k) * j) % n);
      a += samples[j] * ctab[idx];
      b += samples[j] * stab[idx];
    }
    const double w = (k == 0) ? 1.0 / n : 2.0 / n;
    c.cos_coeffs().col(k) = a * w;
    c.sin_coeffs().col(k) = (k == 0) ? Point::Zero() : Point(b * w);
  }
  return Curve(dim, c.cos_coeffs(), c.sin_coeffs());
}

/// Fits a periodic function with increasing mode counts (doubling) until the
/// pointwise error on an offset probe grid is at most tol. Throws when
/// max_modes is reached first.
inline Curve fit_function(int dim, const std::function<Point(double)>& fn, double tol,
                          int min_modes = 16, int max_modes = 512) {
  double last_err = std::numeric_limits<double>::infinity();
  for (int modes = std::max(1, min_modes);; modes *= 2) {
    const int m = std::min(modes, max_modes);
    const int k = 4 * m + 4;
    std::vector<Point> samples(k);
    for (int j = 0; j < k; ++j) samples[j] = fn(kTwoPi * j / k);
    Curve c = fit_uniform_samples(dim, samples, m);
    double err = 0.0;
    const int probes = 2 * k;
    for (int j = 0; j < probes; ++j) {
      const double s = kTwoPi * (j + 0.5) / probes;
      err = std::max(err, (c.eval(s) - fn(s)).norm());
    }
    last_err = err;
    if (err <= tol) return c;
    if (m >= max_modes) break;
  }
  throw Error(ErrorCode::kSingularity,
              "Fourier refit did not reach tolerance " + std::to_string(tol) + " within " +
                  std::to_string(max_modes) + " modes (error " + std::to_string(last_err) + ")");
}

inline double mean_speed(const Curve& c, int probes = 1024) {
  double sum = 0.0;
  for (int j = 0; j < probes; ++j) sum += c.derivative(kTwoPi * j / probes).norm();
  return sum / probes;
}

inline double max_speed(const Curve& c, int probes = 1024) {
  double m = 0.0;
  for (int j = 0; j < probes; ++j) m = std::max(m, c.derivative(kTwoPi * j / probes).norm());
  return m;
}

/// Total length, via the spectrally accurate trapezoid rule on |x'|.
inline double arclength(const Curve& c, int probes = 0) {
  if (probes <= 0) probes = std::max(1024, 16 * c.modes());
  return kTwoPi * mean_speed(c, probes);
}

/// Reparametrizes the curve proportionally to arc length and refits it with
/// the given number of modes. The starting point x(0) is preserved.
inline Curve resample_arclength(const Curve& curve, int modes) {
  const int k = std::max(1024, 16 * std::max(modes, curve.modes()));
  std::vector<double> speed(k);
  for (int j = 0; j < k; ++j) speed[j] = curve.derivative(kTwoPi * j / k).norm();
  double mean = 0.0;
  for (double v : speed) mean += v;
  mean /= k;
  const double min_speed = *std::min_element(speed.begin(), speed.end());
  if (!(mean > 0.0) || min_speed < 1e-9 * mean)
    throw Error(ErrorCode::kDegenerateCurve, "curve speed vanishes on the probe grid");

  // Fourier series of the speed; integrating it term by term gives the
  // arclength function l(s) = mean * s + periodic part.
  const int kmax = k / 2 - 1;
  std::vector<double> ca(kmax + 1, 0.0), sb(kmax + 1, 0.0);
  for (int m = 1; m <= kmax; ++m) {
    double a = 0.0, b = 0.0;
    for (int j = 0; j < k; ++j) {
      const int idx = static_cast<int>((static_cast<long long>(m) * j) % k);
      const double th = kTwoPi * idx / k;
      a += speed[j] * std::cos(th);
      b += speed[j] * std::sin(th);
    }
    ca[m] = 2.0 * a / k;
    sb[m] = 2.0 * b / k;
  }
  int used = kmax;
  while (used > 1 && std::abs(ca[used]) + std::abs(sb[used]) < 1e-17 * mean) --used;

  auto length_and_speed = [&](double s) {
    double l = mean * s, v = mean;
    const double c1 = std::cos(s), s1 = std::sin(s);
    double cm = 1.0, sm = 0.0;
    for (int m = 1; m <= used; ++m) {
      const double cn = cm * c1 - sm * s1;
      sm = sm * c1 + cm * s1;
      cm = cn;
      l += (ca[m] * sm + sb[m] * (1.0 - cm)) / m;
      v += ca[m] * cm + sb[m] * sm;
    }
    return std::pair{l, v};
  };

  const int out_n = std::max(4 * modes + 4, 256);
  std::vector<Point> samples(out_n);
  for (int j = 0; j < out_n; ++j) {
    const double u = kTwoPi * j / out_n;
    const double target = mean * u;
    // Safeguarded Newton on the monotone function l(s) - target.
    double lo = 0.0, hi = kTwoPi, s = u;
    for (int it = 0; it < 100; ++it) {
      auto [l, v] = length_and_speed(s);
      const double f = l - target;
      if (f > 0) hi = s; else lo = s;
      if (std::abs(f) < 1e-15 * std::max(1.0, mean * kTwoPi)) break;
      double next = s - f / v;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) < 1e-16) break;
      s = next;
    }
    samples[j] = curve.eval(s);
  }
  return fit_uniform_samples(curve.dim(), samples, modes);
}

/// Minimal distance between two curves: coarse grid, then damped Newton
/// refinement of |x1(s) - x2(t)|^2 from the best grid cells.
inline double min_separation(const Curve& c1, const Curve& c2, int grid = 256) {
  const CurveSamples a = c1.sample(grid), b = c2.sample(grid);
  std::vector<double> d2(static_cast<size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) d2[static_cast<size_t>(i) * grid + j] = (a.pos[i] - b.pos[j]).squaredNorm();

  // Discrete local minima, best first.
  std::vector<std::pair<double, int>> cand;
  auto at = [&](int i, int j) {
    return d2[static_cast<size_t>((i + grid) % grid) * grid + (j + grid) % grid];
  };
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double v = at(i, j);
      bool local = true;
      for (int di = -1; di <= 1 && local; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if ((di || dj) && at(i + di, j + dj) < v) { local = false; break; }
      if (local) cand.emplace_back(v, i * grid + j);
    }
  std::sort(cand.begin(), cand.end());
  if (cand.size() > 8) cand.resize(8);

  double best = cand.empty() ? *std::min_element(d2.begin(), d2.end()) : cand.front().first;
  for (auto [v0, idx] : cand) {
    double s = kTwoPi * (idx / grid) / grid, t = kTwoPi * (idx % grid) / grid;
    double f = v0, mu = 1e-8;
    for (int it = 0; it < 50; ++it) {
      const Point x = c1.eval(s), y = c2.eval(t), d = x - y;
      const Point x1 = c1.derivative(s), y1 = c2.derivative(t);
      const Point x2 = c1.second_derivative(s), y2 = c2.second_derivative(t);
      Eigen::Vector2d g(2.0 * d.dot(x1), -2.0 * d.dot(y1));
      Eigen::Matrix2d h;
      h << 2.0 * (x1.squaredNorm() + d.dot(x2)), -2.0 * x1.dot(y1), -2.0 * x1.dot(y1),
          2.0 * (y1.squaredNorm() - d.dot(y2));
      if (g.norm() < 1e-15) break;
      bool moved = false;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::Matrix2d hm = h + mu * (1.0 + h.diagonal().cwiseAbs().maxCoeff()) * Eigen::Matrix2d::Identity();
        Eigen::Vector2d step = hm.ldlt().solve(-g);
        if (!step.allFinite()) { mu *= 10; continue; }
        const double fn = (c1.eval(s + step[0]) - c2.eval(t + step[1])).squaredNorm();
        if (fn < f) {
          s += step[0];
          t += step[1];
          f = fn;
          mu = std::max(mu * 0.1, 1e-12);
          moved = true;
          break;
        }
        mu *= 10;
      }
      if (!moved) break;
    }
    best = std::min(best, f);
  }
  return std::sqrt(best);
}

/// Ordered, oriented pair of disjoint closed curves with cached separation.
class Link {
 public:
  Link(Curve gamma1, Curve gamma2) : gamma1_(std::move(gamma1)), gamma2_(std::move(gamma2)) {
    if (gamma1_.dim() != gamma2_.dim())
      throw Error(ErrorCode::kConfig, "link components must share the ambient dimension");
    alpha_ = min_separation(gamma1_, gamma2_);
    if (alpha_ < 1e-9)
      throw Error(ErrorCode::kIntersectingLink,
                  "link components intersect (min separation " + std::to_string(alpha_) + ")");
  }

  const Curve& gamma1() const { return gamma1_; }
  const Curve& gamma2() const { return gamma2_; }
  const Curve& component(int i) const { return i == 0 ? gamma1_ : gamma2_; }
  int dim() const { return gamma1_.dim(); }
  double alpha() const { return alpha_; }

  Link swapped() const { return Link(gamma2_, gamma1_); }
  Link reversed(int component) const {
    return component == 0 ? Link(gamma1_.reversed(), gamma2_) : Link(gamma1_, gamma2_.reversed());
  }

 private:
  Curve gamma1_;
  Curve gamma2_;
  double alpha_ = 0.0;
};

inline double min_separation(const Link& link) { return link.alpha(); }

// ---------------------------------------------------------------------------
// Stereographic chart. Inverse projection x -> (2x, |x|^2 - 1) / (|x|^2 + 1)
// sends the origin to the south pole (0,0,0,-1); projection is from the
// north pole e4.

inline Point stereographic_lift_point(const Point& x) {
  const Eigen::Vector3d p = x.head<3>();
  const double r2 = p.squaredNorm();
  Point y;
  y.head<3>() = 2.0 * p / (r2 + 1.0);
  y[3] = (r2 - 1.0) / (r2 + 1.0);
  return y;
}

inline Point stereographic_project_point(const Point& y) {
  const double den = 1.0 - y[3];
  if (std::abs(den) < 1e-12) throw Error(ErrorCode::kSingularity, "projection through the pole");
  Point x = Point::Zero();
  x.head<3>() = y.head<3>() / den;
  return x;
}

/// Fits an image curve and reparametrizes it by arclength, doubling the mode
/// count until the reparametrized fit stays within tol of the exact image
/// (measured by the supplied residual on a probe grid).
inline Curve refit_arclength(int dim, const std::function<Point(double)>& fn,
                             const std::function<double(const Point&)>& residual, double tol,
                             int min_modes, int max_modes = 512) {
  Curve raw = fit_function(dim, fn, 0.1 * tol, min_modes, max_modes);
  for (int m = std::max(8, min_modes);; m *= 2) {
    const int modes = std::min(m, max_modes);
    Curve c = resample_arclength(raw, modes);
    double err = 0.0;
    const int probes = 8 * modes + 64;
    for (int j = 0; j < probes; ++j) err = std::max(err, residual(c.eval(kTwoPi * (j + 0.5) / probes)));
    // The spectral tail bounds the truncation error of the reparametrized fit.
    double tail = 0.0;
    for (int k = (3 * modes) / 4 + 1; k <= c.modes(); ++k)
      tail = std::max({tail, c.cos_coeffs().col(k).norm(), c.sin_coeffs().col(k).norm()});
    if ((err <= tol && tail <= tol) || modes >= max_modes) return c;
  }
}

/// Lifts a curve of R^3 to S^3 and reparametrizes it by arclength.
inline Curve stereographic_lift(const Curve& curve, int min_modes = 16) {
  if (curve.dim() != 3) throw Error(ErrorCode::kConfig, "stereographic lift expects a 3-dimensional curve");
  return refit_arclength(
      4, [&](double s) { return stereographic_lift_point(curve.eval(s)); },
      [](const Point& y) { return std::abs(y.norm() - 1.0); }, 1e-10, min_modes);
}

/// Rotation of R^4 taking the unit vector p to e4, acting in span{p, e4}.
inline Eigen::Matrix4d rotation_to_north(const Point& p) {
  const Point e4(0, 0, 0, 1);
  const double c = clamp_unit(p.dot(e4));
  Point u = p - c * e4;
  const double sn = u.norm();
  if (sn < 1e-15) {
    if (c > 0) return Eigen::Matrix4d::Identity();
    u = Point(1, 0, 0, 0);
  } else {
    u /= sn;
  }
  const double th = std::atan2(sn, c);
  return Eigen::Matrix4d::Identity() + (std::cos(th) - 1.0) * (u * u.transpose() + e4 * e4.transpose()) +
         std::sin(th) * (e4 * u.transpose() - u * e4.transpose());
}

/// Projects a link on S^3 to R^3 through the given pole (rotated to the
/// north pole first). Components are reparametrized by arclength.
inline Link stereographic_chart(const Link& link, const Point& pole, int min_modes = 16) {
  if (link.dim() != 4) throw Error(ErrorCode::kConfig, "stereographic chart expects a link in R^4");
  const Eigen::Matrix4d rot = rotation_to_north(pole.normalized());
  auto project = [&](const Curve& c) {
    return refit_arclength(
        3, [&](double s) { return stereographic_project_point(rot * c.eval(s)); },
        [](const Point&) { return 0.0; }, 1e-10, min_modes);
  };
  return Link(project(link.gamma1()), project(link.gamma2()));
}

/// Point of S^3 (from a fixed Halton candidate set) farthest from the link.
inline Point farthest_pole(const Link& link, int candidates = 512) {
  const CurveSamples a = link.gamma1().sample(128), b = link.gamma2().sample(128);
  Point best = Point(0, 0, 0, 1);
  double best_d = -1.0;
  for (int i = 1; i <= candidates; ++i) {
    const auto h = halton5(static_cast<std::uint64_t>(i));
    // Hopf coordinates give a uniform parametrization of S^3.
    const double eta = std::asin(std::sqrt(h[0])), x1 = kTwoPi * h[1], x2 = kTwoPi * h[2];
    const Point p(std::cos(eta) * std::cos(x1), std::cos(eta) * std::sin(x1), std::sin(eta) * std::cos(x2),
                  std::sin(eta) * std::sin(x2));
    double d = std::numeric_limits<double>::infinity();
    for (const auto& q : a.pos) d = std::min(d, (p - q).norm());
    for (const auto& q : b.pos) d = std::min(d, (p - q).norm());
    if (d > best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Model links.

inline Curve circle(const Point& center, const Point& e1, const Point& e2, double radius = 1.0, int dim = 3,
                    int modes = 1) {
  Curve c(dim, modes);
  c.cos_coeffs().col(0) = center;
  c.cos_coeffs().col(1) = radius * e1;
  c.sin_coeffs().col(1) = radius * e2;
  return Curve(dim, c.cos_coeffs(), c.sin_coeffs());
}

/// The Hopf link of two orthogonal great circles of S^3.
inline Link hopf_link(int modes = 1) {
  return Link(circle(Point::Zero(), Point(1, 0, 0, 0), Point(0, 1, 0, 0), 1.0, 4, modes),
              circle(Point::Zero(), Point(0, 0, 1, 0), Point(0, 0, 0, 1), 1.0, 4, modes));
}

/// Pole used for the built-in R^3 Hopf link; it lies on the Clifford torus,
/// as far from both great circles as possible.
inline Point hopf_chart_pole() { return Point(0.0, std::sqrt(0.5), 0.0, std::sqrt(0.5)); }

/// Hopf link projected stereographically to R^3: two round, linked circles
/// in arclength parametrization.
inline Link hopf_link_r3(int modes = 16) {
  Link l = stereographic_chart(hopf_link(), hopf_chart_pole(), 8);
  return Link(l.gamma1().with_modes(modes), l.gamma2().with_modes(modes));
}

/// Unit circles about the z-axis in the planes z = 0 and z = gap.
inline Link coaxial_circles(double gap, int modes = 1) {
  return Link(circle(Point::Zero(), Point(1, 0, 0, 0), Point(0, 1, 0, 0), 1.0, 3, modes),
              circle(Point(0, 0, gap, 0), Point(1, 0, 0, 0), Point(0, 1, 0, 0), 1.0, 3, modes));
}

/// Two coplanar unit circles with centers 6 apart.
inline Link split_link(int modes = 1) {
  return Link(circle(Point(-3, 0, 0, 0), Point(1, 0, 0, 0), Point(0, 1, 0, 0), 1.0, 3, modes),
              circle(Point(3, 0, 0, 0), Point(1, 0, 0, 0), Point(0, 1, 0, 0), 1.0, 3, modes));
}

/// Two parallel (1,2) curves on the torus with radii R = 2, r = 1: the
/// (2,4)-torus link.
inline Link torus_link_2_4(int modes = 16) {
  auto make = [&](double phase) {
    return fit_function(
        3,
        [phase](double s) {
          const double rad = 2.0 + std::cos(2.0 * s + phase);
          return Point(rad * std::cos(s), rad * std::sin(s), std::sin(2.0 * s + phase), 0.0);
        },
        1e-12, modes, 64);
  };
  return Link(make(0.0), make(kPi));
}

/// Smooth random displacement field with modes 1..4 and decaying
/// amplitudes, scaled so its maximum pointwise norm equals amp.
inline Curve random_perturbation(Rng& rng, int dim, double amp, int top_mode = 4) {
  Curve d(dim, top_mode);
  for (int k = 1; k <= top_mode; ++k)
    for (int r = 0; r < dim; ++r) {
      d.cos_coeffs()(r, k) = rng.uniform(-1.0, 1.0) / (k * k);
      d.sin_coeffs()(r, k) = rng.uniform(-1.0, 1.0) / (k * k);
    }
  Curve c(dim, d.cos_coeffs(), d.sin_coeffs());
  double peak = 0.0;
  for (int j = 0; j < 512; ++j) peak = std::max(peak, c.eval(kTwoPi * j / 512).norm());
  return c.scaled(amp / peak);
}

inline Curve add_curves(const Curve& a, const Curve& b) {
  const int m = std::max(a.modes(), b.modes());
  Curve x = a.with_modes(m), y = b.with_modes(m);
  return Curve(a.dim(), x.cos_coeffs() + y.cos_coeffs(), x.sin_coeffs() + y.sin_coeffs());
}

/// R^3 Hopf link plus seeded smooth perturbations of maximal size amp.
inline Link perturbed_hopf_r3(std::uint64_t seed, double amp, int modes = 16) {
  const Link h = hopf_link_r3(modes);
  Rng rng(seed);
  Curve d1 = random_perturbation(rng, 3, amp), d2 = random_perturbation(rng, 3, amp);
  return Link(add_curves(h.gamma1(), d1).with_modes(modes), add_curves(h.gamma2(), d2).with_modes(modes));
}

/// S^3 Hopf link plus seeded perturbations, renormalized onto S^3.
inline Link perturbed_hopf_s3(std::uint64_t seed, double amp) {
  const Link h = hopf_link();
  Rng rng(seed);
  auto make = [&](const Curve& base) {
    Curve d = random_perturbation(rng, 4, amp);
    return refit_arclength(
        4, [&](double s) { return Point((base.eval(s) + d.eval(s)).normalized()); },
        [](const Point& y) { return std::abs(y.norm() - 1.0); }, 1e-10, 16);
  };
  Curve g1 = make(h.gamma1());
  Curve g2 = make(h.gamma2());
  return Link(std::move(g1), std::move(g2));
}

/// Maximal distance of a curve from the unit sphere on a probe grid.
inline double sphere_deviation(const Curve& c, int probes = 512) {
  double m = 0.0;
  for (int j = 0; j < probes; ++j) m = std::max(m, std::abs(c.eval(kTwoPi * (j + 0.5) / probes).norm() - 1.0));
  return m;
}

inline bool on_unit_sphere(const Link& link, double tol = 1e-8) {
  return link.dim() == 4 && sphere_deviation(link.gamma1()) <= tol && sphere_deviation(link.gamma2()) <= tol;
}

/// Lifts a 3-dimensional link to S^3; 4-dimensional links on S^3 pass through.
inline Link lift_to_sphere(const Link& link) {
  if (link.dim() == 4) {
    if (!on_unit_sphere(link)) throw Error(ErrorCode::kDomain, "4-dimensional link does not lie on S^3");
    return link;
  }
  return Link(stereographic_lift(link.gamma1()), stereographic_lift(link.gamma2()));
}

}  // namespace mobius
