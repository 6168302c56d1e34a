#pragma once

// The entropic cost g_beta(x) of forcing the auxiliary walk back to the
// origin with area x per step:
//   g_N(x) = (1/N) log P_beta(V_N = 0, A_N = xN),  g(x) = sup_N g_N(x).
// Because g is concave and nondecreasing, the concave nondecreasing
// majorant of any set of finite-N values is still a lower bound on g; that
// majorant is what the free-energy module consumes.
//
// A second, independent route evaluates g as the Legendre transform of
// the log spectral radius of the area-tilted transfer operator,
//   g(x) = inf_{lambda >= 0} [lambda x + log rho(lambda)],
// which converges in the truncation of the walk's state space rather than
// in N.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ipdsaw/errors.hpp"
#include "ipdsaw/logmath.hpp"
#include "ipdsaw/walk.hpp"

namespace ipdsaw {

/// Nonnegative rational in lowest terms.
struct Rational {
  long num = 0;
  long den = 1;

  Rational() = default;
  Rational(long n, long d = 1) : num(n), den(d) {
    if (den <= 0 || num < 0) throw std::invalid_argument("rational must be nonnegative with positive denominator");
    const long g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool admits(int n) const { return (static_cast<long>(n) * num) % den == 0; }
  long times(int n) const { return static_cast<long>(n) * num / den; }

  friend bool operator==(const Rational&, const Rational&) = default;
};

template <class T>
concept ReturnSource = requires(const T& t, int n, int k) {
  { t.log_return_prob(n, k) } -> std::convertible_to<double>;
  { t.max_steps() } -> std::convertible_to<int>;
  { t.max_area() } -> std::convertible_to<int>;
  { t.beta() } -> std::convertible_to<double>;
};

/// g_N(alpha) = (1/N) log P(V_N = 0, A_N = alpha N).
template <ReturnSource Source>
double g_finite(const Source& src, int n, Rational alpha) {
  if (n < 2) throw std::invalid_argument("g_finite needs N >= 2");
  if (!alpha.admits(n))
    throw std::invalid_argument("alpha*N is not an integer for alpha=" + std::to_string(alpha.num) + "/" +
                                std::to_string(alpha.den) + ", N=" + std::to_string(n));
  return src.log_return_prob(n, static_cast<int>(alpha.times(n))) / n;
}

inline double g_finite(double beta, int n, Rational alpha) {
  if (n < 2) throw std::invalid_argument("g_finite needs N >= 2");
  if (!alpha.admits(n)) throw std::invalid_argument("alpha*N is not an integer");
  const auto profile = build_return_profile(GeometricLaw::make(beta), n, static_cast<int>(alpha.times(n)));
  return g_finite(profile, n, alpha);
}

struct GEstimate {
  double value = kLogZero;  // max_N g_N(alpha), a lower bound on g(alpha)
  double lower_gap = std::numeric_limits<double>::infinity();
  int best_n = 0;
  int largest_n = 0;
};

/// Sup-form estimate over admissible N <= n_max. lower_gap compares the
/// value with g_N at the largest admissible N not above half the largest
/// admissible N; it is +inf when no such N exists.
template <ReturnSource Source>
GEstimate g_estimate(const Source& src, Rational alpha, int n_max) {
  n_max = std::min(n_max, src.max_steps());
  GEstimate est;
  for (int n = 2; n <= n_max; ++n) {
    if (!alpha.admits(n) || alpha.times(n) > src.max_area()) continue;
    const double g = g_finite(src, n, alpha);
    if (g > est.value) {
      est.value = g;
      est.best_n = n;
    }
    est.largest_n = n;
  }
  if (est.largest_n == 0)
    throw std::invalid_argument("no admissible N <= " + std::to_string(n_max) + " for alpha=" +
                                std::to_string(alpha.num) + "/" + std::to_string(alpha.den));
  for (int n = est.largest_n / 2; n >= 2; --n) {
    if (alpha.admits(n) && alpha.times(n) <= src.max_area()) {
      est.lower_gap = est.value - g_finite(src, n, alpha);
      break;
    }
  }
  return est;
}

inline GEstimate g_estimate(double beta, Rational alpha, int n_max) {
  const int k_max = static_cast<int>(std::ceil(alpha.value() * n_max));
  const auto profile = build_return_profile(GeometricLaw::make(beta), n_max, k_max);
  return g_estimate(profile, alpha, n_max);
}

/// (1/N) log P(A_N <= alpha N, V_N = 0), the inequality-constrained form.
template <ReturnSource Source>
double g_area_leq(const Source& src, int n, double alpha) {
  if (n < 2) throw std::invalid_argument("g_area_leq needs N >= 2");
  if (alpha < 0) throw std::invalid_argument("alpha must be nonnegative");
  const auto k_top = static_cast<long>(std::floor(alpha * n + 1e-9));
  if (k_top > src.max_area()) throw std::out_of_range("alpha*N exceeds the profile's area range");
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(k_top) + 1);
  for (long k = 0; k <= k_top; ++k) terms.push_back(src.log_return_prob(n, static_cast<int>(k)));
  return log_sum_exp(terms) / n;
}

// ---------------------------------------------------------------------------

/// Concave nondecreasing piecewise-linear function through nodes, constant
/// beyond the last node. Built as the majorant of lower-bound samples of
/// g, so every value is itself a lower bound.
class ConcaveEntropy {
 public:
  struct Node {
    double x = 0.0;
    double g = 0.0;
  };

  ConcaveEntropy() = default;

  /// Upper concave hull of the samples, truncated at its maximum.
  static ConcaveEntropy majorant(std::vector<Node> samples, double beta) {
    if (samples.empty()) throw std::invalid_argument("majorant needs at least one sample");
    std::sort(samples.begin(), samples.end(), [](const Node& a, const Node& b) {
      return a.x < b.x || (a.x == b.x && a.g > b.g);
    });
    std::vector<Node> hull;
    for (const auto& p : samples) {
      if (!std::isfinite(p.g)) continue;
      if (!hull.empty() && hull.back().x == p.x) continue;
      while (hull.size() >= 2) {
        const auto& a = hull[hull.size() - 2];
        const auto& b = hull.back();
        // Drop b if it lies on or below the chord a-p.
        const double cross = (b.x - a.x) * (p.g - a.g) - (b.g - a.g) * (p.x - a.x);
        if (cross >= 0.0)
          hull.pop_back();
        else
          break;
      }
      hull.push_back(p);
    }
    auto top = std::max_element(hull.begin(), hull.end(), [](const Node& a, const Node& b) { return a.g < b.g; });
    hull.erase(top + 1, hull.end());
    ConcaveEntropy f;
    f.nodes_ = std::move(hull);
    f.beta_ = beta;
    return f;
  }

  double beta() const { return beta_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  double x_max() const { return nodes_.back().x; }

  /// Nodes enclosing x (equal when x is a node or beyond the last one).
  std::pair<Node, Node> bracket(double x) const {
    if (x < nodes_.front().x) throw std::out_of_range("entropy evaluated below its first node");
    if (x >= nodes_.back().x) return {nodes_.back(), nodes_.back()};
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x, [](double v, const Node& n) { return v < n.x; });
    return {*(it - 1), *it};
  }

  double value(double x) const {
    const auto [a, b] = bracket(x);
    if (a.x == b.x) return a.g;
    const double t = (x - a.x) / (b.x - a.x);
    return a.g + t * (b.g - a.g);
  }

 private:
  std::vector<Node> nodes_;
  double beta_ = 0.0;
};

/// Estimate at a point together with its convergence indicator.
struct GValue {
  double value = 0.0;
  double gap = 0.0;
};

struct EntropyPoint {
  Rational alpha;
  int n = 0;          // N attaining the sup-form maximum
  double g_n = 0.0;   // max_N g_N(alpha)
  double g_est = 0.0; // concave nondecreasing majorant at alpha
  double gap = 0.0;   // lower_gap of the sup-form estimate
};

/// Finite-N entropy curve on the grid alpha = j / grid_den.
struct EntropyCurve {
  double beta = 0.0;
  int n_max = 0;
  int k_max = 0;
  int grid_den = 1;
  std::vector<EntropyPoint> points;
  ConcaveEntropy majorant;

  /// Sup-form value and gap at a grid point.
  GValue at(double x) const {
    const double j = x * grid_den;
    const auto idx = static_cast<long>(std::llround(j));
    if (std::abs(j - static_cast<double>(idx)) > 1e-9 || idx < 0 || idx >= static_cast<long>(points.size()))
      throw std::out_of_range("alpha is not on the entropy curve's grid");
    const auto& p = points[static_cast<std::size_t>(idx)];
    return {p.g_est, p.gap};
  }
};

/// Builds the curve from every finite-N value (k/n, g_n) with
/// 2 <= n <= N_max, k <= K_max; grid points span [0, K_max / N_max].
template <ReturnSource Source>
EntropyCurve build_entropy_curve(const Source& src, int grid_den = 0) {
  EntropyCurve curve;
  curve.beta = src.beta();
  curve.n_max = src.max_steps();
  curve.k_max = src.max_area();
  curve.grid_den = grid_den > 0 ? grid_den : curve.n_max;
  if (curve.n_max < 2) throw std::invalid_argument("entropy curve needs N_max >= 2");

  std::vector<ConcaveEntropy::Node> samples;
  samples.reserve(static_cast<std::size_t>(curve.n_max) * static_cast<std::size_t>(curve.k_max + 1));
  for (int n = 2; n <= curve.n_max; ++n)
    for (int k = 0; k <= curve.k_max; ++k)
      samples.push_back({static_cast<double>(k) / n, src.log_return_prob(n, k) / n});
  curve.majorant = ConcaveEntropy::majorant(std::move(samples), curve.beta);

  const long j_max = static_cast<long>(curve.k_max) * curve.grid_den / curve.n_max;
  for (long j = 0; j <= j_max; ++j) {
    const Rational alpha(j, curve.grid_den);
    EntropyPoint p;
    p.alpha = alpha;
    const auto est = g_estimate(src, alpha, curve.n_max);
    p.n = est.best_n;
    p.g_n = est.value;
    p.gap = est.lower_gap;
    p.g_est = curve.majorant.value(alpha.value());
    curve.points.push_back(p);
  }
  return curve;
}

inline EntropyCurve build_entropy_curve(double beta, int n_max, int k_max, int grid_den = 0) {
  return build_entropy_curve(build_return_profile(GeometricLaw::make(beta), n_max, k_max), grid_den);
}

// ---------------------------------------------------------------------------

struct SpectralOptions {
  double residual_tol = 1e-11;  // ||S phi - rho phi|| at convergence
  int max_iterations = 2'000'000;
  double width_factor = 12.0;   // truncation half-width in units of (sigma^2/lambda)^{1/3}
  int min_half_width = 24;
};

/// Top eigenpair statistics of the area-tilted kernel at one lambda.
struct TiltedSpectrum {
  double lambda = 0.0;
  int half_width = 0;
  double log_rho = 0.0;   // Lambda(lambda)
  double mean_abs = 0.0;  // -Lambda'(lambda) = <|v|> under phi^2
  int iterations = 0;
};

/// Area-tilted transfer operator S = D^{1/2} P D^{1/2} on v in [-M, M],
/// P(v, v') = r^{|v - v'|} / c_beta, D = diag(exp(-lambda |v|)).
/// Truncating the state space can only lower the spectral radius, so the
/// Legendre transform of the truncated log rho is a lower bound on g.
class SpectralEntropy {
 public:
  explicit SpectralEntropy(double beta, SpectralOptions opts = {})
      : law_(GeometricLaw::make(beta)), opts_(opts) {
    const double r = law_.ratio();
    variance_ = 2.0 * r / ((1.0 - r) * (1.0 - r));
  }

  double beta() const { return law_.beta; }

  int auto_half_width(double lambda) const {
    const double w = std::cbrt(variance_ / lambda);
    return std::max(opts_.min_half_width, static_cast<int>(std::ceil(opts_.width_factor * w)));
  }

  TiltedSpectrum spectrum(double lambda, int half_width = 0) const {
    std::vector<double> phi;
    return spectrum(lambda, half_width, phi);
  }

  /// `phi` is a warm start on input (resized as needed) and the
  /// normalized top eigenvector on output.
  TiltedSpectrum spectrum(double lambda, int half_width, std::vector<double>& phi) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("tilt must be positive");
    const int m = half_width > 0 ? half_width : auto_half_width(lambda);
    const std::size_t size = 2 * static_cast<std::size_t>(m) + 1;
    std::vector<double> d(size);
    for (int v = -m; v <= m; ++v) d[static_cast<std::size_t>(v + m)] = std::exp(-0.5 * lambda * std::abs(v));
    resize_warm_start(phi, size, d);

    const double r = law_.ratio();
    const double inv_c = static_cast<double>(std::exp(-law_.log_c));
    std::vector<double> tmp(size), out(size);
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      for (std::size_t i = 0; i < size; ++i) tmp[i] = d[i] * x[i];
      double acc = 0.0;
      for (std::size_t i = 0; i < size; ++i) {
        acc = acc * r + tmp[i];
        y[i] = acc;
      }
      acc = 0.0;
      for (std::size_t i = size; i-- > 0;) {
        y[i] += acc * r;
        acc = acc * r + tmp[i];
      }
      for (std::size_t i = 0; i < size; ++i) y[i] *= d[i] * inv_c;
    };

    TiltedSpectrum s;
    s.lambda = lambda;
    s.half_width = m;
    double rho = 0.0;
    for (int it = 1; it <= opts_.max_iterations; ++it) {
      apply(phi, out);
      rho = std::inner_product(phi.begin(), phi.end(), out.begin(), 0.0);
      double res2 = 0.0, norm2 = 0.0;
      for (std::size_t i = 0; i < size; ++i) {
        const double e = out[i] - rho * phi[i];
        res2 += e * e;
        norm2 += out[i] * out[i];
      }
      const double norm = std::sqrt(norm2);
      for (std::size_t i = 0; i < size; ++i) phi[i] = out[i] / norm;
      s.iterations = it;
      if (std::sqrt(res2) <= opts_.residual_tol * rho) break;
      if (it == opts_.max_iterations) throw NotConverged("power iteration did not converge");
    }
    s.log_rho = std::log(rho);
    double mean = 0.0;
    for (int v = -m; v <= m; ++v) mean += std::abs(v) * phi[static_cast<std::size_t>(v + m)] * phi[static_cast<std::size_t>(v + m)];
    s.mean_abs = mean;
    return s;
  }

  /// g(x) from the tangent at the tilt whose mean area per step is x.
  double value(double x, int half_width_scale = 1) const {
    if (x < 0) throw std::invalid_argument("area per step must be nonnegative");
    if (x == 0.0) return -static_cast<double>(law_.log_c);
    std::vector<double> phi;
    auto at = [&](double lambda) {
      const int m = auto_half_width(lambda) * half_width_scale;
      return spectrum(lambda, m, phi);
    };
    // mean_abs(lambda) decreases in lambda; bracket in log lambda.
    double lo = std::log(1.0), hi = std::log(1.0);
    TiltedSpectrum s = at(1.0);
    if (s.mean_abs > x) {
      while (s.mean_abs > x) {
        lo = hi;
        hi += std::log(4.0);
        s = at(std::exp(hi));
      }
    } else {
      while (s.mean_abs <= x) {
        hi = lo;
        lo -= std::log(4.0);
        s = at(std::exp(lo));
        if (lo < std::log(1e-9)) throw std::out_of_range("area per step too large for the spectral route");
      }
    }
    // Illinois regula falsi on log mean_abs versus log lambda.
    auto f = [&](double log_lambda, TiltedSpectrum& sp) {
      sp = at(std::exp(log_lambda));
      return std::log(sp.mean_abs) - std::log(x);
    };
    TiltedSpectrum s_lo, s_hi, s_mid;
    double f_lo = f(lo, s_lo), f_hi = f(hi, s_hi);
    int side = 0;
    TiltedSpectrum best = std::abs(f_lo) < std::abs(f_hi) ? s_lo : s_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
      const double f_mid = f(mid, s_mid);
      best = s_mid;
      if (std::abs(f_mid) < 1e-13) break;
      if ((f_mid > 0) == (f_lo > 0)) {
        lo = mid;
        f_lo = f_mid;
        if (side == -1) f_hi /= 2;
        side = -1;
      } else {
        hi = mid;
        f_hi = f_mid;
        if (side == 1) f_lo /= 2;
        side = 1;
      }
    }
    return best.lambda * x + best.log_rho;
  }

  /// Value with the change under doubling the truncation as its gap.
  GValue at(double x) const {
    const double v1 = value(x, 1);
    const double v2 = value(x, 2);
    return {std::max(v1, v2), std::abs(v2 - v1)};
  }

  /// Tangent points (x(lambda), g(x(lambda))) on a log-spaced lambda grid
  /// covering [0, x_max], plus the exact g(0) = -log c_beta.
  ConcaveEntropy curve(double x_max, int nodes = 240) const {
    std::vector<ConcaveEntropy::Node> samples{{0.0, -static_cast<double>(law_.log_c)}};
    std::vector<double> phi;
    double lambda_min = 1.0;
    while (spectrum(lambda_min, 0, phi).mean_abs < x_max) lambda_min /= 2.0;
    const double lambda_max = 60.0;
    phi.clear();
    for (int i = nodes - 1; i >= 0; --i) {
      const double t = static_cast<double>(i) / (nodes - 1);
      const double lambda = lambda_min * std::pow(lambda_max / lambda_min, t);
      const auto s = spectrum(lambda, 0, phi);
      samples.push_back({s.mean_abs, lambda * s.mean_abs + s.log_rho});
    }
    return ConcaveEntropy::majorant(std::move(samples), law_.beta);
  }

 private:
  static void resize_warm_start(std::vector<double>& phi, std::size_t size, const std::vector<double>& d) {
    if (phi.size() == size) return;
    std::vector<double> fresh(size);
    if (phi.empty()) {
      fresh = d;
    } else {
      // Center the old vector inside the new range; pad with small values.
      const long old_half = static_cast<long>(phi.size() / 2), new_half = static_cast<long>(size / 2);
      for (long v = -new_half; v <= new_half; ++v) {
        const long j = v + old_half;
        fresh[static_cast<std::size_t>(v + new_half)] =
            (j >= 0 && j < static_cast<long>(phi.size())) ? phi[static_cast<std::size_t>(j)] + 1e-3 * d[static_cast<std::size_t>(v + new_half)]
                                                          : 1e-3 * d[static_cast<std::size_t>(v + new_half)];
      }
    }
    double norm = 0.0;
    for (double x : fresh) norm += x * x;
    for (double& x : fresh) x /= std::sqrt(norm);
    phi = std::move(fresh);
  }

  GeometricLaw law_;
  SpectralOptions opts_;
  double variance_ = 0.0;
};

// ---------------------------------------------------------------------------

struct DecayFit {
  double exponent = 0.0;       // p in -g ~ C / x^p
  double log_prefactor = 0.0;  // log C
  std::vector<double> alphas;
  std::vector<double> values;
  std::vector<double> gaps;
};

/// Least-squares slope of log(-g) against log(alpha). Refuses when any
/// estimate's gap is at least `max_relative_gap` of its magnitude.
template <class Provider>
DecayFit asymptotic_decay_fit(const Provider& g, std::span<const double> alphas, double max_relative_gap = 0.1) {
  if (alphas.size() < 2) throw std::invalid_argument("decay fit needs at least two alphas");
  DecayFit fit;
  std::vector<double> lx, ly;
  for (double a : alphas) {
    if (a < 2.0 || a > 16.0) throw std::invalid_argument("decay fit alphas must lie in [2, 16]");
    const GValue gv = g.at(a);
    if (!(gv.value < 0.0)) throw NotConverged("entropy estimate is not negative at alpha=" + std::to_string(a));
    if (!(gv.gap < max_relative_gap * std::abs(gv.value)))
      throw NotConverged("entropy estimate at alpha=" + std::to_string(a) + " has gap " + std::to_string(gv.gap) +
                         " against value " + std::to_string(gv.value));
    fit.alphas.push_back(a);
    fit.values.push_back(gv.value);
    fit.gaps.push_back(gv.gap);
    lx.push_back(std::log(a));
    ly.push_back(std::log(-gv.value));
  }
  const auto lf = least_squares(lx, ly);
  fit.exponent = -lf.slope;
  fit.log_prefactor = lf.intercept;
  return fit;
}

}  // namespace ipdsaw
