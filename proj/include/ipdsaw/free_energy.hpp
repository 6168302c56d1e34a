#pragma once

// Free energies: finite-size values from the representation, the
// variational formula for the excess free energy
//   f~(beta) = sup_{alpha in [0,1]} alpha log Gamma(beta) + alpha g((1-alpha)/alpha),
// critical points Gamma(beta_c) = 1, and the transition-order fit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipdsaw/entropy.hpp"
#include "ipdsaw/errors.hpp"
#include "ipdsaw/lattice.hpp"
#include "ipdsaw/logmath.hpp"
#include "ipdsaw/walk.hpp"

namespace ipdsaw {

inline constexpr double kDefaultFloor = 1e-9;

enum class Phase { collapsed, critical_window, extended };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::collapsed: return "collapsed";
    case Phase::critical_window: return "critical-window";
    case Phase::extended: return "extended";
  }
  return "?";
}

inline Phase classify_phase(double f_excess, double floor = kDefaultFloor) {
  if (f_excess < floor) return Phase::collapsed;
  if (f_excess <= 10.0 * floor) return Phase::critical_window;
  return Phase::extended;
}

/// Collapsed-phase free energy phi^m_beta.
inline double collapse_free_energy(ModelKind model, double beta) {
  return model == ModelKind::uniform ? beta - std::log(1.0 + std::numbers::sqrt2) : beta - std::numbers::ln2;
}

struct FreeEnergyPoint {
  ModelKind model = ModelKind::non_uniform;
  double beta = 0.0;
  std::optional<int> length;  // unset for the infinite-volume limit
  double f = 0.0;
  double f_excess = 0.0;
  std::optional<Phase> phase;
  double alpha_star = 0.0;      // smallest maximizer of the variational objective
  double argmax_diameter = 0.0; // width of the near-maximal alpha set
  double x_star = 0.0;          // (1 - alpha*) / alpha*
};

inline FreeEnergyPoint finite_size_free_energy(int length, double beta, ModelKind model,
                                               std::uint64_t budget = kDefaultCellBudget) {
  FreeEnergyPoint p;
  p.model = model;
  p.beta = beta;
  p.length = length;
  p.f = partition_representation(length, beta, model, budget) / length;
  p.f_excess = p.f - collapse_free_energy(model, beta);
  if (p.f > beta + 1e-12) throw std::logic_error("finite-size free energy exceeds beta");
  return p;
}

/// alpha log Gamma + alpha g((1 - alpha)/alpha), 0 at alpha = 0.
inline double variational_objective(double alpha, double log_gamma_value, const ConcaveEntropy& g) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (alpha == 0.0) return 0.0;
  return alpha * (log_gamma_value + g.value((1.0 - alpha) / alpha));
}

inline double variational_objective(double alpha, double beta, ModelKind model, const ConcaveEntropy& g) {
  return variational_objective(alpha, static_cast<double>(log_gamma(model, beta)), g);
}

struct FreeEnergyOptions {
  int alpha_grid = 512;
  double floor = kDefaultFloor;
  double argmax_tolerance = 1e-12;
};

/// Sup of the variational objective over a uniform alpha grid refined by
/// golden-section search around the grid argmax. Because g is piecewise
/// linear, the sup is attained at a node of g (or at alpha = 0), so node
/// values are included as an exact cross-check.
inline FreeEnergyPoint excess_free_energy(double beta, ModelKind model, const ConcaveEntropy& g,
                                          FreeEnergyOptions opts = {}) {
  const double lg = static_cast<double>(log_gamma(model, beta));
  auto obj = [&](double a) { return variational_objective(a, lg, g); };

  struct Candidate {
    double alpha;
    double value;
  };
  std::vector<Candidate> cands;
  cands.reserve(static_cast<std::size_t>(opts.alpha_grid) + g.nodes().size() + 2);
  for (int i = 0; i <= opts.alpha_grid; ++i) {
    const double a = static_cast<double>(i) / opts.alpha_grid;
    cands.push_back({a, obj(a)});
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].value > cands[best].value) best = i;

  if (best > 0) {
    double lo = cands[best - 1].alpha, hi = cands[std::min(best + 1, cands.size() - 1)].alpha;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a1 = hi - phi * (hi - lo), a2 = lo + phi * (hi - lo);
    double f1 = obj(a1), f2 = obj(a2);
    for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
      if (f1 >= f2) {
        hi = a2;
        a2 = a1;
        f2 = f1;
        a1 = hi - phi * (hi - lo);
        f1 = obj(a1);
      } else {
        lo = a1;
        a1 = a2;
        f1 = f2;
        a2 = lo + phi * (hi - lo);
        f2 = obj(a2);
      }
    }
    cands.push_back({a1, f1});
    cands.push_back({a2, f2});
  }
  for (const auto& node : g.nodes()) {
    const double a = 1.0 / (1.0 + node.x);
    cands.push_back({a, obj(a)});
  }

  double top = kLogZero;
  for (const auto& c : cands) top = std::max(top, c.value);
  const double tol = opts.argmax_tolerance * std::max(1.0, std::abs(top));
  double a_min = 1.0, a_max = 0.0;
  for (const auto& c : cands) {
    if (c.value >= top - tol) {
      a_min = std::min(a_min, c.alpha);
      a_max = std::max(a_max, c.alpha);
    }
  }

  FreeEnergyPoint p;
  p.model = model;
  p.beta = beta;
  p.f_excess = top;
  p.f = top + collapse_free_energy(model, beta);
  p.phase = classify_phase(top, opts.floor);
  p.alpha_star = a_min;
  p.argmax_diameter = a_max - a_min;
  p.x_star = a_min > 0.0 ? (1.0 - a_min) / a_min : std::numeric_limits<double>::infinity();
  return p;
}

// ---------------------------------------------------------------------------

struct CriticalPoint {
  ModelKind model = ModelKind::non_uniform;
  double beta_c = 0.0;
  double residual = 0.0;  // |Gamma(beta_c) - 1|
};

namespace detail {

template <class F>
long double bisect(F f, long double lo, long double hi) {
  long double flo = f(lo);
  if ((flo > 0) == (f(hi) > 0)) throw std::logic_error("root is not bracketed");
  for (int it = 0; it < 200; ++it) {
    const long double mid = lo + (hi - lo) / 2;
    if (mid == lo || mid == hi) break;
    const long double fm = f(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

}  // namespace detail

/// Root of log Gamma(beta) on [0.1, 5] by extended-precision bisection.
inline CriticalPoint critical_point(ModelKind model) {
  const long double b = detail::bisect([&](long double beta) { return log_gamma(model, static_cast<double>(beta)); },
                                       0.1L, 5.0L);
  // log_gamma takes a double; refine in long double on the closed form.
  const long double refined = detail::bisect(
      [&](long double beta) {
        const long double r = std::exp(-beta / 2);
        const long double log_c = std::log1p(r) - std::log1p(-r);
        const long double extra = model == ModelKind::uniform ? 0.0L : std::log(2.0L / 3.0L);
        return log_c + extra - beta;
      },
      b - 1e-6L, b + 1e-6L);
  CriticalPoint cp;
  cp.model = model;
  cp.beta_c = static_cast<double>(refined);
  cp.residual = static_cast<double>(std::abs(std::expm1(log_gamma(model, cp.beta_c))));
  return cp;
}

/// beta_c from the cubic route: 3x^3 - 3x^2 - 2x - 2 = 0 with x = e^{beta/2}
/// (non-uniform), y^3 + y^2 + y - 1 = 0 with y = e^{-beta/2} (uniform).
inline double critical_point_cubic(ModelKind model) {
  if (model == ModelKind::non_uniform) {
    const long double x = detail::bisect([](long double x) { return 3 * x * x * x - 3 * x * x - 2 * x - 2; }, 1.0L, 2.0L);
    return static_cast<double>(2 * std::log(x));
  }
  const long double y = detail::bisect([](long double y) { return y * y * y + y * y + y - 1; }, 0.0L, 1.0L);
  return static_cast<double>(-2 * std::log(y));
}

// ---------------------------------------------------------------------------

using EntropyFactory = std::function<ConcaveEntropy(double beta)>;

struct OrderFit {
  ModelKind model = ModelKind::non_uniform;
  double beta_c = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> eps;
  std::vector<double> f_excess;
  std::vector<double> x_star;
};

/// Log-log slope of f~(beta_c - eps) against eps.
inline OrderFit transition_order_fit(ModelKind model, std::span<const double> eps_grid, const EntropyFactory& entropy,
                                     FreeEnergyOptions opts = {}) {
  if (eps_grid.size() < 2) throw std::invalid_argument("order fit needs at least two eps values");
  OrderFit fit;
  fit.model = model;
  fit.beta_c = critical_point(model).beta_c;
  std::vector<double> lx, ly;
  for (double e : eps_grid) {
    if (e < 0.05 || e > 0.5) throw std::invalid_argument("eps must lie in [0.05, 0.5]");
    const double beta = fit.beta_c - e;
    const auto p = excess_free_energy(beta, model, entropy(beta), opts);
    if (p.f_excess < 10.0 * opts.floor)
      throw NotConverged("excess free energy " + std::to_string(p.f_excess) + " at eps=" + std::to_string(e) +
                         " is below ten times the numerical floor");
    fit.eps.push_back(e);
    fit.f_excess.push_back(p.f_excess);
    fit.x_star.push_back(p.x_star);
    lx.push_back(std::log(e));
    ly.push_back(std::log(p.f_excess));
  }
  const auto lf = least_squares(lx, ly);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  return fit;
}

/// Entropy from the finite-N sup form with N_max steps and K_max = area_factor * N_max.
inline EntropyFactory finite_n_entropy(int n_max, int area_factor = 8, std::uint64_t budget = kDefaultCellBudget) {
  return [=](double beta) {
    const auto profile = build_return_profile(GeometricLaw::make(beta), n_max, area_factor * n_max, budget);
    return build_entropy_curve(profile).majorant;
  };
}

inline EntropyFactory spectral_entropy(double x_max = 32.0) {
  return [=](double beta) { return SpectralEntropy(beta).curve(x_max); };
}

}  // namespace ipdsaw
