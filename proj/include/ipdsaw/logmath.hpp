#pragma once

// Log-domain arithmetic shared by every module. Probabilities that can
// underflow (constrained return probabilities, partition functions) are
// carried as natural logarithms; zero is encoded as -infinity.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ipdsaw {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double x) { return x == kLogZero; }

/// log(exp(a) + exp(b)), exact for -inf operands.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  const double d = b - a;
  // exp(-40) is below half an ulp of 1, so the correction vanishes.
  if (!(d > -40.0)) return a;
  return a + std::log1p(std::exp(d));
}

/// log(sum_i exp(x_i)) with a max shift; returns -inf for an empty or all-zero input.
inline double log_sum_exp(std::span<const double> xs) {
  double m = kLogZero;
  for (double x : xs) m = std::max(m, x);
  if (is_log_zero(m)) return kLogZero;
  // Neumaier-compensated accumulation keeps the result independent of
  // summation order to within a couple of ulps.
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    if (is_log_zero(x)) continue;
    const double term = std::exp(x - m);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return m + std::log(sum + comp);
}

inline double log_sum_exp(const std::vector<double>& xs) {
  return log_sum_exp(std::span<const double>(xs.data(), xs.size()));
}

/// Neumaier summation for plain doubles; used where aggregation order
/// must not change reported statistics.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Ordinary least squares slope and intercept of y against x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / n, my = sy.value() / n;
  CompensatedSum sxy, sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy.add((x[i] - mx) * (y[i] - my));
    sxx.add((x[i] - mx) * (x[i] - mx));
  }
  LinearFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace ipdsaw
