#pragma once

// Exact Boltzmann sampling by running the representation backwards: draw
// the extension N with probability proportional to Gamma^N P(V_{N+1,L-N}),
// then the auxiliary walk conditioned on that event from the forward
// table, then the stretches l_n = (-1)^{n-1} V_n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ipdsaw/lattice.hpp"
#include "ipdsaw/logmath.hpp"
#include "ipdsaw/walk.hpp"

namespace ipdsaw {

inline constexpr std::string_view kRngName = "splitmix64";

/// SplitMix64 with per-(seed, stream) substreams, so that sample i of a
/// run is reproducible independently of scheduling.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(seed) ^ mix(stream + 0x632BE59BD9B4E019ULL)) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Index drawn with probability proportional to exp(log_weights[i]).
inline std::size_t sample_log_weights(std::span<const double> log_weights, SplitMix64& rng) {
  double m = kLogZero;
  for (double w : log_weights) m = std::max(m, w);
  if (is_log_zero(m)) throw std::logic_error("cannot sample from an all-zero law");
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - m);
  double u = rng.uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (is_log_zero(log_weights[i])) continue;
    last = i;
    u -= std::exp(log_weights[i] - m);
    if (u < 0.0) return i;
  }
  return last;
}

struct PathSample {
  ModelKind model = ModelKind::non_uniform;
  double beta = 0.0;
  int length = 0;
  StretchConfig stretches;
  int extension = 0;  // N, the number of stretches
  long touches = 0;
  int vspan = 0;      // max - min height
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

inline int vertical_span(const StretchConfig& cfg) {
  long y = 0, lo = 0, hi = 0;
  for (int l : cfg.stretches()) {
    y += l;
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  return static_cast<int>(hi - lo);
}

inline constexpr int kDefaultSamplerCap = 256;

class PathSampler {
 public:
  PathSampler(int length, double beta, ModelKind model, std::uint64_t cell_budget = kDefaultCellBudget,
              int length_cap = kDefaultSamplerCap)
      : length_(length), model_(model) {
    if (length < 1) throw std::invalid_argument("sampler needs L >= 1");
    if (length > length_cap)
      throw BudgetExceeded("sampling refused for L=" + std::to_string(length) + " above cap " +
                           std::to_string(length_cap));
    table_ = build_table(GeometricLaw::make(beta), length + 1, std::max(length - 1, 0), cell_budget);
    extension_log_weights_ = extension_log_weights(table_, length, model);
    const double z = log_sum_exp(extension_log_weights_);
    extension_law_.resize(extension_log_weights_.size());
    for (std::size_t i = 0; i < extension_law_.size(); ++i)
      extension_law_[i] = std::exp(extension_log_weights_[i] - z);
  }

  int length() const { return length_; }
  double beta() const { return table_.beta(); }
  ModelKind model() const { return model_; }
  const ConstrainedWalkTable& table() const { return table_; }

  /// Exact law of the extension: entry N-1 is P(N).
  const std::vector<double>& extension_law() const { return extension_law_; }

  double exact_mean_extension() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < extension_law_.size(); ++i) s.add(static_cast<double>(i + 1) * extension_law_[i]);
    return s.value();
  }

  PathSample sample(std::uint64_t seed, std::uint64_t index = 0) const {
    SplitMix64 rng(seed, index);
    const int n = static_cast<int>(sample_log_weights(extension_log_weights_, rng)) + 1;

    // Backward pass over the walk V_0 = 0, ..., V_{n+1} = 0 with area L - n.
    std::vector<int> pos(static_cast<std::size_t>(n) + 2, 0);
    int area = length_ - n;
    int v = 0;
    std::vector<double> w;
    for (int step = n + 1; step >= 1; --step) {
      const int prev_area = area - std::abs(v);
      if (prev_area < 0) throw std::logic_error("backward sampler left the admissible area range");
      w.assign(2 * static_cast<std::size_t>(prev_area) + 1, kLogZero);
      for (int u = -prev_area; u <= prev_area; ++u)
        w[static_cast<std::size_t>(u + prev_area)] =
            table_.logp(step - 1, u, prev_area) + increment_log_prob(table_.law(), v - u);
      const int u = static_cast<int>(sample_log_weights(w, rng)) - prev_area;
      pos[static_cast<std::size_t>(step - 1)] = u;
      area = prev_area;
      v = u;
    }
    if (v != 0 || area != 0) throw std::logic_error("sampled walk does not start at the origin");

    std::vector<int> l(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) l[static_cast<std::size_t>(i - 1)] = (i % 2 == 1 ? 1 : -1) * pos[static_cast<std::size_t>(i)];

    PathSample s;
    s.model = model_;
    s.beta = beta();
    s.length = length_;
    s.stretches = StretchConfig(std::move(l), length_);
    s.extension = n;
    s.touches = hamiltonian(s.stretches);
    s.vspan = vertical_span(s.stretches);
    s.seed = seed;
    s.index = index;
    return s;
  }

  /// Samples index 0..count-1 of one seed, computed by up to `jobs` threads.
  std::vector<PathSample> sample_many(std::uint64_t seed, std::size_t count, unsigned jobs = 1) const {
    std::vector<PathSample> out(count);
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (jobs == 1) {
      for (std::size_t i = 0; i < count; ++i) out[i] = sample(seed, i);
      return out;
    }
    std::vector<std::thread> workers;
    for (unsigned j = 0; j < jobs; ++j)
      workers.emplace_back([&, j] {
        for (std::size_t i = j; i < count; i += jobs) out[i] = sample(seed, i);
      });
    for (auto& t : workers) t.join();
    return out;
  }

 private:
  int length_ = 0;
  ModelKind model_ = ModelKind::non_uniform;
  ConstrainedWalkTable table_;
  std::vector<double> extension_log_weights_;
  std::vector<double> extension_law_;
};

inline PathSample sample_path(int length, double beta, ModelKind model, std::uint64_t seed) {
  return PathSampler(length, beta, model).sample(seed, 0);
}

struct ScalingRow {
  int length = 0;
  std::size_t samples = 0;
  double mean_extension = 0.0;
  double std_error = 0.0;
  double exact_mean_extension = 0.0;
};

struct ScalingReport {
  ModelKind model = ModelKind::non_uniform;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<ScalingRow> rows;
  double exponent = 0.0;        // fit of the sample means
  double exact_exponent = 0.0;  // fit of the exact means
};

inline ScalingReport extension_scaling_experiment(ModelKind model, double beta, std::span<const int> lengths,
                                                  std::size_t samples_per_length, std::uint64_t seed,
                                                  unsigned jobs = 1) {
  if (lengths.size() < 2) throw std::invalid_argument("scaling experiment needs at least two lengths");
  if (samples_per_length < 2) throw std::invalid_argument("scaling experiment needs at least two samples per length");
  ScalingReport rep;
  rep.model = model;
  rep.beta = beta;
  rep.seed = seed;
  std::vector<double> lx, ly, ly_exact;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const PathSampler sampler(lengths[li], beta, model);
    // Each length gets its own stream block so rows are independent.
    const auto samples = sampler.sample_many(seed + 0x9E3779B97F4A7C15ULL * (li + 1), samples_per_length, jobs);
    CompensatedSum s, s2;
    for (const auto& p : samples) s.add(p.extension);
    const double n = static_cast<double>(samples.size());
    const double mean = s.value() / n;
    for (const auto& p : samples) s2.add((p.extension - mean) * (p.extension - mean));
    ScalingRow row;
    row.length = lengths[li];
    row.samples = samples.size();
    row.mean_extension = mean;
    row.std_error = std::sqrt(s2.value() / (n - 1) / n);
    row.exact_mean_extension = sampler.exact_mean_extension();
    rep.rows.push_back(row);
    lx.push_back(std::log(static_cast<double>(row.length)));
    ly.push_back(std::log(row.mean_extension));
    ly_exact.push_back(std::log(row.exact_mean_extension));
  }
  rep.exponent = least_squares(lx, ly).slope;
  rep.exact_exponent = least_squares(lx, ly_exact).slope;
  return rep;
}

}  // namespace ipdsaw
