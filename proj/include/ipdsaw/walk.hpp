#pragma once

// Auxiliary walk with two-sided geometric increments and the exact
// dynamic program for P_beta(V_n = v, A_n = a), A_n = sum_{i<=n} |V_i|.
// The partition function of the polymer is a Gamma^N-weighted sum of the
// constrained return probabilities P_beta(V_{N+1} = 0, A_{N+1} = L - N).

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipdsaw/errors.hpp"
#include "ipdsaw/lattice.hpp"
#include "ipdsaw/logmath.hpp"

namespace ipdsaw {

/// Increment law P_beta(v = k) = exp(-beta |k| / 2) / c_beta on Z.
struct GeometricLaw {
  double beta = 0.0;
  double log_ratio = 0.0;   // log r = -beta / 2
  long double log_c = 0.0L; // log c_beta, extended precision

  static GeometricLaw make(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw std::invalid_argument("geometric increment law needs beta > 0");
    GeometricLaw law;
    law.beta = beta;
    law.log_ratio = -beta / 2.0;
    const long double r = std::exp(-static_cast<long double>(beta) / 2.0L);
    // c = (1 + r) / (1 - r); expm1 keeps 1 - r accurate for small beta.
    law.log_c = std::log1p(r) - std::log(-std::expm1(-static_cast<long double>(beta) / 2.0L));
    return law;
  }

  long double c() const { return std::exp(log_c); }
  double ratio() const { return std::exp(log_ratio); }
};

inline double increment_log_prob(const GeometricLaw& law, long k) {
  return law.log_ratio * static_cast<double>(std::labs(k)) - static_cast<double>(law.log_c);
}

/// v_n = (-1)^{n-1} (l_{n-1} + l_n), n = 1..N+1, with l_0 = l_{N+1} = 0.
inline std::vector<int> stretch_to_walk(const StretchConfig& cfg) {
  const auto& l = cfg.stretches();
  const int n_stretch = cfg.size();
  std::vector<int> v(static_cast<std::size_t>(n_stretch) + 1);
  for (int n = 1; n <= n_stretch + 1; ++n) {
    const int prev = n >= 2 ? l[static_cast<std::size_t>(n - 2)] : 0;
    const int cur = n <= n_stretch ? l[static_cast<std::size_t>(n - 1)] : 0;
    const int sign = (n - 1) % 2 == 0 ? 1 : -1;
    v[static_cast<std::size_t>(n - 1)] = sign * (prev + cur);
  }
  return v;
}

/// Positions V_0..V_n of the walk with the given increments.
inline std::vector<long> walk_positions(std::span<const int> increments) {
  std::vector<long> pos(increments.size() + 1, 0);
  for (std::size_t i = 0; i < increments.size(); ++i) pos[i + 1] = pos[i] + increments[i];
  return pos;
}

/// Inverse of stretch_to_walk: l_n = (-1)^{n-1} V_n. Requires V_{N+1} = 0.
inline StretchConfig walk_to_stretches(std::span<const int> increments) {
  if (increments.size() < 2) throw std::invalid_argument("walk needs at least two increments");
  const auto pos = walk_positions(increments);
  if (pos.back() != 0) throw std::invalid_argument("walk does not return to the origin");
  std::vector<int> l(increments.size() - 1);
  for (std::size_t n = 1; n < pos.size() - 1; ++n)
    l[n - 1] = static_cast<int>(n % 2 == 1 ? pos[n] : -pos[n]);
  return StretchConfig(std::move(l));
}

inline constexpr std::uint64_t kDefaultCellBudget = 2'000'000'000ULL;

namespace detail {

/// Dense layer of log P(V_n = v, A_n = a), |v| <= K, 0 <= a <= K, stored
/// area-major so that rows of constant area are contiguous in v.
struct LayerShape {
  int k_max = 0;
  std::size_t width() const { return 2 * static_cast<std::size_t>(k_max) + 1; }
  std::size_t cells() const { return (static_cast<std::size_t>(k_max) + 1) * width(); }
  std::size_t index(int v, int a) const {
    return static_cast<std::size_t>(a) * width() + static_cast<std::size_t>(v + k_max);
  }
};

/// One forward step of the (V, A) recursion:
///   next[v][b + |v|] = log sum_{v'} exp(prev[v'][b] + log p(v - v')).
/// For each source area b the sum over v' is a convolution with the
/// two-sided kernel r^{|d|}, evaluated by a left and a right geometric
/// recursion. Accumulators are linear mantissas with an explicit log
/// scale that is rebased whenever they would leave double range, so the
/// result is exact up to rounding for every reachable state.
class LayerStepper {
 public:
  LayerStepper(const GeometricLaw& law, int k_max)
      : shape_{k_max},
        log_r_(law.log_ratio),
        r_(std::exp(law.log_ratio)),
        log_c_(static_cast<double>(law.log_c)),
        lin_(shape_.width()),
        left_m_(shape_.width()),
        left_s_(shape_.width()),
        right_m_(shape_.width()),
        right_s_(shape_.width()) {}

  const LayerShape& shape() const { return shape_; }

  void advance(std::span<const double> prev, std::span<double> next) {
    const int k = shape_.k_max;
    for (int b = 0; b <= k; ++b) convolve_row(prev.subspan(shape_.index(-k, b), shape_.width()), b, next);
  }

 private:
  static constexpr double kTiny = 1e-200;
  static constexpr double kDrop = -700.0;

  // Adds exp(x) to the accumulator (m, s) representing m * exp(s).
  static void accumulate(double& m, double& s, double x) {
    if (m == 0.0) {
      m = 1.0;
      s = x;
      return;
    }
    const double d = x - s;
    if (d > 0.0) {
      m = m * std::exp(-d) + 1.0;
      s = x;
    } else if (d > kDrop) {
      m += std::exp(d);
    }
  }

  static void renormalize(double& m, double& s) {
    if (m > 0.0 && m < kTiny) {
      s += std::log(m);
      m = 1.0;
    }
  }

  void convolve_row(std::span<const double> src_full, int b, std::span<double> next) {
    const int k = shape_.k_max;
    const double* src = src_full.data() + k;  // src[v], v in [-b, b]
    const int span_out = k - b;
    int lo = -b, hi = b;
    while (lo <= hi && is_log_zero(src[lo])) ++lo;
    while (hi >= lo && is_log_zero(src[hi])) --hi;
    if (lo > hi) {
      for (int v = -span_out; v <= span_out; ++v) next[shape_.index(v, b + std::abs(v))] = kLogZero;
      return;
    }
    double row_max = kLogZero;
    for (int v = lo; v <= hi; ++v) row_max = std::max(row_max, src[v]);
    double* lin = lin_.data() + k;
    for (int v = lo; v <= hi; ++v) {
      const double d = src[v] - row_max;
      lin[v] = d > kDrop ? std::exp(d) : 0.0;
    }

    // Left sums L(v) = sum_{v' <= v} exp(src[v']) r^{v - v'}.
    double* lm = left_m_.data() + k;
    double* ls = left_s_.data() + k;
    double m = 0.0, s = row_max;
    for (int v = lo; v <= hi; ++v) {
      m *= r_;
      if (!is_log_zero(src[v])) {
        if (s == row_max && lin[v] != 0.0)
          m += lin[v];
        else
          accumulate(m, s, src[v]);
      }
      renormalize(m, s);
      lm[v] = m;
      ls[v] = s;
    }
    const double left_edge = s + std::log(m);

    // Strict right sums R'(v) = sum_{v' > v} exp(src[v']) r^{v' - v}.
    double* rm = right_m_.data() + k;
    double* rs = right_s_.data() + k;
    m = 0.0;
    s = row_max;
    for (int v = hi; v >= lo; --v) {
      rm[v] = m * r_;
      rs[v] = s;
      m *= r_;
      if (!is_log_zero(src[v])) {
        if (s == row_max && lin[v] != 0.0)
          m += lin[v];
        else
          accumulate(m, s, src[v]);
      }
      renormalize(m, s);
    }
    const double right_edge = s + std::log(m);

    for (int v = -span_out; v <= span_out; ++v) {
      double out;
      if (v > hi) {
        out = left_edge + static_cast<double>(v - hi) * log_r_;
      } else if (v < lo) {
        out = right_edge + static_cast<double>(lo - v) * log_r_;
      } else if (rs[v] == ls[v]) {
        out = ls[v] + std::log(lm[v] + rm[v]);
      } else {
        const double right = rm[v] > 0.0 ? rs[v] + std::log(rm[v]) : kLogZero;
        out = log_add(ls[v] + std::log(lm[v]), right);
      }
      next[shape_.index(v, b + std::abs(v))] = out - log_c_;
    }
  }

  LayerShape shape_;
  double log_r_;
  double r_;
  double log_c_;
  std::vector<double> lin_, left_m_, left_s_, right_m_, right_s_;
};

inline std::uint64_t table_cells(int n_max, int k_max) {
  return (static_cast<std::uint64_t>(n_max) + 1) * (static_cast<std::uint64_t>(k_max) + 1) *
         (2 * static_cast<std::uint64_t>(k_max) + 1);
}

}  // namespace detail

/// Immutable table of log P_beta(V_n = v, A_n = a) for n <= N_max and
/// |v| <= a <= K_max. Trajectories whose area exceeds K_max are dropped.
class ConstrainedWalkTable {
 public:
  ConstrainedWalkTable() = default;

  double beta() const { return law_.beta; }
  const GeometricLaw& law() const { return law_; }
  int max_steps() const { return n_max_; }
  int max_area() const { return shape_.k_max; }

  /// log P(V_n = v, A_n = a); -inf outside the stored range.
  double logp(int n, int v, int a) const {
    if (n < 0 || n > n_max_ || a < 0 || a > shape_.k_max || std::abs(v) > shape_.k_max) return kLogZero;
    return data_[layer_offset(n) + shape_.index(v, a)];
  }

  /// log P(V_n = 0, A_n = k), the constrained return probability.
  double log_return_prob(int n, int k) const {
    if (n < 0 || n > n_max_ || k < 0 || k > shape_.k_max)
      throw std::out_of_range("return probability (" + std::to_string(n) + ", " + std::to_string(k) +
                              ") outside table range N_max=" + std::to_string(n_max_) +
                              ", K_max=" + std::to_string(shape_.k_max));
    return data_[layer_offset(n) + shape_.index(0, k)];
  }

  std::span<const double> layer(int n) const {
    return std::span<const double>(data_).subspan(layer_offset(n), shape_.cells());
  }

  friend ConstrainedWalkTable build_table(const GeometricLaw&, int, int, std::uint64_t);
  friend ConstrainedWalkTable load_table(const std::filesystem::path&);
  friend void save_table(const ConstrainedWalkTable&, const std::filesystem::path&);

 private:
  std::size_t layer_offset(int n) const { return static_cast<std::size_t>(n) * shape_.cells(); }

  GeometricLaw law_;
  int n_max_ = 0;
  detail::LayerShape shape_;
  std::vector<double> data_;
};

inline ConstrainedWalkTable build_table(const GeometricLaw& law, int n_max, int k_max,
                                        std::uint64_t cell_budget = kDefaultCellBudget) {
  if (n_max < 1) throw std::invalid_argument("table needs N_max >= 1");
  if (k_max < 0) throw std::invalid_argument("table needs K_max >= 0");
  const auto cells = detail::table_cells(n_max, k_max);
  if (cells > cell_budget)
    throw BudgetExceeded("table with N_max=" + std::to_string(n_max) + ", K_max=" + std::to_string(k_max) +
                         " needs " + std::to_string(cells) + " cells, budget is " + std::to_string(cell_budget));
  ConstrainedWalkTable t;
  t.law_ = law;
  t.n_max_ = n_max;
  t.shape_ = detail::LayerShape{k_max};
  t.data_.assign(static_cast<std::size_t>(cells), kLogZero);
  t.data_[t.shape_.index(0, 0)] = 0.0;
  detail::LayerStepper stepper(law, k_max);
  std::span<double> all(t.data_);
  for (int n = 1; n <= n_max; ++n)
    stepper.advance(all.subspan(t.layer_offset(n - 1), t.shape_.cells()),
                    all.subspan(t.layer_offset(n), t.shape_.cells()));
  return t;
}

inline double constrained_return_prob(const ConstrainedWalkTable& table, int n, int k) {
  return table.log_return_prob(n, k);
}

/// Only the return column log P(V_n = 0, A_n = k) of the table, built by
/// streaming two layers; memory is O(K^2) instead of O(N K^2).
class ReturnProfile {
 public:
  ReturnProfile() = default;

  double beta() const { return law_.beta; }
  const GeometricLaw& law() const { return law_; }
  int max_steps() const { return n_max_; }
  int max_area() const { return k_max_; }

  double log_return_prob(int n, int k) const {
    if (n < 0 || n > n_max_ || k < 0 || k > k_max_)
      throw std::out_of_range("return probability (" + std::to_string(n) + ", " + std::to_string(k) +
                              ") outside profile range");
    return data_[static_cast<std::size_t>(n) * row() + static_cast<std::size_t>(k)];
  }

  friend ReturnProfile build_return_profile(const GeometricLaw&, int, int, std::uint64_t);
  friend ReturnProfile return_profile_from_table(const ConstrainedWalkTable&);
  friend ReturnProfile load_return_profile(const std::filesystem::path&);
  friend void save_return_profile(const ReturnProfile&, const std::filesystem::path&);

 private:
  std::size_t row() const { return static_cast<std::size_t>(k_max_) + 1; }

  GeometricLaw law_;
  int n_max_ = 0;
  int k_max_ = 0;
  std::vector<double> data_;
};

inline ReturnProfile build_return_profile(const GeometricLaw& law, int n_max, int k_max,
                                          std::uint64_t cell_budget = kDefaultCellBudget) {
  if (n_max < 1) throw std::invalid_argument("profile needs N_max >= 1");
  if (k_max < 0) throw std::invalid_argument("profile needs K_max >= 0");
  const detail::LayerShape shape{k_max};
  if (2 * shape.cells() > cell_budget)
    throw BudgetExceeded("return profile with K_max=" + std::to_string(k_max) + " exceeds the cell budget");
  ReturnProfile p;
  p.law_ = law;
  p.n_max_ = n_max;
  p.k_max_ = k_max;
  p.data_.assign((static_cast<std::size_t>(n_max) + 1) * p.row(), kLogZero);
  p.data_[0] = 0.0;
  std::vector<double> cur(shape.cells(), kLogZero), nxt(shape.cells(), kLogZero);
  cur[shape.index(0, 0)] = 0.0;
  detail::LayerStepper stepper(law, k_max);
  for (int n = 1; n <= n_max; ++n) {
    stepper.advance(cur, nxt);
    std::swap(cur, nxt);
    for (int k = 0; k <= k_max; ++k)
      p.data_[static_cast<std::size_t>(n) * p.row() + static_cast<std::size_t>(k)] = cur[shape.index(0, k)];
  }
  return p;
}

inline ReturnProfile return_profile_from_table(const ConstrainedWalkTable& table) {
  ReturnProfile p;
  p.law_ = table.law();
  p.n_max_ = table.max_steps();
  p.k_max_ = table.max_area();
  p.data_.resize((static_cast<std::size_t>(p.n_max_) + 1) * p.row());
  for (int n = 0; n <= p.n_max_; ++n)
    for (int k = 0; k <= p.k_max_; ++k)
      p.data_[static_cast<std::size_t>(n) * p.row() + static_cast<std::size_t>(k)] = table.log_return_prob(n, k);
  return p;
}

// ---------------------------------------------------------------------------
// Binary checkpoints: 8-byte magic, u32 version, f64 beta, i32 N_max,
// i32 K_max, u64 value count, then the values as little-endian f64.

namespace detail {

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_checkpoint(const std::filesystem::path& path, const char (&magic)[9], double beta, int n_max,
                             int k_max, std::span<const double> values) {
  static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
    const std::uint64_t count = values.size();
    const std::int32_t n32 = n_max, k32 = k_max;
    out.write(magic, 8);
    out.write(reinterpret_cast<const char*>(&kCheckpointVersion), sizeof kCheckpointVersion);
    out.write(reinterpret_cast<const char*>(&beta), sizeof beta);
    out.write(reinterpret_cast<const char*>(&n32), sizeof n32);
    out.write(reinterpret_cast<const char*>(&k32), sizeof k32);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw std::runtime_error("short write on checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

struct CheckpointHeader {
  double beta = 0.0;
  int n_max = 0;
  int k_max = 0;
  std::uint64_t count = 0;
};

inline CheckpointHeader read_checkpoint(const std::filesystem::path& path, const char (&magic)[9],
                                        std::vector<double>& values) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char got[8];
  std::uint32_t version = 0;
  std::int32_t n32 = 0, k32 = 0;
  CheckpointHeader h;
  in.read(got, 8);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&h.beta), sizeof h.beta);
  in.read(reinterpret_cast<char*>(&n32), sizeof n32);
  in.read(reinterpret_cast<char*>(&k32), sizeof k32);
  in.read(reinterpret_cast<char*>(&h.count), sizeof h.count);
  if (!in || std::memcmp(got, magic, 8) != 0) throw std::runtime_error("not a checkpoint of this kind: " + path.string());
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  h.n_max = n32;
  h.k_max = k32;
  values.resize(h.count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(h.count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint " + path.string());
  return h;
}

inline constexpr char kTableMagic[9] = "IPDSAWT1";
inline constexpr char kProfileMagic[9] = "IPDSAWR1";

}  // namespace detail

inline void save_table(const ConstrainedWalkTable& t, const std::filesystem::path& path) {
  detail::write_checkpoint(path, detail::kTableMagic, t.beta(), t.n_max_, t.shape_.k_max, t.data_);
}

inline ConstrainedWalkTable load_table(const std::filesystem::path& path) {
  ConstrainedWalkTable t;
  const auto h = detail::read_checkpoint(path, detail::kTableMagic, t.data_);
  t.law_ = GeometricLaw::make(h.beta);
  t.n_max_ = h.n_max;
  t.shape_ = detail::LayerShape{h.k_max};
  if (h.count != detail::table_cells(h.n_max, h.k_max)) throw std::runtime_error("checkpoint size mismatch");
  return t;
}

inline void save_return_profile(const ReturnProfile& p, const std::filesystem::path& path) {
  detail::write_checkpoint(path, detail::kProfileMagic, p.beta(), p.n_max_, p.k_max_, p.data_);
}

inline ReturnProfile load_return_profile(const std::filesystem::path& path) {
  ReturnProfile p;
  const auto h = detail::read_checkpoint(path, detail::kProfileMagic, p.data_);
  p.law_ = GeometricLaw::make(h.beta);
  p.n_max_ = h.n_max;
  p.k_max_ = h.k_max;
  if (h.count != (static_cast<std::uint64_t>(h.n_max) + 1) * (static_cast<std::uint64_t>(h.k_max) + 1))
    throw std::runtime_error("checkpoint size mismatch");
  return p;
}

// ---------------------------------------------------------------------------

/// log Gamma^m(beta): c_beta / e^beta (uniform) or 2 c_beta / (3 e^beta).
inline long double log_gamma(ModelKind model, double beta) {
  const auto law = GeometricLaw::make(beta);
  long double g = law.log_c - static_cast<long double>(beta);
  if (model == ModelKind::non_uniform) g += std::log(2.0L / 3.0L);
  return g;
}

/// log Phi^m_{L,beta}: beta L - log|W_L| (uniform) or L (beta - log 2).
inline double log_phi(ModelKind model, double beta, int length) {
  if (model == ModelKind::uniform) return beta * length - log_count_paths(length);
  return length * (beta - std::numbers::ln2);
}

struct GammaPhi {
  ModelKind model = ModelKind::non_uniform;
  double beta = 0.0;
  int length = 0;
  long double log_gamma = 0.0L;
  double gamma = 0.0;
  double log_phi = 0.0;
};

inline GammaPhi gamma_phi(ModelKind model, double beta, int length) {
  GammaPhi gp;
  gp.model = model;
  gp.beta = beta;
  gp.length = length;
  gp.log_gamma = log_gamma(model, beta);
  gp.gamma = static_cast<double>(std::exp(gp.log_gamma));
  gp.log_phi = log_phi(model, beta, length);
  return gp;
}

/// Terms log[Gamma^N P(V_{N+1, L-N})], N = 1..L (index N-1), without the
/// common prefactor c_beta Phi. They are the unnormalized law of the
/// horizontal extension N under the polymer measure.
template <class Source>
std::vector<double> extension_log_weights(const Source& table, int length, ModelKind model) {
  if (table.max_steps() < length + 1 || table.max_area() < length - 1)
    throw std::invalid_argument("table does not cover L=" + std::to_string(length));
  const double lg = static_cast<double>(log_gamma(model, table.beta()));
  std::vector<double> terms(static_cast<std::size_t>(length));
  for (int n = 1; n <= length; ++n)
    terms[static_cast<std::size_t>(n - 1)] = n * lg + table.log_return_prob(n + 1, length - n);
  return terms;
}

/// log Z^m_{L,beta} = log c_beta + log Phi + log sum_N Gamma^N P(V_{N+1,L-N}).
template <class Source>
double partition_representation(const Source& table, int length, ModelKind model) {
  if (length < 1) throw std::invalid_argument("partition needs L >= 1");
  const auto terms = extension_log_weights(table, length, model);
  return static_cast<double>(table.law().log_c) + log_phi(model, table.beta(), length) + log_sum_exp(terms);
}

inline double partition_representation(int length, double beta, ModelKind model,
                                       std::uint64_t cell_budget = kDefaultCellBudget) {
  if (length < 1) throw std::invalid_argument("partition needs L >= 1");
  const auto law = GeometricLaw::make(beta);
  const auto profile = build_return_profile(law, length + 1, std::max(length - 1, 0), cell_budget);
  return partition_representation(profile, length, model);
}

}  // namespace ipdsaw
