#pragma once

// Partially directed self-avoiding paths on Z^2 and their stretch
// encoding. A path of L steps (east, north or south, ending with an east
// step) is equivalent to a vector of N signed vertical stretch lengths
// with sum |l_n| + N = L; all energetics live on the stretch vector.

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ipdsaw/errors.hpp"
#include "ipdsaw/logmath.hpp"

namespace ipdsaw {

enum class ModelKind { uniform, non_uniform };

inline std::string_view to_string(ModelKind m) {
  return m == ModelKind::uniform ? "u" : "nu";
}

inline ModelKind parse_model(std::string_view s) {
  if (s == "u" || s == "uniform") return ModelKind::uniform;
  if (s == "nu" || s == "non-uniform" || s == "nonuniform") return ModelKind::non_uniform;
  throw std::invalid_argument("unknown model '" + std::string(s) + "' (expected u or nu)");
}

/// Signed vertical stretch lengths l_1..l_N of a path of total length L.
class StretchConfig {
 public:
  StretchConfig() = default;

  explicit StretchConfig(std::vector<int> stretches) : stretches_(std::move(stretches)) {
    if (stretches_.empty()) throw std::invalid_argument("stretch configuration needs N >= 1");
    length_ = static_cast<int>(stretches_.size());
    for (int l : stretches_) length_ += std::abs(l);
  }

  /// Checks membership in the set of N-stretch configurations of length L.
  StretchConfig(std::vector<int> stretches, int total_length) : StretchConfig(std::move(stretches)) {
    if (length_ != total_length)
      throw std::invalid_argument("stretches sum to length " + std::to_string(length_) +
                                  ", expected " + std::to_string(total_length));
  }

  const std::vector<int>& stretches() const { return stretches_; }
  int size() const { return static_cast<int>(stretches_.size()); }
  int length() const { return length_; }
  int operator[](std::size_t i) const { return stretches_[i]; }

  friend bool operator==(const StretchConfig&, const StretchConfig&) = default;

 private:
  std::vector<int> stretches_;
  int length_ = 0;
};

struct Vertex {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

/// Vertex sequence of a partially directed self-avoiding path.
class LatticePath {
 public:
  LatticePath() = default;

  explicit LatticePath(std::vector<Vertex> vertices) : vertices_(std::move(vertices)) { validate(); }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  int steps() const { return static_cast<int>(vertices_.size()) - 1; }

  friend bool operator==(const LatticePath&, const LatticePath&) = default;

 private:
  void validate() const {
    if (vertices_.size() < 2) throw std::invalid_argument("path needs at least one step");
    if (vertices_.front() != Vertex{0, 0}) throw std::invalid_argument("path must start at the origin");
    std::set<Vertex> seen{vertices_.front()};
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
      const int dx = vertices_[i].x - vertices_[i - 1].x;
      const int dy = vertices_[i].y - vertices_[i - 1].y;
      const bool ok = (dx == 1 && dy == 0) || (dx == 0 && std::abs(dy) == 1);
      if (!ok) throw std::invalid_argument("step " + std::to_string(i) + " is not east, north or south");
      if (!seen.insert(vertices_[i]).second)
        throw std::invalid_argument("path revisits a vertex at step " + std::to_string(i));
    }
  }

  std::vector<Vertex> vertices_;
};

/// x wedge y = min(|x|,|y|) when x and y have opposite signs, else 0.
inline int wedge(int x, int y) { return (std::abs(x) + std::abs(y) - std::abs(x + y)) / 2; }

/// Number of self-touchings of the path encoded by `cfg`.
inline long hamiltonian(const StretchConfig& cfg) {
  long h = 0;
  const auto& l = cfg.stretches();
  for (std::size_t n = 0; n + 1 < l.size(); ++n) h += wedge(l[n], l[n + 1]);
  return h;
}

/// Pairs of non-consecutive vertices at lattice distance one.
inline long count_self_touchings(const LatticePath& path) {
  const auto& w = path.vertices();
  long count = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 2; j < w.size(); ++j)
      if (std::abs(w[i].x - w[j].x) + std::abs(w[i].y - w[j].y) == 1) ++count;
  return count;
}

inline StretchConfig path_to_stretches(const LatticePath& path) {
  const auto& w = path.vertices();
  const Vertex last = w[w.size() - 1], prev = w[w.size() - 2];
  if (last.x - prev.x != 1) throw std::invalid_argument("path does not end with an east step");
  std::vector<int> stretches;
  int run = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i].x != w[i - 1].x) {
      stretches.push_back(run);
      run = 0;
    } else {
      run += w[i].y - w[i - 1].y;
    }
  }
  return StretchConfig(std::move(stretches), path.steps());
}

inline LatticePath stretches_to_path(const StretchConfig& cfg) {
  std::vector<Vertex> w;
  w.reserve(static_cast<std::size_t>(cfg.length()) + 1);
  Vertex at{0, 0};
  w.push_back(at);
  for (int l : cfg.stretches()) {
    const int dir = l > 0 ? 1 : -1;
    for (int k = 0; k < std::abs(l); ++k) {
      at.y += dir;
      w.push_back(at);
    }
    at.x += 1;
    w.push_back(at);
  }
  return LatticePath(std::move(w));
}

using BigCount = boost::multiprecision::cpp_int;

/// Exact number of L-step paths.
struct PathCount {
  int length = 0;
  BigCount count;

  double log() const {
    const auto bits = static_cast<long>(boost::multiprecision::msb(count));
    const long shift = bits > 60 ? bits - 60 : 0;
    const BigCount top = count >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
  }
};

/// |W_L| by dynamic programming over (stretch index, remaining length):
/// ways[r] counts stretch sequences that fill r monomers exactly, each
/// stretch taking |l| + 1 of them with two signs for l != 0.
inline PathCount count_paths(int length) {
  if (length < 1) throw std::invalid_argument("count_paths needs L >= 1");
  std::vector<BigCount> ways(static_cast<std::size_t>(length) + 1);
  ways[0] = 1;
  for (int r = 1; r <= length; ++r) {
    BigCount total = ways[static_cast<std::size_t>(r - 1)];
    for (int j = 1; j <= r - 1; ++j) total += 2 * ways[static_cast<std::size_t>(r - 1 - j)];
    ways[static_cast<std::size_t>(r)] = std::move(total);
  }
  return PathCount{length, ways[static_cast<std::size_t>(length)]};
}

inline double log_count_paths(int length) { return count_paths(length).log(); }

/// log P^m_L of a single configuration under the reference law.
inline double path_log_weight(const StretchConfig& cfg, ModelKind model) {
  if (model == ModelKind::uniform) return -log_count_paths(cfg.length());
  const double n = cfg.size(), l = cfg.length();
  return -n * std::log(3.0) - (l - n) * std::numbers::ln2;
}

/// Visits every stretch configuration of total length L.
inline void for_each_stretch_config(int length, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> l;
  std::function<void(int)> rec = [&](int remaining) {
    if (remaining == 0) {
      visit(l);
      return;
    }
    for (int mag = 0; mag <= remaining - 1; ++mag) {
      for (int sign : {1, -1}) {
        if (mag == 0 && sign < 0) continue;
        l.push_back(sign * mag);
        rec(remaining - mag - 1);
        l.pop_back();
      }
    }
  };
  rec(length);
}

inline constexpr int kDefaultBruteForceCutoff = 14;

/// Exact counts of configurations of length L by (N, touches).
struct EnergyHistogram {
  int length = 0;
  // counts[n][h]: configurations with n stretches and h self-touchings.
  std::vector<std::vector<std::uint64_t>> counts;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts)
      for (auto c : row) t += c;
    return t;
  }
};

inline EnergyHistogram energy_histogram(int length, int cutoff = kDefaultBruteForceCutoff) {
  if (length < 1) throw std::invalid_argument("brute force needs L >= 1");
  if (length > cutoff)
    throw BudgetExceeded("brute-force enumeration refused for L=" + std::to_string(length) +
                         " above cutoff " + std::to_string(cutoff));
  EnergyHistogram hist;
  hist.length = length;
  hist.counts.assign(static_cast<std::size_t>(length) + 1,
                     std::vector<std::uint64_t>(static_cast<std::size_t>(length) + 1, 0));
  for_each_stretch_config(length, [&](const std::vector<int>& l) {
    long h = 0;
    for (std::size_t n = 0; n + 1 < l.size(); ++n) h += wedge(l[n], l[n + 1]);
    ++hist.counts[l.size()][static_cast<std::size_t>(h)];
  });
  return hist;
}

/// log Z^m_{L,beta} from an exhaustive histogram; beta = 0 is allowed.
inline double log_partition(const EnergyHistogram& hist, double beta, ModelKind model) {
  if (beta < 0) throw std::invalid_argument("beta must be nonnegative");
  const int length = hist.length;
  const double log_uniform = model == ModelKind::uniform ? -log_count_paths(length) : 0.0;
  std::vector<double> terms;
  for (std::size_t n = 1; n < hist.counts.size(); ++n) {
    const double log_w = model == ModelKind::uniform
                             ? log_uniform
                             : -static_cast<double>(n) * std::log(3.0) -
                                   static_cast<double>(length - static_cast<int>(n)) * std::numbers::ln2;
    for (std::size_t h = 0; h < hist.counts[n].size(); ++h) {
      const auto c = hist.counts[n][h];
      if (c == 0) continue;
      terms.push_back(std::log(static_cast<double>(c)) + beta * static_cast<double>(h) + log_w);
    }
  }
  return log_sum_exp(terms);
}

inline double partition_bruteforce(int length, double beta, ModelKind model,
                                   int cutoff = kDefaultBruteForceCutoff) {
  return log_partition(energy_histogram(length, cutoff), beta, model);
}

}  // namespace ipdsaw
