#pragma once

// Independent reference computations used only by the tests. None of
// them share code paths with the library's fast routines.

#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ipdsaw/lattice.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

/// Every L-step partially directed self-avoiding path, by depth-first
/// search on the lattice itself (east/north/south, no revisits, last step east).
inline std::vector<std::vector<ipdsaw::Vertex>> enumerate_paths(int length) {
  std::vector<std::vector<ipdsaw::Vertex>> out;
  std::vector<ipdsaw::Vertex> walk{{0, 0}};
  std::set<ipdsaw::Vertex> used{{0, 0}};
  std::function<void(int, bool)> rec = [&](int left, bool last_east) {
    if (left == 0) {
      if (last_east) out.push_back(walk);
      return;
    }
    const ipdsaw::Vertex at = walk.back();
    for (const ipdsaw::Vertex d : {ipdsaw::Vertex{1, 0}, ipdsaw::Vertex{0, 1}, ipdsaw::Vertex{0, -1}}) {
      const ipdsaw::Vertex next{at.x + d.x, at.y + d.y};
      if (used.count(next)) continue;
      walk.push_back(next);
      used.insert(next);
      rec(left - 1, d.x == 1);
      used.erase(next);
      walk.pop_back();
    }
  };
  rec(length, false);
  return out;
}

/// Non-consecutive vertex pairs at distance one, counted with a hash of
/// occupied sites (a different method from the library's pair loop).
inline long touches(const std::vector<ipdsaw::Vertex>& w) {
  std::map<ipdsaw::Vertex, std::size_t> index;
  for (std::size_t i = 0; i < w.size(); ++i) index[w[i]] = i;
  long count = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (const ipdsaw::Vertex d : {ipdsaw::Vertex{1, 0}, ipdsaw::Vertex{0, 1}}) {
      auto it = index.find({w[i].x + d.x, w[i].y + d.y});
      if (it == index.end()) continue;
      const auto j = it->second;
      if ((j > i ? j - i : i - j) > 1) ++count;
    }
  return count;
}

/// Probability of a lattice path under the non-uniform rule: from each
/// vertex the allowed steps among east/north/south are equally likely.
/// Returned exactly as a rational.
inline Rational nonuniform_weight(const std::vector<ipdsaw::Vertex>& w) {
  Rational p = 1;
  for (std::size_t i = 1; i < w.size(); ++i) {
    // A vertical step cannot be followed by its reverse, so after a
    // vertical step only two moves remain; otherwise three.
    const bool after_vertical = i >= 2 && w[i - 1].x == w[i - 2].x;
    p /= after_vertical ? 2 : 3;
  }
  return p;
}

/// Gibbs law over stretch vectors at length L from the lattice enumeration.
inline std::map<std::vector<int>, double> gibbs_law(int length, double beta, ipdsaw::ModelKind model) {
  const auto paths = enumerate_paths(length);
  std::map<std::vector<int>, double> law;
  double z = 0.0;
  for (const auto& w : paths) {
    const double weight = (model == ipdsaw::ModelKind::uniform ? 1.0 : nonuniform_weight(w).convert_to<double>()) *
                          std::exp(beta * static_cast<double>(touches(w)));
    law[ipdsaw::path_to_stretches(ipdsaw::LatticePath(w)).stretches()] += weight;
    z += weight;
  }
  for (auto& [k, v] : law) v /= z;
  return law;
}

/// log P(V_n = v, A_n = a) by the textbook recursion: for each target
/// state sum over every predecessor with an explicit log-sum-exp.
/// O(N K^3); small sizes only.
inline std::vector<std::vector<std::vector<double>>> naive_table(double beta, int n_max, int k_max) {
  const double r = std::exp(-beta / 2);
  const double log_c = std::log((1 + r) / (1 - r));
  const int width = 2 * k_max + 1;
  const double ninf = -INFINITY;
  std::vector<std::vector<std::vector<double>>> t(
      static_cast<std::size_t>(n_max) + 1,
      std::vector<std::vector<double>>(static_cast<std::size_t>(width), std::vector<double>(static_cast<std::size_t>(k_max) + 1, ninf)));
  t[0][static_cast<std::size_t>(k_max)][0] = 0.0;
  for (int n = 1; n <= n_max; ++n)
    for (int v = -k_max; v <= k_max; ++v)
      for (int a = std::abs(v); a <= k_max; ++a) {
        std::vector<double> terms;
        for (int u = -k_max; u <= k_max; ++u) {
          const double prev = t[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(u + k_max)][static_cast<std::size_t>(a - std::abs(v))];
          if (prev == ninf) continue;
          terms.push_back(prev - beta / 2 * std::abs(v - u) - log_c);
        }
        if (terms.empty()) continue;
        double m = ninf;
        for (double x : terms) m = std::max(m, x);
        double s = 0.0;
        for (double x : terms) s += std::exp(x - m);
        t[static_cast<std::size_t>(n)][static_cast<std::size_t>(v + k_max)][static_cast<std::size_t>(a)] = m + std::log(s);
      }
  return t;
}

/// P(V_n = 0) by n-fold convolution of the increment law truncated to |k| <= cut.
inline double return_probability_convolution(double beta, int n, int cut) {
  const double r = std::exp(-beta / 2);
  const double c = (1 + r) / (1 - r);
  std::vector<double> step(2 * static_cast<std::size_t>(cut) + 1);
  for (int k = -cut; k <= cut; ++k) step[static_cast<std::size_t>(k + cut)] = std::pow(r, std::abs(k)) / c;
  std::vector<double> dist{1.0};
  int half = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> next(dist.size() + step.size() - 1, 0.0);
    for (std::size_t a = 0; a < dist.size(); ++a)
      for (std::size_t b = 0; b < step.size(); ++b) next[a + b] += dist[a] * step[b];
    dist = std::move(next);
    half += cut;
  }
  return dist[static_cast<std::size_t>(half)];
}

}  // namespace oracle
