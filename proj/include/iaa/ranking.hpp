#pragma once

// Rank-correlation distances between rankings of a shared element universe.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "iaa/error.hpp"
#include "iaa/model.hpp"

namespace iaa {

enum class RankingMode { tau, rho, tau_at_k };

struct RankingConfig {
  RankingMode mode = RankingMode::tau;
  std::size_t k = 5;  // only used by tau_at_k
};

/// Kendall tau-b by O(n^2) pair counting. Returns 1 when fewer than two observations.
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("kendall tau: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 1.0;
  std::int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0) ++ties_x;
      if (dy == 0) ++ties_y;
      if (dx == 0 || dy == 0) continue;
      if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const auto pairs = static_cast<double>(n * (n - 1) / 2);
  const double denom = std::sqrt((pairs - static_cast<double>(ties_x)) *
                                 (pairs - static_cast<double>(ties_y)));
  if (denom == 0) return std::equal(x.begin(), x.end(), y.begin()) ? 1.0 : 0.0;
  return static_cast<double>(concordant - discordant) / denom;
}

/// Number of pairs i < j with seq[i] > seq[j] (merge sort, O(n log n)).
inline std::uint64_t count_inversions(std::vector<std::size_t> seq) {
  std::vector<std::size_t> buffer(seq.size());
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < seq.size(); width *= 2) {
    for (std::size_t lo = 0; lo < seq.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, seq.size());
      const std::size_t hi = std::min(lo + 2 * width, seq.size());
      std::size_t i = lo, j = mid, out = lo;
      while (i < mid && j < hi) {
        if (seq[j] < seq[i]) {
          inversions += mid - i;
          buffer[out++] = seq[j++];
        } else {
          buffer[out++] = seq[i++];
        }
      }
      while (i < mid) buffer[out++] = seq[i++];
      while (j < hi) buffer[out++] = seq[j++];
    }
    std::swap(seq, buffer);
  }
  return inversions;
}

/// Pearson correlation. Returns 1 for fewer than two observations or zero variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return 1.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 1.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace detail {

/// Position of each element of `b` inside `a`'s order; throws unless b permutes a.
inline std::vector<std::size_t> align_rankings(const Ranking& a, const Ranking& b) {
  std::unordered_map<std::string, std::size_t> position;
  position.reserve(a.order.size());
  for (std::size_t i = 0; i < a.order.size(); ++i) {
    if (!position.emplace(a.order[i], i).second) {
      throw ValidationError("ranking repeats element '" + a.order[i] + "'");
    }
  }
  if (b.order.size() != a.order.size()) throw ValidationError("ranking universe mismatch");
  std::vector<std::size_t> seq;
  seq.reserve(b.order.size());
  std::vector<bool> seen(a.order.size(), false);
  for (const auto& e : b.order) {
    auto it = position.find(e);
    if (it == position.end() || seen[it->second]) {
      throw ValidationError("ranking universe mismatch at element '" + e + "'");
    }
    seen[it->second] = true;
    seq.push_back(it->second);
  }
  return seq;
}

}  // namespace detail

/// tau: (1 - tau)/2, i.e. discordant pairs over all pairs. rho: (1 - rho)/2 with rho the
/// Pearson correlation of rank vectors. tau_at_k: (1 - tau_b)/2 over the union of both
/// top-k prefixes, absent elements tied at rank k + 1.
inline double ranking_distance(const Ranking& a, const Ranking& b, const RankingConfig& cfg = {}) {
  const auto seq = detail::align_rankings(a, b);
  const std::size_t n = seq.size();
  switch (cfg.mode) {
    case RankingMode::tau: {
      if (n < 2) return 0.0;
      const auto pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
      return static_cast<double>(count_inversions(seq)) / pairs;
    }
    case RankingMode::rho: {
      // seq[r] is a's position of the element b ranks r-th.
      std::vector<double> rank_a(n), rank_b(n);
      for (std::size_t r = 0; r < n; ++r) {
        rank_a[r] = static_cast<double>(seq[r] + 1);
        rank_b[r] = static_cast<double>(r + 1);
      }
      return std::clamp((1.0 - pearson(rank_a, rank_b)) / 2.0, 0.0, 1.0);
    }
    case RankingMode::tau_at_k: {
      if (cfg.k < 1) throw UsageError("tau_at_k requires k >= 1");
      const std::size_t k = std::min(cfg.k, n);
      // Union of a's top-k (a positions 0..k-1) and the a-positions of b's top-k.
      std::vector<std::size_t> members;
      for (std::size_t p = 0; p < k; ++p) members.push_back(p);
      for (std::size_t r = 0; r < k; ++r) {
        if (seq[r] >= k) members.push_back(seq[r]);
      }
      std::vector<std::size_t> rank_in_b(n, k);
      for (std::size_t r = 0; r < k; ++r) rank_in_b[seq[r]] = r;
      std::vector<double> xa, xb;
      for (std::size_t p : members) {
        xa.push_back(static_cast<double>(p < k ? p + 1 : k + 1));
        xb.push_back(static_cast<double>(rank_in_b[p] + 1));
      }
      return std::clamp((1.0 - kendall_tau_b(xa, xb)) / 2.0, 0.0, 1.0);
    }
  }
  throw UsageError("unknown ranking mode");
}

}  // namespace iaa
