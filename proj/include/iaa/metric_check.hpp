#pragma once

// Empirical check of the distance axioms over a payload sample.

#include <cmath>
#include <span>
#include <vector>

#include "iaa/distance.hpp"
#include "iaa/error.hpp"

namespace iaa {

struct PairViolation {
  std::size_t i, j;
  double value;  // offending d(i, j), or |d(i,j) - d(j,i)| for symmetry
};

struct TripleViolation {
  std::size_t i, j, k;
  double excess;  // d(i,k) - d(i,j) - d(j,k)
};

struct PropertyReport {
  std::size_t sample_size = 0;
  double tolerance = 0;
  bool triangle_checked = false;
  std::vector<PairViolation> negative;
  std::vector<PairViolation> asymmetric;
  std::vector<PairViolation> nonzero_self;  // i == j
  std::vector<TripleViolation> triangle;

  bool ok() const {
    return negative.empty() && asymmetric.empty() && nonzero_self.empty() && triangle.empty();
  }
};

/// Checks nonnegativity, symmetry and d(a,a) = 0 over all sample pairs, and the triangle
/// inequality over all triples unless the distance is flagged as a dissimilarity (pass
/// `check_triangle` to override). Every violation is reported.
inline PropertyReport check_metric_properties(const Distance& d, std::span<const LabelPayload> sample,
                                              double tolerance,
                                              std::optional<bool> check_triangle = std::nullopt) {
  if (tolerance < 0) throw UsageError("tolerance must be nonnegative");
  for (const auto& p : sample) {
    if (kind_of(p) != d.kind()) {
      throw ValidationError("sample payload kind '" + std::string(to_string(kind_of(p))) +
                            "' does not match distance kind '" +
                            std::string(to_string(d.kind())) + "'");
    }
  }
  const std::size_t n = sample.size();
  PropertyReport report;
  report.sample_size = n;
  report.tolerance = tolerance;
  report.triangle_checked = check_triangle.value_or(!d.dissimilarity());

  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = d(sample[i], sample[j]);
  }
  auto at = [&](std::size_t i, std::size_t j) { return m[i * n + j]; };

  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(at(i, i)) > tolerance) report.nonzero_self.push_back({i, i, at(i, i)});
    for (std::size_t j = 0; j < n; ++j) {
      if (at(i, j) < -tolerance) report.negative.push_back({i, j, at(i, j)});
      if (i < j && std::abs(at(i, j) - at(j, i)) > tolerance) {
        report.asymmetric.push_back({i, j, std::abs(at(i, j) - at(j, i))});
      }
    }
  }
  if (report.triangle_checked) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double dij = at(i, j);
        for (std::size_t k = 0; k < n; ++k) {
          const double excess = at(i, k) - dij - at(j, k);
          if (excess > tolerance) report.triangle.push_back({i, j, k, excess});
        }
      }
    }
  }
  return report;
}

}  // namespace iaa
