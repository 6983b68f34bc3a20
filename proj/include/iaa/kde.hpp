#pragma once

// Gaussian kernel density estimate with optional boundary reflection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "iaa/error.hpp"

namespace iaa {

struct KdeBounds {
  std::optional<double> low;
  std::optional<double> high;
  bool operator==(const KdeBounds&) const = default;
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Scott's rule: sd * n^(-1/5), sd with n - 1 denominator. Returns 0 when undefined
/// (n < 2 or zero spread).
inline double scott_bandwidth(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) return 0.0;
  double mean = 0;
  for (double x : sample) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return sd * std::pow(static_cast<double>(n), -0.2);
}

/// Mixture of Gaussians centered on the support points. With bounds configured, each
/// point is mirrored across every bound, the density is restricted to [low, high] and
/// renormalized to unit mass there.
class KdeModel {
 public:
  KdeModel(std::vector<double> support, double bandwidth, KdeBounds bounds = {})
      : support_(std::move(support)), bandwidth_(bandwidth), bounds_(bounds) {
    if (support_.empty()) throw NumericError("kernel density estimate needs a nonempty sample");
    if (!(bandwidth_ > 0) || !std::isfinite(bandwidth_)) {
      throw NumericError("kernel bandwidth must be positive");
    }
    if (bounds_.low && bounds_.high && !(*bounds_.high > *bounds_.low)) {
      throw NumericError("kernel bounds must satisfy low < high");
    }
    std::sort(support_.begin(), support_.end());
    for (double x : support_) {
      centers_.push_back(x);
      if (bounds_.low) centers_.push_back(2.0 * *bounds_.low - x);
      if (bounds_.high) centers_.push_back(2.0 * *bounds_.high - x);
    }
    std::sort(centers_.begin(), centers_.end());
    if (bounds_.low) below_low_ = mass_up_to(*bounds_.low);
    normalizer_ = bounds_.high ? mass_up_to(*bounds_.high) - below_low_ : 1.0 - below_low_;
  }

  /// Fits with Scott's bandwidth unless one is given. A degenerate sample (one point or
  /// zero spread) falls back to 1e-3 of the bounded width, or of max(1, |mean|).
  static KdeModel fit(std::span<const double> sample, KdeBounds bounds = {},
                      std::optional<double> bandwidth = std::nullopt) {
    if (sample.empty()) throw NumericError("kernel density estimate needs a nonempty sample");
    double h = bandwidth.value_or(scott_bandwidth(sample));
    if (!bandwidth && !(h > 0)) {
      if (bounds.low && bounds.high) {
        h = 1e-3 * (*bounds.high - *bounds.low);
      } else {
        double mean = 0;
        for (double x : sample) mean += x;
        mean /= static_cast<double>(sample.size());
        h = 1e-3 * std::max(1.0, std::abs(mean));
      }
    }
    return KdeModel(std::vector<double>(sample.begin(), sample.end()), h, bounds);
  }

  double pdf(double x) const {
    if (outside(x)) return 0.0;
    double sum = 0;
    for (double c : centers_) sum += normal_pdf((x - c) / bandwidth_);
    return sum / (bandwidth_ * static_cast<double>(support_.size()) * normalizer_);
  }

  double cdf(double x) const {
    if (bounds_.low && x <= *bounds_.low) return 0.0;
    if (bounds_.high && x >= *bounds_.high) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    return std::clamp((mass_up_to(x) - below_low_) / normalizer_, 0.0, 1.0);
  }

  double bandwidth() const { return bandwidth_; }
  const KdeBounds& bounds() const { return bounds_; }
  const std::vector<double>& support() const { return support_; }

 private:
  static constexpr double kCutoff = 9.0;  // |z| beyond which the kernel CDF is 0 or 1

  bool outside(double x) const {
    return (bounds_.low && x < *bounds_.low) || (bounds_.high && x > *bounds_.high);
  }

  /// Unnormalized mixture mass on (-inf, x], in units of support points.
  double mass_up_to(double x) const {
    const auto first = std::lower_bound(centers_.begin(), centers_.end(), x - kCutoff * bandwidth_);
    const auto last = std::upper_bound(first, centers_.end(), x + kCutoff * bandwidth_);
    double mass = static_cast<double>(first - centers_.begin());
    for (auto it = first; it != last; ++it) mass += normal_cdf((x - *it) / bandwidth_);
    return mass / static_cast<double>(support_.size());
  }

  std::vector<double> support_;
  std::vector<double> centers_;
  double bandwidth_;
  KdeBounds bounds_;
  double below_low_ = 0.0;
  double normalizer_ = 1.0;
};

inline double kde_cdf(const KdeModel& model, double x) { return model.cdf(x); }

}  // namespace iaa
