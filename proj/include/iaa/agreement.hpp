#pragma once

// Observed/expected distance samples and the agreement measures computed from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "iaa/distance.hpp"
#include "iaa/error.hpp"
#include "iaa/kde.hpp"
#include "iaa/model.hpp"
#include "iaa/random.hpp"

namespace iaa {

/// Two record indices into Dataset::records.
struct AnnotationPair {
  std::size_t first;
  std::size_t second;
  bool operator==(const AnnotationPair&) const = default;
};

inline constexpr std::size_t kAllPairs = std::numeric_limits<std::size_t>::max();

namespace detail {

/// Record indices sorted by (item, annotator), with contiguous item groups.
struct CanonicalOrder {
  std::vector<std::size_t> order;
  std::vector<std::size_t> group;  // item group of order[i]
  std::vector<std::size_t> group_start;

  explicit CanonicalOrder(const Dataset& ds) {
    order.resize(ds.records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = ds.records[a];
      const auto& rb = ds.records[b];
      if (ra.item_id != rb.item_id) return ra.item_id < rb.item_id;
      return ra.annotator_id < rb.annotator_id;
    });
    group.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i == 0 || ds.records[order[i]].item_id != ds.records[order[i - 1]].item_id) {
        group_start.push_back(i);
      }
      group[i] = group_start.size() - 1;
    }
    group_start.push_back(order.size());
  }

  std::size_t groups() const { return group_start.size() - 1; }
  std::size_t group_size(std::size_t g) const { return group_start[g + 1] - group_start[g]; }
};

}  // namespace detail

/// All within-item pairs of annotations from distinct annotators, ordered by
/// (item, annotator) of the first record, then of the second.
inline std::vector<AnnotationPair> observed_pairs(const Dataset& ds) {
  const detail::CanonicalOrder canon(ds);
  std::vector<AnnotationPair> pairs;
  for (std::size_t g = 0; g < canon.groups(); ++g) {
    for (std::size_t i = canon.group_start[g]; i < canon.group_start[g + 1]; ++i) {
      for (std::size_t j = i + 1; j < canon.group_start[g + 1]; ++j) {
        const std::size_t a = canon.order[i], b = canon.order[j];
        if (ds.records[a].annotator_id == ds.records[b].annotator_id) continue;
        pairs.push_back({a, b});
      }
    }
  }
  if (pairs.empty()) throw ValidationError("no observed pairs");
  return pairs;
}

/// Number of cross-item annotation pairs available to expected_pairs.
inline std::size_t count_expected_pairs(const Dataset& ds, bool exclude_same_annotator = false) {
  const detail::CanonicalOrder canon(ds);
  const std::size_t n = canon.order.size();
  std::size_t total = n * (n - 1) / 2;
  for (std::size_t g = 0; g < canon.groups(); ++g) {
    const std::size_t s = canon.group_size(g);
    total -= s * (s - 1) / 2;
  }
  if (exclude_same_annotator) {
    // Subtract cross-item pairs that share an annotator.
    std::vector<std::string> annotators;
    for (const auto& r : ds.records) annotators.push_back(r.annotator_id);
    std::sort(annotators.begin(), annotators.end());
    for (std::size_t i = 0; i < annotators.size();) {
      std::size_t j = i;
      while (j < annotators.size() && annotators[j] == annotators[i]) ++j;
      const std::size_t s = j - i;
      total -= s * (s - 1) / 2;
      i = j;
    }
    // Same-annotator pairs inside one item were never cross-item pairs; add them back.
    for (std::size_t g = 0; g < canon.groups(); ++g) {
      for (std::size_t i = canon.group_start[g]; i < canon.group_start[g + 1]; ++i) {
        for (std::size_t j = i + 1; j < canon.group_start[g + 1]; ++j) {
          if (ds.records[canon.order[i]].annotator_id == ds.records[canon.order[j]].annotator_id) {
            ++total;
          }
        }
      }
    }
  }
  return total;
}

/// Uniform sample without replacement of annotation pairs from different items. Returns
/// every such pair when sample_size covers them all. Output is in canonical order.
inline std::vector<AnnotationPair> expected_pairs(const Dataset& ds, std::size_t sample_size,
                                                  std::uint64_t seed,
                                                  bool exclude_same_annotator = false) {
  const detail::CanonicalOrder canon(ds);
  if (canon.groups() < 2) throw ValidationError("expected pairs need at least two items");
  const std::size_t n = canon.order.size();
  const std::size_t available = count_expected_pairs(ds, exclude_same_annotator);
  if (available == 0) throw ValidationError("no expected pairs available");

  auto eligible = [&](std::size_t i, std::size_t j) {
    if (canon.group[i] == canon.group[j]) return false;
    return !exclude_same_annotator ||
           ds.records[canon.order[i]].annotator_id != ds.records[canon.order[j]].annotator_id;
  };
  auto emit = [&](std::vector<std::pair<std::size_t, std::size_t>>& positions) {
    std::sort(positions.begin(), positions.end());
    std::vector<AnnotationPair> out;
    out.reserve(positions.size());
    for (auto [i, j] : positions) out.push_back({canon.order[i], canon.order[j]});
    return out;
  };

  constexpr std::size_t kEnumerateLimit = std::size_t{1} << 22;
  std::vector<std::pair<std::size_t, std::size_t>> positions;
  Rng rng(derive_seed(seed, {0x65787065ULL}));
  if (sample_size >= available || available <= kEnumerateLimit || 2 * sample_size >= available) {
    positions.reserve(available);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = canon.group_start[canon.group[i] + 1]; j < n; ++j) {
        if (eligible(i, j)) positions.emplace_back(i, j);
      }
    }
    if (sample_size < positions.size()) {
      for (std::size_t k = 0; k < sample_size; ++k) {
        const std::size_t pick = k + rng.index(positions.size() - k);
        std::swap(positions[k], positions[pick]);
      }
      positions.resize(sample_size);
    }
    return emit(positions);
  }

  // Sparse sample from a large pool: rejection sampling over ordered index pairs.
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(sample_size * 2);
  while (positions.size() < sample_size) {
    std::size_t i = rng.index(n), j = rng.index(n);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (!eligible(i, j)) continue;
    if (!chosen.insert(static_cast<std::uint64_t>(i) * n + j).second) continue;
    positions.emplace_back(i, j);
  }
  return emit(positions);
}

/// Evaluates `distance` on every pair, in pair order, using up to `threads` workers.
inline std::vector<double> evaluate_pairs(const Dataset& ds, std::span<const AnnotationPair> pairs,
                                          const Distance& distance, unsigned threads = 1,
                                          bool unclamped = false) {
  std::vector<double> out(pairs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto& a = ds.records[pairs[k].first].payload;
      const auto& b = ds.records[pairs[k].second].payload;
      out[k] = unclamped ? distance.unclamped(a, b) : distance(a, b);
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, std::max<std::size_t>(1, pairs.size()));
  if (workers == 1) {
    work(0, pairs.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (pairs.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(pairs.size(), w * chunk);
      const std::size_t end = std::min(pairs.size(), begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  if (!unclamped) {
    for (double v : out) {
      if (!std::isfinite(v) || v < 0) {
        throw NumericError("distance '" + distance.name() + "' produced invalid value " +
                           std::to_string(v));
      }
    }
  }
  return out;
}

struct DistanceSamples {
  std::vector<double> observed;
  std::vector<double> expected;
  std::string distance_name;
  std::size_t de_sample_size = 0;
  std::uint64_t seed = 0;
  std::size_t n_observed_pairs = 0;
  std::size_t n_expected_available = 0;
  KdeBounds bounds;  // reflection bounds for the expected-distance density
};

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw NumericError("mean of an empty sample");
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double krippendorff_alpha(std::span<const double> observed, std::span<const double> expected) {
  if (observed.empty()) throw NumericError("empty observed distances");
  const double de = mean(expected);
  if (!(de > 0)) throw NumericError("degenerate expected distances");
  return 1.0 - mean(observed) / de;
}

inline double krippendorff_alpha(const DistanceSamples& s) {
  return krippendorff_alpha(s.observed, s.expected);
}

/// Fraction of observed distances whose expected-distribution CDF is below p.
inline double sigma_measure(std::span<const double> observed, const KdeModel& expected_model,
                            double p = 0.05) {
  if (observed.empty()) throw NumericError("empty observed distances");
  std::size_t hits = 0;
  for (double d : observed) {
    if (expected_model.cdf(d) < p) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(observed.size());
}

inline double sigma_measure(const DistanceSamples& s, double p = 0.05,
                            std::optional<double> bandwidth = std::nullopt) {
  return sigma_measure(s.observed, KdeModel::fit(s.expected, s.bounds, bandwidth), p);
}

/// Same as sigma_measure with the empirical CDF of the expected sample in place of the KDE.
inline double sigma_empirical(std::span<const double> observed, std::span<const double> expected,
                              double p = 0.05) {
  if (observed.empty() || expected.empty()) throw NumericError("empty distance sample");
  std::vector<double> sorted(expected.begin(), expected.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t hits = 0;
  for (double d : observed) {
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), d) - sorted.begin();
    if (static_cast<double>(below) / static_cast<double>(sorted.size()) < p) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(observed.size());
}

/// One-sided statistic max_x (F_observed(x) - F_expected(x)), at least 0.
inline double ks_statistic(std::span<const double> observed, std::span<const double> expected) {
  if (observed.empty() || expected.empty()) throw NumericError("empty distance sample");
  std::vector<double> o(observed.begin(), observed.end());
  std::vector<double> e(expected.begin(), expected.end());
  std::sort(o.begin(), o.end());
  std::sort(e.begin(), e.end());
  const auto m = static_cast<double>(o.size());
  const auto n = static_cast<double>(e.size());
  std::size_t i = 0, j = 0;
  double best = 0;
  while (i < o.size()) {
    const double x = o[i];
    while (i < o.size() && o[i] == x) ++i;
    while (j < e.size() && e[j] <= x) ++j;
    best = std::max(best, static_cast<double>(i) / m - static_cast<double>(j) / n);
  }
  return best;
}

inline double ks_asymptotic_pvalue(double statistic, std::size_t m, std::size_t n) {
  const double mm = static_cast<double>(m), nn = static_cast<double>(n);
  return std::clamp(std::exp(-2.0 * mm * nn * statistic * statistic / (mm + nn)), 0.0, 1.0);
}

/// Permutation p-value: share of label permutations of the pooled sample whose statistic
/// reaches the observed one, with the usual +1 correction.
inline double ks_permutation_pvalue(std::span<const double> observed, std::span<const double> expected,
                                    std::size_t permutations, std::uint64_t seed) {
  if (permutations == 0) throw UsageError("permutation count must be positive");
  const double stat = ks_statistic(observed, expected);
  std::vector<double> pooled(observed.begin(), observed.end());
  pooled.insert(pooled.end(), expected.begin(), expected.end());
  const std::size_t m = observed.size();
  Rng rng(derive_seed(seed, {0x6b73ULL}));
  std::size_t extreme = 0;
  for (std::size_t k = 0; k < permutations; ++k) {
    rng.shuffle(std::span<double>(pooled));
    const std::span<const double> all(pooled);
    if (ks_statistic(all.first(m), all.subspan(m)) >= stat - 1e-12) ++extreme;
  }
  return static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
}

struct KsResult {
  double statistic = 0;
  double pvalue = 1;
  double measure = 0;
  std::size_t permutations = 0;  // 0 for the asymptotic p-value
};

inline KsResult ks_measure(std::span<const double> observed, std::span<const double> expected,
                           std::size_t permutations = 0, std::uint64_t seed = 0) {
  KsResult r;
  r.statistic = ks_statistic(observed, expected);
  r.permutations = permutations;
  r.pvalue = permutations == 0 ? ks_asymptotic_pvalue(r.statistic, observed.size(), expected.size())
                               : ks_permutation_pvalue(observed, expected, permutations, seed);
  r.measure = 1.0 - r.pvalue;
  return r;
}

inline KsResult ks_measure(const DistanceSamples& s, std::size_t permutations = 0) {
  return ks_measure(s.observed, s.expected, permutations, s.seed);
}

struct Histogram {
  double lo = 0;
  double hi = 1;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double bin_lo(std::size_t i) const { return lo + bin_width() * static_cast<double>(i); }
  double bin_hi(std::size_t i) const {
    return i + 1 == counts.size() ? hi : lo + bin_width() * static_cast<double>(i + 1);
  }
  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

  /// First bin holding the largest count.
  std::size_t mode_bin() const {
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }

  /// Local maxima (plateaus count once) holding more than `min_share` of the total mass.
  std::size_t significant_peaks(double min_share = 0.1) const {
    const double threshold = min_share * static_cast<double>(total());
    std::size_t peaks = 0;
    for (std::size_t i = 0; i < counts.size();) {
      std::size_t j = i;
      while (j < counts.size() && counts[j] == counts[i]) ++j;
      const bool left_lower = i == 0 || counts[i - 1] < counts[i];
      const bool right_lower = j == counts.size() || counts[j] < counts[i];
      if (left_lower && right_lower && static_cast<double>(counts[i]) > threshold) ++peaks;
      i = j;
    }
    return peaks;
  }
};

/// Histogram over [lo, hi] with the last bin closed. A zero-width range is widened to
/// [lo, lo + 1].
inline Histogram make_histogram(std::span<const double> xs, double lo, double hi,
                                std::size_t bins = 50) {
  if (bins == 0) throw UsageError("histogram needs at least one bin");
  Histogram h;
  h.lo = lo;
  h.hi = hi > lo ? hi : lo + 1.0;
  h.counts.assign(bins, 0);
  for (double x : xs) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((x - h.lo) / (h.hi - h.lo) * static_cast<double>(bins)));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

struct Diagnostics {
  bool expected_low_mode = false;    // mode of D_e in the lowest decile of bins
  bool observed_high_mode = false;   // mode of D_o in the highest decile of bins
  bool observed_multimodal = false;  // >= 2 peaks over 10% of mass
  bool expected_multimodal = false;

  std::vector<std::string> flags() const {
    std::vector<std::string> out;
    if (expected_low_mode) out.emplace_back("expected_low_boundary_mode");
    if (observed_high_mode) out.emplace_back("observed_high_boundary_mode");
    if (observed_multimodal) out.emplace_back("observed_multimodal");
    if (expected_multimodal) out.emplace_back("expected_multimodal");
    return out;
  }
  bool operator==(const Diagnostics&) const = default;
};

inline Diagnostics diagnose(const Histogram& observed, const Histogram& expected) {
  const std::size_t bins = observed.counts.size();
  const std::size_t decile = std::max<std::size_t>(1, bins / 10);
  Diagnostics d;
  d.expected_low_mode = expected.mode_bin() < decile;
  d.observed_high_mode = observed.mode_bin() >= bins - decile;
  d.observed_multimodal = observed.significant_peaks() >= 2;
  d.expected_multimodal = expected.significant_peaks() >= 2;
  return d;
}

struct AgreementOptions {
  double p = 0.05;
  std::optional<std::size_t> de_sample_size;  // default min(10 |D_o|, all); kAllPairs for all
  std::uint64_t seed = 0;
  bool exclude_same_annotator = false;
  std::optional<double> bandwidth;
  std::size_t ks_permutations = 0;
  unsigned threads = 1;
  std::size_t histogram_bins = 50;
};

struct AgreementReport {
  DistanceSpec distance;
  double alpha = 0;
  std::optional<double> alpha_unclamped;  // only for distances clamped at zero
  double sigma = 0;
  KsResult ks;
  double p_threshold = 0.05;
  std::size_t n_items = 0;
  std::size_t n_annotations = 0;
  std::size_t n_observed_pairs = 0;
  std::size_t n_expected_pairs = 0;
  std::size_t n_expected_available = 0;
  double mean_observed = 0;
  double mean_expected = 0;
  double bandwidth = 0;
  KdeBounds kde_bounds;
  Diagnostics diagnostics;
  Histogram observed_histogram;
  Histogram expected_histogram;
  std::uint64_t seed = 0;
};

/// Builds D_o and D_e for the dataset under the given distance.
inline DistanceSamples collect_samples(const Dataset& ds, const Distance& distance,
                                       const AgreementOptions& opt = {}) {
  const auto obs_pairs = observed_pairs(ds);
  const std::size_t available = count_expected_pairs(ds, opt.exclude_same_annotator);
  const std::size_t size =
      opt.de_sample_size.value_or(std::min(available, 10 * obs_pairs.size()));
  if (size == 0) throw UsageError("expected-pair sample size must be positive");
  const auto exp_pairs = expected_pairs(ds, size, opt.seed, opt.exclude_same_annotator);

  DistanceSamples s;
  s.distance_name = distance.name();
  s.observed = evaluate_pairs(ds, obs_pairs, distance, opt.threads);
  s.expected = evaluate_pairs(ds, exp_pairs, distance, opt.threads);
  s.de_sample_size = exp_pairs.size();
  s.seed = opt.seed;
  s.n_observed_pairs = obs_pairs.size();
  s.n_expected_available = available;
  if (distance.bounded()) s.bounds = KdeBounds{0.0, distance.upper_bound()};
  return s;
}

/// Measures, diagnostics and histograms from precomputed samples.
inline AgreementReport report_from_samples(const DistanceSamples& s, const AgreementOptions& opt = {}) {
  if (!(opt.p > 0 && opt.p < 1)) throw UsageError("p threshold must lie in (0, 1)");
  AgreementReport r;
  r.alpha = krippendorff_alpha(s);
  const auto model = KdeModel::fit(s.expected, s.bounds, opt.bandwidth);
  r.sigma = sigma_measure(s.observed, model, opt.p);
  r.ks = ks_measure(s.observed, s.expected, opt.ks_permutations, s.seed);
  r.p_threshold = opt.p;
  r.n_observed_pairs = s.n_observed_pairs;
  r.n_expected_pairs = s.expected.size();
  r.n_expected_available = s.n_expected_available;
  r.mean_observed = mean(s.observed);
  r.mean_expected = mean(s.expected);
  r.bandwidth = model.bandwidth();
  r.kde_bounds = s.bounds;
  r.seed = s.seed;

  const auto [omin, omax] = std::minmax_element(s.observed.begin(), s.observed.end());
  const auto [emin, emax] = std::minmax_element(s.expected.begin(), s.expected.end());
  const double lo = std::min(*omin, *emin), hi = std::max(*omax, *emax);
  r.observed_histogram = make_histogram(s.observed, lo, hi, opt.histogram_bins);
  r.expected_histogram = make_histogram(s.expected, lo, hi, opt.histogram_bins);
  r.diagnostics = diagnose(r.observed_histogram, r.expected_histogram);
  return r;
}

/// Full pipeline: pairs, distances, alpha, sigma, KS, diagnostics.
inline AgreementReport agreement_report(const Dataset& ds, const Distance& distance,
                                        const AgreementOptions& opt = {}) {
  const auto samples = collect_samples(ds, distance, opt);
  auto r = report_from_samples(samples, opt);
  r.distance = distance.spec();
  std::unordered_set<std::string> items;
  for (const auto& rec : ds.records) items.insert(rec.item_id);
  r.n_items = items.size();
  r.n_annotations = ds.records.size();
  if (distance.has_unclamped()) {
    const auto obs = evaluate_pairs(ds, observed_pairs(ds), distance, opt.threads, true);
    const std::size_t size = samples.de_sample_size;
    const auto exp = evaluate_pairs(ds, expected_pairs(ds, size, opt.seed, opt.exclude_same_annotator),
                                    distance, opt.threads, true);
    const double de = mean(exp);
    if (de != 0) r.alpha_unclamped = 1.0 - mean(obs) / de;
  }
  return r;
}

}  // namespace iaa
