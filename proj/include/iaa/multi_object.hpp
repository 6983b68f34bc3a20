#pragma once

// Multi-object annotations: the min-match combinator, count difference, and the
// NER leniency variants.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "iaa/error.hpp"
#include "iaa/model.hpp"

namespace iaa {

/// Mean over a in A of min over b in B of inner(a, b). A must be nonempty.
template <class T, class Inner>
double directed_min_match(std::span<const T> a, std::span<const T> b, const Inner& inner) {
  double sum = 0.0;
  for (const auto& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : b) best = std::min(best, static_cast<double>(inner(x, y)));
    sum += best;
  }
  return sum / static_cast<double>(a.size());
}

/// Symmetrized greedy min-match distance between two object sets.
///
/// Both empty gives 0. Exactly one empty gives `empty_distance`, which must be set
/// when the inner distance is unbounded (1 for inner distances bounded by [0, 1]).
template <class T, class Inner>
double multi_object_distance(std::span<const T> a, std::span<const T> b, const Inner& inner,
                             std::optional<double> empty_distance = 1.0) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) {
    if (!empty_distance) {
      throw UsageError("unbounded inner distance with an empty object set and no cap configured");
    }
    return *empty_distance;
  }
  return (directed_min_match(a, b, inner) + directed_min_match(b, a, inner)) / 2.0;
}

/// ||A| - |B||, optionally divided by max(|A|, |B|, 1).
inline double count_diff(std::size_t a, std::size_t b, bool normalize = false) {
  const double diff = a > b ? static_cast<double>(a - b) : static_cast<double>(b - a);
  if (!normalize) return diff;
  return diff / static_cast<double>(std::max<std::size_t>({a, b, 1}));
}

enum class NerVariant { both_lenient, strict_tag, strict_range, both_strict };

inline constexpr bool range_strict(NerVariant v) {
  return v == NerVariant::strict_range || v == NerVariant::both_strict;
}
inline constexpr bool tag_strict(NerVariant v) {
  return v == NerVariant::strict_tag || v == NerVariant::both_strict;
}

namespace detail {

inline std::vector<Span> dedup_spans(std::span<const Span> spans) {
  std::vector<Span> out(spans.begin(), spans.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Directed NER similarity: mean per-span credit in [0, 1] of `a`'s spans against `b`.
inline double ner_directed(std::span<const Span> a, std::span<const Span> b, bool strict_range,
                           bool strict_tag) {
  double total = 0.0;
  for (const auto& x : a) {
    if (strict_range) {
      // Credit is capped at one match per span.
      const bool hit = std::any_of(b.begin(), b.end(), [&](const Span& y) {
        return y.start == x.start && y.end == x.end && (!strict_tag || y.tag == x.tag);
      });
      total += hit ? 1.0 : 0.0;
    } else {
      std::size_t covered = 0;
      for (std::size_t t = x.start; t < x.end; ++t) {
        const bool hit = std::any_of(b.begin(), b.end(), [&](const Span& y) {
          return y.start <= t && t < y.end && (!strict_tag || y.tag == x.tag);
        });
        covered += hit ? 1 : 0;
      }
      total += static_cast<double>(covered) / static_cast<double>(x.length());
    }
  }
  return total / static_cast<double>(a.size());
}

}  // namespace detail

/// 1 - harmonic mean of the two directed span-match similarities.
/// Spans are deduplicated first; both empty gives 0, exactly one empty gives 1.
inline double ner_distance(std::span<const Span> a_in, std::span<const Span> b_in,
                           bool strict_range, bool strict_tag) {
  for (const auto& s : a_in) {
    if (s.start >= s.end) throw ValidationError("span with start >= end");
  }
  for (const auto& s : b_in) {
    if (s.start >= s.end) throw ValidationError("span with start >= end");
  }
  const auto a = detail::dedup_spans(a_in);
  const auto b = detail::dedup_spans(b_in);
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return 1.0;
  const double ab = detail::ner_directed(a, b, strict_range, strict_tag);
  const double ba = detail::ner_directed(b, a, strict_range, strict_tag);
  if (ab + ba == 0.0) return 1.0;
  return 1.0 - 2.0 * ab * ba / (ab + ba);
}

inline double ner_distance(std::span<const Span> a, std::span<const Span> b, NerVariant variant) {
  return ner_distance(a, b, range_strict(variant), tag_strict(variant));
}

}  // namespace iaa
