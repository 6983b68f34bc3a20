#pragma once

// Synthetic annotation noise for validating agreement measures against a known error level.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "iaa/error.hpp"
#include "iaa/model.hpp"
#include "iaa/random.hpp"

namespace iaa {

enum class NoiseTask { ranking, vector, spans, boxes };

inline std::string_view to_string(NoiseTask task) {
  switch (task) {
    case NoiseTask::ranking: return "ranking";
    case NoiseTask::vector: return "vector";
    case NoiseTask::spans: return "spans";
    case NoiseTask::boxes: return "boxes";
  }
  return "?";
}

inline std::optional<NoiseTask> parse_noise_task(std::string_view name) {
  for (auto t : {NoiseTask::ranking, NoiseTask::vector, NoiseTask::spans, NoiseTask::boxes}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

inline PayloadKind payload_kind(NoiseTask task) {
  switch (task) {
    case NoiseTask::ranking: return PayloadKind::ranking;
    case NoiseTask::vector: return PayloadKind::vector;
    case NoiseTask::spans: return PayloadKind::spans;
    case NoiseTask::boxes: return PayloadKind::boxes;
  }
  return PayloadKind::vector;
}

struct NoiseSpec {
  NoiseTask task = NoiseTask::ranking;
  double level = 0.0;
  std::size_t n_annotators = 3;
  std::uint64_t seed = 0;
  VectorRanges ranges;          // vector task; empty means [0, 1] per dimension
  double image_extent = 100.0;  // boxes task, square image
  std::size_t doc_length = 50;  // spans task, tokens per document
  std::vector<std::string> tags = {"PER", "LOC", "ORG", "MISC"};
};

inline void check_noise_spec(const NoiseSpec& spec) {
  if (!(spec.level >= 0 && spec.level <= 1)) throw UsageError("noise level must lie in [0, 1]");
  if (spec.n_annotators < 2) throw UsageError("need at least 2 annotators");
  if (spec.task == NoiseTask::spans && (spec.tags.empty() || spec.doc_length == 0)) {
    throw UsageError("span noise needs tags and a positive document length");
  }
  if (spec.task == NoiseTask::boxes && !(spec.image_extent > 0)) {
    throw UsageError("image extent must be positive");
  }
}

namespace detail {

/// floor(level * C(n,2) / 2) adjacent transpositions, each chosen among adjacent pairs
/// that are still in their original relative order, so every swap adds one inversion.
inline Ranking perturb_ranking(const Ranking& gold, double level, Rng& rng) {
  const std::size_t n = gold.order.size();
  if (n < 2) return gold;
  const auto swaps = static_cast<std::size_t>(
      std::floor(level * static_cast<double>(n) * static_cast<double>(n - 1) / 2.0 * 0.5));
  std::vector<std::size_t> pos(n);  // original position of the element now at slot i
  for (std::size_t i = 0; i < n; ++i) pos[i] = i;
  std::vector<std::size_t> candidates;
  for (std::size_t s = 0; s < swaps; ++s) {
    candidates.clear();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (pos[i] < pos[i + 1]) candidates.push_back(i);
    }
    if (candidates.empty()) break;
    const std::size_t i = candidates[rng.index(candidates.size())];
    std::swap(pos[i], pos[i + 1]);
  }
  Ranking out;
  out.order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.order.push_back(gold.order[pos[i]]);
  return out;
}

inline NumericVector perturb_vector(const NumericVector& gold, const NoiseSpec& spec, Rng& rng) {
  NumericVector out = gold;
  for (std::size_t d = 0; d < out.values.size(); ++d) {
    const Range r = d < spec.ranges.size() ? spec.ranges[d] : Range{};
    const double noisy = out.values[d] + rng.normal(0.0, spec.level * r.width());
    out.values[d] = std::clamp(noisy, r.min, r.max);
  }
  return out;
}

inline Span random_span(const NoiseSpec& spec, Rng& rng) {
  const std::size_t len = 1 + rng.index(std::min<std::size_t>(3, spec.doc_length));
  const std::size_t start = rng.index(spec.doc_length - len + 1);
  return {start, start + len, spec.tags[rng.index(spec.tags.size())]};
}

inline SpanSet perturb_spans(const SpanSet& gold, const NoiseSpec& spec, Rng& rng) {
  const double level = spec.level;
  const auto shift = static_cast<std::ptrdiff_t>(std::ceil(level * 3.0));
  SpanSet out;
  for (const auto& s : gold.spans) {
    if (rng.bernoulli(level / 2.0)) continue;
    Span span = s;
    if (rng.bernoulli(level)) {
      const std::ptrdiff_t delta = rng.bernoulli(0.5) ? shift : -shift;
      const bool move_start = rng.bernoulli(0.5);
      auto start = static_cast<std::ptrdiff_t>(span.start);
      auto end = static_cast<std::ptrdiff_t>(span.end);
      (move_start ? start : end) += delta;
      start = std::max<std::ptrdiff_t>(0, start);
      end = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(spec.doc_length), end);
      if (start < end) {
        span.start = static_cast<std::size_t>(start);
        span.end = static_cast<std::size_t>(end);
      }
    }
    if (spec.tags.size() > 1 && rng.bernoulli(level / 2.0)) {
      // Replacement tag differs from the current one.
      std::size_t t = rng.index(spec.tags.size() - 1);
      const auto current = std::find(spec.tags.begin(), spec.tags.end(), span.tag) - spec.tags.begin();
      if (static_cast<std::ptrdiff_t>(t) >= current) ++t;
      span.tag = spec.tags[std::min(t, spec.tags.size() - 1)];
    }
    out.spans.push_back(span);
  }
  const unsigned spurious = rng.poisson(level);
  for (unsigned k = 0; k < spurious; ++k) out.spans.push_back(random_span(spec, rng));
  std::sort(out.spans.begin(), out.spans.end());
  return out;
}

inline Box jitter_box(const Box& b, const NoiseSpec& spec, Rng& rng) {
  const double sd = spec.level * 0.1 * spec.image_extent;
  auto coord = [&](double v) { return std::clamp(v + rng.normal(0.0, sd), 0.0, spec.image_extent); };
  double x0 = coord(b.x0), y0 = coord(b.y0), x1 = coord(b.x1), y1 = coord(b.y1);
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  return {x0, y0, x1, y1};
}

inline BoxSet perturb_boxes(const BoxSet& gold, const NoiseSpec& spec, Rng& rng) {
  BoxSet out;
  for (const auto& b : gold.boxes) {
    const double u = rng.uniform();
    if (u < spec.level / 4.0) continue;  // dropped
    out.boxes.push_back(jitter_box(b, spec, rng));
    if (u < spec.level / 2.0) out.boxes.push_back(jitter_box(b, spec, rng));  // duplicated
  }
  return out;
}

}  // namespace detail

/// One noisy copy of a gold label. Level 0 returns the label unchanged.
inline LabelPayload perturb(const LabelPayload& label, const NoiseSpec& spec, Rng& rng) {
  check_noise_spec(spec);
  if (kind_of(label) != payload_kind(spec.task)) {
    throw ValidationError("noise task '" + std::string(to_string(spec.task)) +
                          "' cannot perturb a '" + std::string(to_string(kind_of(label))) +
                          "' label");
  }
  if (spec.level == 0) return label;
  switch (spec.task) {
    case NoiseTask::ranking: return detail::perturb_ranking(std::get<Ranking>(label), spec.level, rng);
    case NoiseTask::vector: return detail::perturb_vector(std::get<NumericVector>(label), spec, rng);
    case NoiseTask::spans: return detail::perturb_spans(std::get<SpanSet>(label), spec, rng);
    case NoiseTask::boxes: return detail::perturb_boxes(std::get<BoxSet>(label), spec, rng);
  }
  return label;
}

using GoldItem = std::pair<std::string, LabelPayload>;

/// Zero-padded identifier so that lexicographic and numeric order agree.
inline std::string padded_id(const char* prefix, std::size_t i, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t c = count; c >= 10; c /= 10) ++width;
  char digits[32];
  std::snprintf(digits, sizeof digits, "%0*zu", static_cast<int>(width), i);
  return prefix + std::string(digits);
}

/// n_annotators independently perturbed copies of every gold label. Each (item, annotator)
/// draws from its own stream derived from the seed.
inline Dataset generate_cst_dataset(const std::vector<GoldItem>& gold, const NoiseSpec& spec) {
  check_noise_spec(spec);
  if (gold.empty()) throw UsageError("gold set is empty");
  Dataset ds;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t a = 0; a < spec.n_annotators; ++a) {
      Rng rng(derive_seed(spec.seed, {i, a}));
      ds.records.push_back({gold[i].first, padded_id("a", a, spec.n_annotators),
                            perturb(gold[i].second, spec, rng)});
    }
  }
  if (spec.task == NoiseTask::vector) {
    const std::size_t dim = std::get<NumericVector>(gold.front().second).values.size();
    VectorRanges ranges = spec.ranges;
    ranges.resize(dim, Range{});
    ds.meta.ranges = ranges;
  }
  if (spec.task == NoiseTask::ranking) ds.meta.universe = std::get<Ranking>(gold.front().second).order;
  return ds;
}

struct GoldShape {
  std::size_t ranking_size = 10;
  std::size_t vector_dim = 3;
  std::size_t spans_per_item = 4;
  std::size_t boxes_per_item = 3;
};

/// Random gold labels for `n_items` items.
inline std::vector<GoldItem> random_gold(const NoiseSpec& spec, std::size_t n_items,
                                         const GoldShape& shape = {}) {
  check_noise_spec(spec);
  std::vector<GoldItem> gold;
  for (std::size_t i = 0; i < n_items; ++i) {
    Rng rng(derive_seed(spec.seed, {0x676f6c64ULL, i}));
    LabelPayload label;
    switch (spec.task) {
      case NoiseTask::ranking: {
        Ranking r;
        for (std::size_t e = 0; e < shape.ranking_size; ++e) {
          r.order.push_back(padded_id("e", e, shape.ranking_size));
        }
        rng.shuffle(std::span<std::string>(r.order));
        label = std::move(r);
        break;
      }
      case NoiseTask::vector: {
        NumericVector v;
        for (std::size_t d = 0; d < shape.vector_dim; ++d) {
          const Range r = d < spec.ranges.size() ? spec.ranges[d] : Range{};
          v.values.push_back(rng.uniform(r.min, r.max));
        }
        label = std::move(v);
        break;
      }
      case NoiseTask::spans: {
        // Non-overlapping spans placed in disjoint slots of the document.
        SpanSet s;
        const std::size_t slots = std::max<std::size_t>(1, shape.spans_per_item);
        const std::size_t slot_len = spec.doc_length / slots;
        for (std::size_t k = 0; k < shape.spans_per_item && slot_len > 0; ++k) {
          const std::size_t len = 1 + rng.index(std::min<std::size_t>(3, slot_len));
          const std::size_t start = k * slot_len + rng.index(slot_len - len + 1);
          s.spans.push_back({start, start + len, spec.tags[rng.index(spec.tags.size())]});
        }
        label = std::move(s);
        break;
      }
      case NoiseTask::boxes: {
        BoxSet b;
        const double e = spec.image_extent;
        for (std::size_t k = 0; k < shape.boxes_per_item; ++k) {
          const double w = rng.uniform(0.1 * e, 0.4 * e), h = rng.uniform(0.1 * e, 0.4 * e);
          const double x = rng.uniform(0.0, e - w), y = rng.uniform(0.0, e - h);
          b.boxes.push_back({x, y, x + w, y + h});
        }
        label = std::move(b);
        break;
      }
    }
    gold.emplace_back(padded_id("item", i, n_items), std::move(label));
  }
  return gold;
}

/// Reassigns payloads to records uniformly at random, keeping item and annotator ids.
inline Dataset shuffle_labels_across_items(Dataset ds, std::uint64_t seed) {
  std::vector<LabelPayload> payloads;
  payloads.reserve(ds.records.size());
  for (auto& r : ds.records) payloads.push_back(std::move(r.payload));
  Rng rng(derive_seed(seed, {0x73687566ULL}));
  rng.shuffle(std::span<LabelPayload>(payloads));
  for (std::size_t i = 0; i < ds.records.size(); ++i) ds.records[i].payload = std::move(payloads[i]);
  return ds;
}

}  // namespace iaa
