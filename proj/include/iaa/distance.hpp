#pragma once

// Configured distance functions over label payloads and the name registry.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iaa/error.hpp"
#include "iaa/geometry.hpp"
#include "iaa/model.hpp"
#include "iaa/multi_object.hpp"
#include "iaa/ranking.hpp"
#include "iaa/tree.hpp"
#include "iaa/vector_text.hpp"

namespace iaa {

using DistanceParams = std::map<std::string, std::string>;

/// A named distance bound to a payload kind, with string-valued configuration.
struct DistanceSpec {
  std::string name;
  PayloadKind kind = PayloadKind::vector;
  DistanceParams params;
  bool operator==(const DistanceSpec&) const = default;
};

/// Resources a distance may need beyond its parameters.
struct DistanceContext {
  std::optional<VectorRanges> ranges;
  std::shared_ptr<const TokenEmbeddingTable> embeddings;
};

/// A resolved, validated distance function. Immutable and safe to share across threads.
class Distance {
 public:
  using Fn = std::function<double(const LabelPayload&, const LabelPayload&)>;

  Distance(DistanceSpec spec, bool dissimilarity, double upper_bound, Fn fn, Fn unclamped = {})
      : spec_(std::move(spec)),
        dissimilarity_(dissimilarity),
        upper_bound_(upper_bound),
        fn_(std::move(fn)),
        unclamped_(std::move(unclamped)) {}

  const DistanceSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  PayloadKind kind() const { return spec_.kind; }

  /// True when the triangle inequality is not guaranteed.
  bool dissimilarity() const { return dissimilarity_; }

  /// Largest value the distance can take; +inf when unbounded.
  double upper_bound() const { return upper_bound_; }
  bool bounded() const { return upper_bound_ < std::numeric_limits<double>::infinity(); }

  double operator()(const LabelPayload& a, const LabelPayload& b) const {
    if (kind_of(a) != spec_.kind || kind_of(b) != spec_.kind) {
      throw ValidationError("distance '" + spec_.name + "' expects '" +
                            std::string(to_string(spec_.kind)) + "' payloads, got '" +
                            std::string(to_string(kind_of(a))) + "' and '" +
                            std::string(to_string(kind_of(b))) + "'");
    }
    return fn_(a, b);
  }

  /// Value before any clamping at zero (only tree diff differs from operator()).
  bool has_unclamped() const { return static_cast<bool>(unclamped_); }
  double unclamped(const LabelPayload& a, const LabelPayload& b) const {
    return unclamped_ ? unclamped_(a, b) : (*this)(a, b);
  }

 private:
  DistanceSpec spec_;
  bool dissimilarity_;
  double upper_bound_;
  Fn fn_;
  Fn unclamped_;
};

struct RegistryEntry {
  std::string name;
  PayloadKind kind;
  std::vector<std::string> params;  // accepted parameter names
  std::string description;
};

/// Every documented (name, kind) pair with its accepted parameters.
inline const std::vector<RegistryEntry>& registry_entries() {
  static const std::vector<RegistryEntry> entries = {
      {"binary", PayloadKind::vector, {}, "fraction of unequal elements"},
      {"euclidean", PayloadKind::vector, {}, "RMSE of range-normalized differences"},
      {"levenshtein", PayloadKind::tokens, {"raw"}, "token edit distance / max length"},
      {"bleu", PayloadKind::tokens, {"k"}, "1 - symmetrized sentence BLEU (smoothing 4)"},
      {"gleu", PayloadKind::tokens, {}, "1 - symmetrized sentence GLEU"},
      {"embedding_f1", PayloadKind::tokens, {}, "1 - greedy cosine-matching F1"},
      {"count_diff", PayloadKind::boxes, {"normalize"}, "difference in box count"},
      {"l2", PayloadKind::boxes, {"l2_scale"}, "min-match vertex RMSE / l2_scale"},
      {"iou", PayloadKind::boxes, {}, "min-match 1 - IoU"},
      {"giou", PayloadKind::boxes, {}, "min-match (1 - GIoU) / 2"},
      {"count_diff", PayloadKind::keypoints, {"normalize"}, "difference in object count"},
      {"iou", PayloadKind::keypoints, {}, "min-match 1 - IoU of keypoint bounding boxes"},
      {"oks", PayloadKind::keypoints, {}, "min-match 1 - OKS (scales averaged)"},
      {"count_diff", PayloadKind::spans, {"normalize"}, "difference in span count"},
      {"both_lenient", PayloadKind::spans, {}, "token overlap, tags ignored"},
      {"strict_tag", PayloadKind::spans, {}, "token overlap with matching tag"},
      {"strict_range", PayloadKind::spans, {}, "exact range, tags ignored"},
      {"both_strict", PayloadKind::spans, {}, "exact range and tag"},
      {"ted_plain", PayloadKind::tree, {}, "tree edit distance"},
      {"ted_norm", PayloadKind::tree, {}, "TED / (leaves(a) + leaves(b))"},
      {"ted_diff", PayloadKind::tree, {}, "TED - |leaves(a) - leaves(b)|, clamped at 0"},
      {"tau", PayloadKind::ranking, {}, "(1 - Kendall tau) / 2"},
      {"rho", PayloadKind::ranking, {}, "(1 - Spearman rho) / 2"},
      {"tau_at_k", PayloadKind::ranking, {"k"}, "(1 - tau_b) / 2 over the top-k union"},
  };
  return entries;
}

inline std::vector<std::string> registry_names(PayloadKind kind) {
  std::vector<std::string> names;
  for (const auto& e : registry_entries()) {
    if (e.kind == kind) names.push_back(e.name);
  }
  return names;
}

namespace detail {

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

class ParamReader {
 public:
  ParamReader(const DistanceSpec& spec, const RegistryEntry& entry) : spec_(spec) {
    for (const auto& [key, value] : spec.params) {
      if (std::find(entry.params.begin(), entry.params.end(), key) == entry.params.end()) {
        throw UsageError("distance '" + spec.name + "' does not accept parameter '" + key +
                         "' (accepted: " +
                         (entry.params.empty() ? std::string("none") : join(entry.params, ", ")) +
                         ")");
      }
    }
  }

  bool flag(const std::string& key, bool fallback) const {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second.empty()) return true;
    if (it->second == "false" || it->second == "0") return false;
    throw UsageError("parameter '" + key + "' expects true/false, got '" + it->second + "'");
  }

  double positive(const std::string& key, double fallback) const {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used == it->second.size() && v > 0 && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("parameter '" + key + "' expects a positive number, got '" + it->second +
                     "'");
  }

 private:
  const DistanceSpec& spec_;
};

template <class T, class F>
Distance::Fn typed(F f) {
  return [f = std::move(f)](const LabelPayload& a, const LabelPayload& b) {
    return f(std::get<T>(a), std::get<T>(b));
  };
}

inline const RegistryEntry& find_entry(const DistanceSpec& spec) {
  for (const auto& e : registry_entries()) {
    if (e.name == spec.name && e.kind == spec.kind) return e;
  }
  throw UsageError("unknown distance '" + spec.name + "' for payload kind '" +
                   std::string(to_string(spec.kind)) + "'; available: " +
                   join(registry_names(spec.kind), ", "));
}

}  // namespace detail

/// Resolves a spec against the registry. Throws UsageError for unknown names or bad params.
inline Distance make_distance(const DistanceSpec& spec, const DistanceContext& ctx = {}) {
  const auto& entry = detail::find_entry(spec);
  const detail::ParamReader params(spec, entry);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::string& name = spec.name;
  using detail::typed;

  auto count_diff_distance = [&](auto get_size) {
    const bool normalize = params.flag("normalize", false);
    return Distance(spec, false, normalize ? 1.0 : kInf,
                    [normalize, get_size](const LabelPayload& a, const LabelPayload& b) {
                      return count_diff(get_size(a), get_size(b), normalize);
                    });
  };

  switch (spec.kind) {
    case PayloadKind::vector: {
      const VectorMode mode = name == "binary" ? VectorMode::binary : VectorMode::euclidean;
      VectorRanges ranges;
      if (mode == VectorMode::euclidean) {
        if (!ctx.ranges) throw UsageError("euclidean distance requires per-dimension ranges");
        ranges = *ctx.ranges;
        for (const auto& r : ranges) {
          if (!(r.max > r.min)) throw UsageError("vector range with max <= min");
        }
      }
      return Distance(spec, false, 1.0,
                      typed<NumericVector>([mode, ranges](const auto& a, const auto& b) {
                        return vector_distance(a.values, b.values, mode, ranges);
                      }));
    }
    case PayloadKind::tokens: {
      if (name == "levenshtein") {
        const bool raw = params.flag("raw", false);
        return Distance(spec, !raw, raw ? kInf : 1.0,
                        typed<TokenSequence>([raw](const auto& a, const auto& b) {
                          return levenshtein_distance(a.tokens, b.tokens, !raw);
                        }));
      }
      if (name == "bleu") {
        const double k = params.positive("k", 5.0);
        return Distance(spec, true, 1.0, typed<TokenSequence>([k](const auto& a, const auto& b) {
                          if (a.tokens.empty() || b.tokens.empty()) {
                            throw ValidationError("bleu requires nonempty token sequences");
                          }
                          if (a.tokens == b.tokens) return 0.0;
                          return 1.0 - (sentence_bleu(b.tokens, a.tokens, k) +
                                        sentence_bleu(a.tokens, b.tokens, k)) /
                                           2.0;
                        }));
      }
      if (name == "gleu") {
        return Distance(spec, true, 1.0, typed<TokenSequence>([](const auto& a, const auto& b) {
                          return gleu_distance(a.tokens, b.tokens);
                        }));
      }
      // embedding_f1
      if (!ctx.embeddings) throw UsageError("embedding_f1 requires a token embedding table");
      return Distance(spec, true, 1.0,
                      typed<TokenSequence>([table = ctx.embeddings](const auto& a, const auto& b) {
                        return embedding_f1_distance(a, b, *table);
                      }));
    }
    case PayloadKind::boxes: {
      if (name == "count_diff") {
        return count_diff_distance(
            [](const LabelPayload& p) { return std::get<BoxSet>(p).boxes.size(); });
      }
      const BoxMode mode = name == "l2" ? BoxMode::l2 : name == "iou" ? BoxMode::iou : BoxMode::giou;
      GeometryConfig cfg;
      cfg.l2_scale = params.positive("l2_scale", cfg.l2_scale);
      return Distance(spec, true, 1.0, typed<BoxSet>([mode, cfg](const auto& a, const auto& b) {
                        return multi_object_distance<Box>(
                            a.boxes, b.boxes,
                            [&](const Box& x, const Box& y) { return box_distance(x, y, mode, cfg); });
                      }));
    }
    case PayloadKind::keypoints: {
      if (name == "count_diff") {
        return count_diff_distance(
            [](const LabelPayload& p) { return std::get<KeypointSet>(p).objects.size(); });
      }
      const KeypointMode mode = name == "oks" ? KeypointMode::oks : KeypointMode::bbox_iou;
      return Distance(spec, true, 1.0, typed<KeypointSet>([mode](const auto& a, const auto& b) {
                        return multi_object_distance<KeypointObject>(
                            a.objects, b.objects,
                            [&](const KeypointObject& x, const KeypointObject& y) {
                              return keypoint_distance(x, y, mode);
                            });
                      }));
    }
    case PayloadKind::spans: {
      if (name == "count_diff") {
        return count_diff_distance(
            [](const LabelPayload& p) { return std::get<SpanSet>(p).spans.size(); });
      }
      const NerVariant variant = name == "both_lenient"   ? NerVariant::both_lenient
                                 : name == "strict_tag"   ? NerVariant::strict_tag
                                 : name == "strict_range" ? NerVariant::strict_range
                                                          : NerVariant::both_strict;
      return Distance(spec, true, 1.0, typed<SpanSet>([variant](const auto& a, const auto& b) {
                        return ner_distance(a.spans, b.spans, variant);
                      }));
    }
    case PayloadKind::tree: {
      const TedVariant variant = name == "ted_plain"  ? TedVariant::plain
                                 : name == "ted_norm" ? TedVariant::norm
                                                      : TedVariant::diff;
      auto fn = typed<OrderedTree>(
          [variant](const auto& a, const auto& b) { return tree_distance(a, b, variant); });
      Distance::Fn raw;
      if (variant == TedVariant::diff) {
        raw = typed<OrderedTree>([](const auto& a, const auto& b) {
          return tree_distance_unclamped(a, b, TedVariant::diff);
        });
      }
      return Distance(spec, variant != TedVariant::plain, kInf, std::move(fn), std::move(raw));
    }
    case PayloadKind::ranking: {
      RankingConfig cfg;
      cfg.mode = name == "tau" ? RankingMode::tau
                 : name == "rho" ? RankingMode::rho
                                 : RankingMode::tau_at_k;
      if (cfg.mode == RankingMode::tau_at_k) {
        const double k = params.positive("k", 5.0);
        if (k != std::floor(k)) throw UsageError("tau_at_k parameter k must be an integer");
        cfg.k = static_cast<std::size_t>(k);
      }
      return Distance(spec, cfg.mode != RankingMode::tau, 1.0,
                      typed<Ranking>([cfg](const auto& a, const auto& b) {
                        return ranking_distance(a, b, cfg);
                      }));
    }
  }
  throw UsageError("unknown payload kind");
}

inline Distance make_distance(const std::string& name, PayloadKind kind, DistanceParams params = {},
                              const DistanceContext& ctx = {}) {
  return make_distance(DistanceSpec{name, kind, std::move(params)}, ctx);
}

}  // namespace iaa
