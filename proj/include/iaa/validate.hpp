#pragma once

// Dataset validation: counts, payload kind, and every contract violation found.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "iaa/error.hpp"
#include "iaa/model.hpp"

namespace iaa {

enum class ViolationKind {
  duplicate_annotation,
  range_violation,
  invalid_payload,
  single_annotation_item,
};

inline std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::duplicate_annotation: return "duplicate annotation";
    case ViolationKind::range_violation: return "range violation";
    case ViolationKind::invalid_payload: return "invalid payload";
    case ViolationKind::single_annotation_item: return "single annotation item";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::string item_id;
  std::string annotator_id;
  std::string detail;
  /// 1-based source line, attached by the dataset loader.
  std::optional<std::size_t> line;

  /// Items with a single annotation are reported but do not fail validation.
  bool fatal() const { return kind != ViolationKind::single_annotation_item; }

  auto key() const { return std::tie(kind, item_id, annotator_id, detail); }
  bool operator<(const Violation& other) const { return key() < other.key(); }
  bool operator==(const Violation& other) const { return key() == other.key(); }
};

struct ValidationSummary {
  std::size_t items = 0;
  std::size_t annotators = 0;
  std::size_t annotations = 0;
  PayloadKind kind = PayloadKind::vector;
  std::vector<Violation> violations;

  bool ok() const {
    return std::none_of(violations.begin(), violations.end(),
                        [](const Violation& v) { return v.fatal(); });
  }
};

namespace detail {

inline std::string describe_payload_problem(const LabelPayload& payload, const DatasetMeta& meta,
                                            std::size_t expected_vector_length) {
  struct Visitor {
    const DatasetMeta& meta;
    std::size_t expected_length;

    std::string operator()(const NumericVector& v) const {
      if (v.values.size() != expected_length) {
        return "vector length " + std::to_string(v.values.size()) + " != " +
               std::to_string(expected_length);
      }
      for (double x : v.values) {
        if (!std::isfinite(x)) return "non-finite vector value";
      }
      return {};
    }
    std::string operator()(const TokenSequence&) const { return {}; }
    std::string operator()(const BoxSet& set) const {
      for (const auto& b : set.boxes) {
        if (!b.valid()) return "box with x0 > x1 or y0 > y1";
      }
      return {};
    }
    std::string operator()(const KeypointSet& set) const {
      for (const auto& obj : set.objects) {
        if (obj.points.empty()) return "keypoint object without points";
        if (!(obj.scale > 0)) return "keypoint scale must be positive";
        if (obj.per_point_constant.size() != obj.points.size()) {
          return "keypoint constants count != point count";
        }
        for (double k : obj.per_point_constant) {
          if (!(k > 0)) return "keypoint constants must be positive";
        }
      }
      return {};
    }
    std::string operator()(const SpanSet& set) const {
      for (const auto& s : set.spans) {
        if (s.start >= s.end) return "span with start >= end";
      }
      return {};
    }
    std::string operator()(const OrderedTree&) const { return {}; }
    std::string operator()(const Ranking& r) const {
      std::set<std::string> seen(r.order.begin(), r.order.end());
      if (seen.size() != r.order.size()) return "ranking repeats an element";
      if (meta.universe) {
        std::set<std::string> universe(meta.universe->begin(), meta.universe->end());
        if (seen != universe) return "ranking is not a permutation of the universe";
      }
      return {};
    }
  };
  return std::visit(Visitor{meta, expected_vector_length}, payload);
}

}  // namespace detail

/// Validates records against the dataset contract. Violations are returned sorted,
/// so the result does not depend on record order. Throws ValidationError on an empty
/// dataset or when payload kinds are mixed.
inline ValidationSummary validate_dataset(const Dataset& dataset) {
  const auto& records = dataset.records;
  if (records.empty()) throw ValidationError("empty dataset");

  ValidationSummary summary;
  summary.kind = kind_of(records.front().payload);
  summary.annotations = records.size();

  std::map<std::string, std::size_t> per_item;
  std::set<std::string> annotators;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;

  std::size_t vector_length = 0;
  if (summary.kind == PayloadKind::vector) {
    vector_length = dataset.meta.ranges
                        ? dataset.meta.ranges->size()
                        : std::get<NumericVector>(records.front().payload).values.size();
  }

  // When no universe is configured, rankings must all permute the first one's elements.
  std::optional<std::set<std::string>> ranking_universe;
  if (summary.kind == PayloadKind::ranking && !dataset.meta.universe) {
    const auto& first = std::get<Ranking>(records.front().payload).order;
    ranking_universe.emplace(first.begin(), first.end());
  }

  for (const auto& rec : records) {
    const PayloadKind kind = kind_of(rec.payload);
    if (kind != summary.kind) {
      throw ValidationError("mixed payload kinds: '" + std::string(to_string(summary.kind)) +
                            "' and '" + std::string(to_string(kind)) + "' (item " + rec.item_id +
                            ", annotator " + rec.annotator_id + ")");
    }
    ++per_item[rec.item_id];
    annotators.insert(rec.annotator_id);
    if (++seen[{rec.item_id, rec.annotator_id}] > 1) {
      summary.violations.push_back(
          {ViolationKind::duplicate_annotation, rec.item_id, rec.annotator_id,
           "annotator labeled this item more than once", std::nullopt});
    }

    if (auto problem = detail::describe_payload_problem(rec.payload, dataset.meta, vector_length);
        !problem.empty()) {
      summary.violations.push_back(
          {ViolationKind::invalid_payload, rec.item_id, rec.annotator_id, problem, std::nullopt});
      continue;
    }

    if (kind == PayloadKind::vector && dataset.meta.ranges) {
      const auto& values = std::get<NumericVector>(rec.payload).values;
      const auto& ranges = *dataset.meta.ranges;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < ranges[i].min || values[i] > ranges[i].max) {
          summary.violations.push_back({ViolationKind::range_violation, rec.item_id,
                                        rec.annotator_id,
                                        "dimension " + std::to_string(i) + " value " +
                                            std::to_string(values[i]) + " outside range",
                                        std::nullopt});
        }
      }
    }
    if (ranking_universe) {
      const auto& order = std::get<Ranking>(rec.payload).order;
      if (std::set<std::string>(order.begin(), order.end()) != *ranking_universe) {
        summary.violations.push_back({ViolationKind::invalid_payload, rec.item_id,
                                      rec.annotator_id,
                                      "ranking elements differ from the dataset's first ranking",
                                      std::nullopt});
      }
    }
  }

  for (const auto& [item, count] : per_item) {
    if (count < 2) {
      summary.violations.push_back({ViolationKind::single_annotation_item, item, {},
                                    "item has fewer than 2 annotations", std::nullopt});
    }
  }

  summary.items = per_item.size();
  summary.annotators = annotators.size();
  std::sort(summary.violations.begin(), summary.violations.end());
  return summary;
}

/// Throws ValidationError describing the first fatal violation, if any.
inline void require_valid(const ValidationSummary& summary) {
  for (const auto& v : summary.violations) {
    if (!v.fatal()) continue;
    std::string msg = std::string(to_string(v.kind)) + ": item '" + v.item_id + "'";
    if (!v.annotator_id.empty()) msg += ", annotator '" + v.annotator_id + "'";
    if (!v.detail.empty()) msg += " (" + v.detail + ")";
    if (v.line) msg += " at line " + std::to_string(*v.line);
    throw ValidationError(msg);
  }
}

}  // namespace iaa
