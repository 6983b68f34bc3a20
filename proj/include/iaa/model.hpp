#pragma once

// Domain types for annotation datasets.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iaa/error.hpp"

namespace iaa {

struct NumericVector {
  std::vector<double> values;
  bool operator==(const NumericVector&) const = default;
};

/// Pre-tokenized text. `sentence_id` keys the token embedding table.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::string sentence_id;
  bool operator==(const TokenSequence&) const = default;
};

/// Axis-aligned box given by its upper-left (x0, y0) and lower-right (x1, y1) vertices.
struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool valid() const { return x0 <= x1 && y0 <= y1; }
  bool operator==(const Box&) const = default;
};

struct BoxSet {
  std::vector<Box> boxes;
  bool operator==(const BoxSet&) const = default;
};

struct Point {
  double x = 0, y = 0;
  bool operator==(const Point&) const = default;
};

/// One keypoint-annotated object: points, object scale s and per-point constants k_i.
struct KeypointObject {
  std::vector<Point> points;
  double scale = 1.0;
  std::vector<double> per_point_constant;
  bool operator==(const KeypointObject&) const = default;
};

struct KeypointSet {
  std::vector<KeypointObject> objects;
  bool operator==(const KeypointSet&) const = default;
};

/// Tagged token range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string tag;

  std::size_t length() const { return end - start; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

struct SpanSet {
  std::vector<Span> spans;
  bool operator==(const SpanSet&) const = default;
};

/// Rooted ordered labeled tree.
struct OrderedTree {
  std::string label;
  std::vector<OrderedTree> children;

  bool is_leaf() const { return children.empty(); }
  bool operator==(const OrderedTree&) const = default;
};

/// Elements listed best-first (order[0] has rank 1).
struct Ranking {
  std::vector<std::string> order;
  bool operator==(const Ranking&) const = default;
};

using LabelPayload =
    std::variant<NumericVector, TokenSequence, BoxSet, KeypointSet, SpanSet, OrderedTree, Ranking>;

/// Payload kinds, in the same order as the LabelPayload alternatives.
enum class PayloadKind { vector, tokens, boxes, keypoints, spans, tree, ranking };

inline constexpr std::array<PayloadKind, 7> kAllPayloadKinds = {
    PayloadKind::vector, PayloadKind::tokens, PayloadKind::boxes,  PayloadKind::keypoints,
    PayloadKind::spans,  PayloadKind::tree,   PayloadKind::ranking};

inline PayloadKind kind_of(const LabelPayload& payload) {
  return static_cast<PayloadKind>(payload.index());
}

inline std::string_view to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::vector: return "vector";
    case PayloadKind::tokens: return "tokens";
    case PayloadKind::boxes: return "boxes";
    case PayloadKind::keypoints: return "keypoints";
    case PayloadKind::spans: return "spans";
    case PayloadKind::tree: return "tree";
    case PayloadKind::ranking: return "ranking";
  }
  return "unknown";
}

inline std::optional<PayloadKind> parse_payload_kind(std::string_view name) {
  for (auto kind : kAllPayloadKinds) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

struct Range {
  double min = 0;
  double max = 1;
  double width() const { return max - min; }
  bool operator==(const Range&) const = default;
};

using VectorRanges = std::vector<Range>;

/// Dataset-wide configuration carried in the optional header line of a dataset file.
struct DatasetMeta {
  std::optional<VectorRanges> ranges;
  std::optional<std::vector<std::string>> universe;
  std::optional<double> oks_scale_default;
  std::optional<double> oks_k_default;
  bool operator==(const DatasetMeta&) const = default;
};

struct AnnotationRecord {
  std::string item_id;
  std::string annotator_id;
  LabelPayload payload;
  bool operator==(const AnnotationRecord&) const = default;
};

struct Dataset {
  std::vector<AnnotationRecord> records;
  DatasetMeta meta;

  /// Kind of the first record; throws on an empty dataset.
  PayloadKind kind() const {
    if (records.empty()) throw ValidationError("empty dataset");
    return kind_of(records.front().payload);
  }
  bool operator==(const Dataset&) const = default;
};

inline std::size_t node_count(const OrderedTree& tree) {
  std::size_t n = 1;
  for (const auto& child : tree.children) n += node_count(child);
  return n;
}

inline std::size_t leaf_count(const OrderedTree& tree) {
  if (tree.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& child : tree.children) n += leaf_count(child);
  return n;
}

}  // namespace iaa
