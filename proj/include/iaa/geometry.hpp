#pragma once

// Single-object distances for bounding boxes and keypoint objects.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <utility>

#include "iaa/error.hpp"
#include "iaa/model.hpp"

namespace iaa {

struct GeometryConfig {
  /// Divisor of the vertex-RMSE sum; the default assumes pixel-like coordinate units.
  double l2_scale = 20.0;
  std::optional<std::pair<double, double>> image_extent;
};

enum class BoxMode { l2, iou, giou };
enum class KeypointMode { oks, bbox_iou };

inline double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

inline Box enclosing_box(const Box& a, const Box& b) {
  return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1),
          std::max(a.y1, b.y1)};
}

/// Intersection over union. Two zero-area boxes score 1 when coincident and 0 otherwise.
inline double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

/// Generalized IoU in [-1, 1]. When the enclosing box has zero area the empty-area
/// penalty is taken as 0.
inline double giou(const Box& a, const Box& b) {
  if (a == b) return 1.0;
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double hull = enclosing_box(a, b).area();
  const double base = uni > 0 ? inter / uni : 0.0;
  if (hull <= 0) return base;
  return base - (hull - uni) / hull;
}

inline double box_distance(const Box& a, const Box& b, BoxMode mode,
                           const GeometryConfig& cfg = {}) {
  if (!a.valid() || !b.valid()) throw ValidationError("box with x0 > x1 or y0 > y1");
  switch (mode) {
    case BoxMode::l2: {
      if (!(cfg.l2_scale > 0)) throw UsageError("l2_scale must be positive");
      // RMSE over the two coordinates of each vertex.
      const double upper_left =
          std::sqrt(((a.x0 - b.x0) * (a.x0 - b.x0) + (a.y0 - b.y0) * (a.y0 - b.y0)) / 2.0);
      const double lower_right =
          std::sqrt(((a.x1 - b.x1) * (a.x1 - b.x1) + (a.y1 - b.y1) * (a.y1 - b.y1)) / 2.0);
      return std::min(1.0, (upper_left + lower_right) / cfg.l2_scale);
    }
    case BoxMode::iou: return 1.0 - iou(a, b);
    case BoxMode::giou: return (1.0 - giou(a, b)) / 2.0;
  }
  throw UsageError("unknown box mode");
}

/// Smallest axis-aligned box containing every point (nonempty input).
inline Box bounding_box(std::span<const Point> points) {
  if (points.empty()) throw ValidationError("bounding box of an empty point set");
  Box box{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const auto& p : points) {
    box.x0 = std::min(box.x0, p.x);
    box.y0 = std::min(box.y0, p.y);
    box.x1 = std::max(box.x1, p.x);
    box.y1 = std::max(box.y1, p.y);
  }
  return box;
}

/// OKS-based distance using the first argument's scale and per-point constants.
inline double oks_distance_directed(const KeypointObject& a, const KeypointObject& b) {
  if (a.points.size() != b.points.size()) {
    throw ValidationError("keypoint count mismatch: " + std::to_string(a.points.size()) + " vs " +
                          std::to_string(b.points.size()));
  }
  if (a.per_point_constant.size() != a.points.size()) {
    throw ValidationError("keypoint constants count != point count");
  }
  if (a.points.empty()) return 0.0;
  const double s2 = a.scale * a.scale;
  double similarity = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const double dx = a.points[i].x - b.points[i].x;
    const double dy = a.points[i].y - b.points[i].y;
    const double k = a.per_point_constant[i];
    similarity += std::exp(-(dx * dx + dy * dy) / (2.0 * s2 * k * k));
  }
  return 1.0 - similarity / static_cast<double>(a.points.size());
}

/// oks: mean of the two directed OKS distances (each argument's scale once).
/// bbox_iou: IoU distance between the bounding boxes of the two point sets.
inline double keypoint_distance(const KeypointObject& a, const KeypointObject& b,
                                KeypointMode mode) {
  switch (mode) {
    case KeypointMode::oks:
      return (oks_distance_directed(a, b) + oks_distance_directed(b, a)) / 2.0;
    case KeypointMode::bbox_iou:
      return box_distance(bounding_box(a.points), bounding_box(b.points), BoxMode::iou);
  }
  throw UsageError("unknown keypoint mode");
}

}  // namespace iaa
