#pragma once

// Ordered tree edit distance (Zhang-Shasha keyroot decomposition, unit costs).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "iaa/model.hpp"

namespace iaa {

namespace detail {

/// Postorder view of a tree: labels and leftmost-leaf-descendant indices.
struct PostorderTree {
  std::vector<const std::string*> labels;
  std::vector<std::size_t> leftmost;
  std::vector<std::size_t> keyroots;

  explicit PostorderTree(const OrderedTree& root) {
    visit(root);
    // A keyroot is the highest-numbered node for each distinct leftmost leaf.
    std::vector<bool> taken(labels.size(), false);
    for (std::size_t i = labels.size(); i-- > 0;) {
      if (!taken[leftmost[i]]) {
        taken[leftmost[i]] = true;
        keyroots.push_back(i);
      }
    }
    std::sort(keyroots.begin(), keyroots.end());
  }

  std::size_t size() const { return labels.size(); }

 private:
  std::size_t visit(const OrderedTree& node) {
    std::size_t first_leaf = labels.size();
    bool first = true;
    for (const auto& child : node.children) {
      const std::size_t lm = visit(child);
      if (first) {
        first_leaf = lm;
        first = false;
      }
    }
    labels.push_back(&node.label);
    leftmost.push_back(first_leaf);
    return first_leaf;
  }
};

}  // namespace detail

/// Minimum number of node insertions, deletions and relabelings turning `a` into `b`.
inline std::size_t tree_edit_distance(const OrderedTree& a, const OrderedTree& b) {
  const detail::PostorderTree ta(a), tb(b);
  const std::size_t n = ta.size(), m = tb.size();
  std::vector<std::size_t> tree_dist(n * m, 0);
  std::vector<std::size_t> forest((n + 1) * (m + 1), 0);
  auto td = [&](std::size_t x, std::size_t y) -> std::size_t& { return tree_dist[x * m + y]; };

  for (std::size_t i : ta.keyroots) {
    for (std::size_t j : tb.keyroots) {
      const std::size_t li = ta.leftmost[i], lj = tb.leftmost[j];
      const std::size_t rows = i - li + 2, cols = j - lj + 2;
      auto fd = [&](std::size_t r, std::size_t c) -> std::size_t& { return forest[r * cols + c]; };
      fd(0, 0) = 0;
      for (std::size_t r = 1; r < rows; ++r) fd(r, 0) = fd(r - 1, 0) + 1;
      for (std::size_t c = 1; c < cols; ++c) fd(0, c) = fd(0, c - 1) + 1;
      for (std::size_t x = li; x <= i; ++x) {
        const std::size_t r = x - li + 1;
        for (std::size_t y = lj; y <= j; ++y) {
          const std::size_t c = y - lj + 1;
          const std::size_t remove = fd(r - 1, c) + 1;
          const std::size_t insert = fd(r, c - 1) + 1;
          if (ta.leftmost[x] == li && tb.leftmost[y] == lj) {
            const std::size_t relabel = fd(r - 1, c - 1) + (*ta.labels[x] == *tb.labels[y] ? 0 : 1);
            fd(r, c) = std::min({remove, insert, relabel});
            td(x, y) = fd(r, c);
          } else {
            const std::size_t p = ta.leftmost[x] - li, q = tb.leftmost[y] - lj;
            fd(r, c) = std::min({remove, insert, fd(p, q) + td(x, y)});
          }
        }
      }
    }
  }
  return td(n - 1, m - 1);
}

enum class TedVariant { plain, norm, diff };

/// Variant value before clamping: diff may be negative.
inline double tree_distance_unclamped(const OrderedTree& a, const OrderedTree& b,
                                      TedVariant variant) {
  const auto ted = static_cast<double>(tree_edit_distance(a, b));
  const auto la = static_cast<double>(leaf_count(a));
  const auto lb = static_cast<double>(leaf_count(b));
  switch (variant) {
    case TedVariant::plain: return ted;
    case TedVariant::norm: return ted / (la + lb);
    case TedVariant::diff: return ted - std::abs(la - lb);
  }
  return ted;
}

/// plain: TED. norm: TED / (leaves(a) + leaves(b)). diff: TED - |leaves(a) - leaves(b)|,
/// clamped at 0.
inline double tree_distance(const OrderedTree& a, const OrderedTree& b, TedVariant variant) {
  return std::max(0.0, tree_distance_unclamped(a, b, variant));
}

}  // namespace iaa
