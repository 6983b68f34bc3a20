#pragma once

// Test-only helpers: random payload generators, dataset builders and independent oracles.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "iaa/iaa.hpp"

namespace iaa::test {

// ---------------------------------------------------------------- generators

inline std::vector<std::string> random_tokens(std::mt19937_64& g, std::size_t max_len,
                                              const std::vector<std::string>& alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len), pick(0, alphabet.size() - 1);
  std::vector<std::string> out(len(g));
  for (auto& t : out) t = alphabet[pick(g)];
  return out;
}

inline OrderedTree random_tree(std::mt19937_64& g, std::size_t max_nodes,
                               const std::vector<std::string>& labels) {
  std::uniform_int_distribution<std::size_t> size(1, max_nodes), pick(0, labels.size() - 1);
  const std::size_t n = size(g);
  // Attach node i under a uniformly chosen earlier node; children keep insertion order.
  std::vector<OrderedTree> nodes(n);
  std::vector<std::size_t> parent(n, 0);
  for (std::size_t i = 0; i < n; ++i) nodes[i].label = labels[pick(g)];
  for (std::size_t i = 1; i < n; ++i) parent[i] = std::uniform_int_distribution<std::size_t>(0, i - 1)(g);
  for (std::size_t i = n; i-- > 1;) nodes[parent[i]].children.insert(nodes[parent[i]].children.begin(), nodes[i]);
  return nodes[0];
}

/// Random payload of the given kind. Values are drawn from small domains so that exact
/// ties and identical payloads occur.
inline LabelPayload random_payload(PayloadKind kind, std::mt19937_64& g) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 4);
  switch (kind) {
    case PayloadKind::vector: {
      NumericVector v;
      for (int d = 0; d < 3; ++d) v.values.push_back(small(g) / 4.0);
      return v;
    }
    case PayloadKind::tokens:
      return TokenSequence{random_tokens(g, 6, {"a", "b", "c"}), ""};
    case PayloadKind::boxes: {
      BoxSet s;
      const int n = small(g);
      for (int i = 0; i < n; ++i) {
        const double x = 10 * small(g), y = 10 * small(g);
        s.boxes.push_back({x, y, x + 5 + 10 * unit(g), y + 5 + 10 * unit(g)});
      }
      return s;
    }
    case PayloadKind::keypoints: {
      KeypointSet s;
      const int n = small(g) % 4;
      for (int i = 0; i < n; ++i) {
        KeypointObject o;
        for (int p = 0; p < 3; ++p) o.points.push_back({10.0 * small(g), 10.0 * small(g)});
        o.scale = 1 + small(g);
        o.per_point_constant.assign(3, 0.5);
        s.objects.push_back(o);
      }
      return s;
    }
    case PayloadKind::spans: {
      SpanSet s;
      const int n = small(g);
      for (int i = 0; i < n; ++i) {
        const std::size_t start = static_cast<std::size_t>(small(g) * 3);
        s.spans.push_back({start, start + 1 + static_cast<std::size_t>(small(g) % 3), small(g) % 2 ? "PER" : "LOC"});
      }
      std::sort(s.spans.begin(), s.spans.end());
      return s;
    }
    case PayloadKind::tree:
      return random_tree(g, 7, {"A", "B", "C"});
    case PayloadKind::ranking: {
      Ranking r{{"a", "b", "c", "d", "e", "f"}};
      std::shuffle(r.order.begin(), r.order.end(), g);
      return r;
    }
  }
  return NumericVector{};
}

inline std::vector<LabelPayload> random_payloads(PayloadKind kind, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<LabelPayload> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_payload(kind, g));
  return out;
}

/// Dataset from (item, annotator, payload) triples.
inline Dataset make_dataset(std::vector<AnnotationRecord> records, DatasetMeta meta = {}) {
  Dataset ds;
  ds.records = std::move(records);
  ds.meta = std::move(meta);
  return ds;
}

inline LabelPayload scalar(double x) { return NumericVector{{x}}; }

// ---------------------------------------------------------------- oracles

/// Edit distance by the textbook recursion on prefixes, memoized.
inline std::size_t levenshtein_recursive(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == 0) return j;
    if (j == 0) return i;
    if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
    const std::size_t v = std::min({rec(i - 1, j) + 1, rec(i, j - 1) + 1,
                                    rec(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1)});
    memo[{i, j}] = v;
    return v;
  };
  return rec(a.size(), b.size());
}

/// Number of element pairs the two rankings order differently, by direct enumeration.
inline std::size_t kendall_discordant(const Ranking& a, const Ranking& b) {
  std::unordered_map<std::string, std::size_t> pa, pb;
  for (std::size_t i = 0; i < a.order.size(); ++i) pa[a.order[i]] = i;
  for (std::size_t i = 0; i < b.order.size(); ++i) pb[b.order[i]] = i;
  std::size_t discordant = 0;
  for (std::size_t i = 0; i < a.order.size(); ++i) {
    for (std::size_t j = i + 1; j < a.order.size(); ++j) {
      const auto& x = a.order[i];
      const auto& y = a.order[j];
      if ((pa[x] < pa[y]) != (pb[x] < pb[y])) ++discordant;
    }
  }
  return discordant;
}

/// Kendall distance from the definition: share of discordant element pairs.
inline double kendall_distance_definition(const Ranking& a, const Ranking& b) {
  const std::size_t n = a.order.size();
  if (n < 2) return 0.0;
  return static_cast<double>(kendall_discordant(a, b)) /
         (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

// Tree edit distance by breadth-first search over ordered labeled forests. Unit-cost
// scripts can be reordered as deletions, then relabelings, then insertions, so no
// intermediate forest is larger than the larger endpoint; the search is therefore
// limited to forests of at most `max_nodes` nodes.
namespace ted_oracle {

using Forest = std::vector<OrderedTree>;

inline std::string encode(const OrderedTree& t) {
  std::string s = "(" + t.label;
  for (const auto& c : t.children) s += encode(c);
  return s + ")";
}

inline std::string encode(const Forest& f) {
  std::string s;
  for (const auto& t : f) s += encode(t);
  return s;
}

inline std::size_t size(const Forest& f) {
  std::size_t n = 0;
  for (const auto& t : f) n += node_count(t);
  return n;
}

/// Child lists of a virtual root over the forest, in preorder; index 0 is the forest itself.
inline void child_lists(Forest& f, std::vector<Forest*>& out) {
  out.push_back(&f);
  for (auto& t : f) child_lists(t.children, out);
}

inline std::vector<Forest> neighbors(const Forest& f, std::size_t max_nodes, const std::vector<std::string>& labels) {
  std::vector<Forest> out;
  Forest probe = f;
  std::vector<Forest*> lists;
  child_lists(probe, lists);
  const std::size_t n_lists = lists.size();
  for (std::size_t li = 0; li < n_lists; ++li) {
    const std::size_t len = lists[li]->size();
    // Delete or relabel the k-th child of list li.
    for (std::size_t k = 0; k < len; ++k) {
      {
        Forest copy = f;
        std::vector<Forest*> cl;
        child_lists(copy, cl);
        Forest& list = *cl[li];
        Forest kids = list[k].children;
        list.erase(list.begin() + static_cast<std::ptrdiff_t>(k));
        list.insert(list.begin() + static_cast<std::ptrdiff_t>(k), kids.begin(), kids.end());
        out.push_back(std::move(copy));
      }
      for (const auto& l : labels) {
        Forest copy = f;
        std::vector<Forest*> cl;
        child_lists(copy, cl);
        if ((*cl[li])[k].label == l) continue;
        (*cl[li])[k].label = l;
        out.push_back(std::move(copy));
      }
    }
    // Insert a node adopting children [i, j) of list li.
    if (size(f) < max_nodes) {
      for (std::size_t i = 0; i <= len; ++i) {
        for (std::size_t j = i; j <= len; ++j) {
          for (const auto& l : labels) {
            Forest copy = f;
            std::vector<Forest*> cl;
            child_lists(copy, cl);
            Forest& list = *cl[li];
            OrderedTree node{l, Forest(list.begin() + static_cast<std::ptrdiff_t>(i),
                                       list.begin() + static_cast<std::ptrdiff_t>(j))};
            list.erase(list.begin() + static_cast<std::ptrdiff_t>(i), list.begin() + static_cast<std::ptrdiff_t>(j));
            list.insert(list.begin() + static_cast<std::ptrdiff_t>(i), std::move(node));
            out.push_back(std::move(copy));
          }
        }
      }
    }
  }
  return out;
}

/// Every ordered tree with 1..max_nodes nodes over `labels`.
inline std::vector<OrderedTree> all_trees(std::size_t max_nodes, const std::vector<std::string>& labels) {
  // Forests of exactly n nodes, built from a first tree plus a remaining forest.
  std::vector<std::vector<Forest>> forests(max_nodes + 1);
  std::vector<std::vector<OrderedTree>> trees(max_nodes + 1);
  forests[0] = {Forest{}};
  for (std::size_t n = 1; n <= max_nodes; ++n) {
    for (const auto& l : labels) {
      for (const auto& kids : forests[n - 1]) trees[n].push_back(OrderedTree{l, kids});
    }
    for (std::size_t first = 1; first <= n; ++first) {
      for (const auto& t : trees[first]) {
        for (const auto& rest : forests[n - first]) {
          Forest f{t};
          f.insert(f.end(), rest.begin(), rest.end());
          forests[n].push_back(std::move(f));
        }
      }
    }
  }
  std::vector<OrderedTree> out;
  for (std::size_t n = 1; n <= max_nodes; ++n) out.insert(out.end(), trees[n].begin(), trees[n].end());
  return out;
}

/// Shortest-script distances from `source` to every forest reachable within the size cap.
inline std::unordered_map<std::string, std::size_t> distances_from(const OrderedTree& source, std::size_t max_nodes,
                                                                   const std::vector<std::string>& labels) {
  std::unordered_map<std::string, std::size_t> dist;
  std::deque<Forest> queue;
  const Forest start{source};
  dist[encode(start)] = 0;
  queue.push_back(start);
  while (!queue.empty()) {
    const Forest f = std::move(queue.front());
    queue.pop_front();
    const std::size_t d = dist[encode(f)];
    for (auto& next : neighbors(f, max_nodes, labels)) {
      if (dist.emplace(encode(next), d + 1).second) queue.push_back(std::move(next));
    }
  }
  return dist;
}

}  // namespace ted_oracle

/// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps,
                               int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double tol, int d) {
        const double mid = (lo + hi) / 2, lm = (lo + mid) / 2, rm = (mid + hi) / 2;
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
        return rec(lo, mid, flo, flm, fmid, left, tol / 2, d - 1) + rec(mid, hi, fmid, frm, fhi, right, tol / 2, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), eps, depth);
}

/// Reflected Gaussian mixture written out independently of the library.
struct MixtureOracle {
  std::vector<double> centers;
  double h;
  std::size_t n;
  std::optional<double> low, high;

  MixtureOracle(const std::vector<double>& sample, double bandwidth, std::optional<double> lo, std::optional<double> hi)
      : h(bandwidth), n(sample.size()), low(lo), high(hi) {
    for (double x : sample) {
      centers.push_back(x);
      if (low) centers.push_back(2 * *low - x);
      if (high) centers.push_back(2 * *high - x);
    }
  }

  double raw_pdf(double x) const {
    double s = 0;
    for (double c : centers) {
      const double z = (x - c) / h;
      s += std::exp(-0.5 * z * z);
    }
    return s / (h * std::sqrt(2 * M_PI) * static_cast<double>(n));
  }

  /// CDF at each query point (queries need not be sorted), by piecewise quadrature.
  std::vector<double> cdf(const std::vector<double>& queries) const {
    const auto [cmin, cmax] = std::minmax_element(centers.begin(), centers.end());
    const double lo = low ? *low : *cmin - 12 * h;
    const double hi = high ? *high : *cmax + 12 * h;
    auto f = [this](double x) { return raw_pdf(x); };
    // Integrate over a fine fixed grid of panels so no narrow kernel is skipped.
    auto integrate = [&](double a, double b) {
      if (b <= a) return 0.0;
      const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
      double s = 0;
      for (int p = 0; p < panels; ++p) {
        const double pa = a + (b - a) * p / panels, pb = a + (b - a) * (p + 1) / panels;
        s += adaptive_simpson(f, pa, pb, 1e-13);
      }
      return s;
    };
    const double total = integrate(lo, hi);
    std::vector<std::size_t> idx(queries.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return queries[a] < queries[b]; });
    std::vector<double> out(queries.size());
    double acc = 0, at = lo;
    for (std::size_t i : idx) {
      const double q = std::clamp(queries[i], lo, hi);
      acc += integrate(at, q);
      at = std::max(at, q);
      out[i] = std::clamp(acc / total, 0.0, 1.0);
    }
    return out;
  }
};

/// Scott's bandwidth computed independently (two-pass, n - 1 denominator).
inline double scott_oracle(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (n - 1)) * std::pow(n, -0.2);
}

/// One-sided KS statistic by brute force over all pooled points.
inline double ks_brute(const std::vector<double>& o, const std::vector<double>& e) {
  double best = 0;
  auto ecdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [x](double v) { return v <= x; })) /
           static_cast<double>(s.size());
  };
  for (const auto* s : {&o, &e}) {
    for (double x : *s) best = std::max(best, ecdf(o, x) - ecdf(e, x));
  }
  return best;
}

/// Standard normal quantile by bisection on erfc.
inline double normal_quantile(double p) {
  double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

/// n evenly spaced quantiles of N(mean, sd).
inline std::vector<double> normal_quantiles(std::size_t n, double mean, double sd) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(mean + sd * normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n)));
  }
  return out;
}

}  // namespace iaa::test
