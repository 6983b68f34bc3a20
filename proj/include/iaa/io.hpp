#pragma once

// JSONL dataset files, embedding tables, report JSON and histogram CSV.

#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iaa/agreement.hpp"
#include "iaa/error.hpp"
#include "iaa/model.hpp"
#include "iaa/validate.hpp"
#include "iaa/vector_text.hpp"

namespace iaa {

using json = nlohmann::json;

struct ParseOptions {
  /// Per-point OKS constant for keypoint objects without "k"; overrides the file header.
  std::optional<double> oks_k_default;
};

struct LoadedDataset {
  Dataset dataset;
  std::vector<std::size_t> lines;  // 1-based source line of each record
  ValidationSummary summary;
};

/// Sentence id given to token labels written as a bare array.
inline std::string default_sentence_id(const std::string& item, const std::string& annotator) {
  return item + "/" + annotator;
}

namespace detail {

[[noreturn]] inline void fail_line(std::size_t line, const std::string& what) {
  throw ValidationError("line " + std::to_string(line) + ": " + what);
}

inline double number(const json& j, const char* what) {
  if (!j.is_number()) throw ValidationError(std::string(what) + " must be a number");
  return j.get<double>();
}

inline std::size_t index_value(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw ValidationError(std::string(what) + " must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

inline const json& array(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  return j;
}

inline std::string string_value(const json& j, const char* what) {
  if (!j.is_string()) throw ValidationError(std::string(what) + " must be a string");
  return j.get<std::string>();
}

inline OrderedTree parse_tree(const json& j) {
  // [label] or [label, [child, ...]]
  if (!j.is_array() || j.empty() || j.size() > 2) {
    throw ValidationError("tree node must be [label] or [label, [children]]");
  }
  OrderedTree t;
  t.label = string_value(j[0], "tree label");
  if (j.size() == 2) {
    for (const auto& c : array(j[1], "tree children")) t.children.push_back(parse_tree(c));
  }
  return t;
}

inline json tree_to_json(const OrderedTree& t) {
  if (t.is_leaf()) return json::array({t.label});
  json children = json::array();
  for (const auto& c : t.children) children.push_back(tree_to_json(c));
  return json::array({t.label, children});
}

inline LabelPayload parse_label(PayloadKind kind, const json& label, const std::string& item,
                                const std::string& annotator, const DatasetMeta& meta,
                                const ParseOptions& opt) {
  switch (kind) {
    case PayloadKind::vector: {
      NumericVector v;
      for (const auto& x : array(label, "vector label")) v.values.push_back(number(x, "vector value"));
      return v;
    }
    case PayloadKind::tokens: {
      TokenSequence s;
      const json* tokens = &label;
      if (label.is_object()) {
        if (!label.contains("tokens")) throw ValidationError("tokens label needs \"tokens\"");
        tokens = &label["tokens"];
        s.sentence_id = label.contains("sentence_id")
                            ? string_value(label["sentence_id"], "sentence_id")
                            : default_sentence_id(item, annotator);
      } else {
        s.sentence_id = default_sentence_id(item, annotator);
      }
      for (const auto& t : array(*tokens, "tokens label")) s.tokens.push_back(string_value(t, "token"));
      return s;
    }
    case PayloadKind::boxes: {
      BoxSet set;
      for (const auto& b : array(label, "boxes label")) {
        if (!b.is_array() || b.size() != 4) throw ValidationError("box must be [x0, y0, x1, y1]");
        set.boxes.push_back({number(b[0], "box coordinate"), number(b[1], "box coordinate"),
                             number(b[2], "box coordinate"), number(b[3], "box coordinate")});
      }
      return set;
    }
    case PayloadKind::keypoints: {
      KeypointSet set;
      for (const auto& o : array(label, "keypoints label")) {
        if (!o.is_object() || !o.contains("points")) {
          throw ValidationError("keypoint object must be {\"points\": [[x, y], ...], ...}");
        }
        KeypointObject obj;
        for (const auto& p : array(o["points"], "points")) {
          if (!p.is_array() || p.size() != 2) throw ValidationError("keypoint must be [x, y]");
          obj.points.push_back({number(p[0], "keypoint coordinate"), number(p[1], "keypoint coordinate")});
        }
        obj.scale = o.contains("scale") ? number(o["scale"], "scale") : meta.oks_scale_default.value_or(1.0);
        if (o.contains("k")) {
          for (const auto& k : array(o["k"], "k")) obj.per_point_constant.push_back(number(k, "k"));
        } else {
          const auto k = opt.oks_k_default ? opt.oks_k_default : meta.oks_k_default;
          if (!k) throw ValidationError("keypoint object has no \"k\" and no default constant is set");
          obj.per_point_constant.assign(obj.points.size(), *k);
        }
        set.objects.push_back(std::move(obj));
      }
      return set;
    }
    case PayloadKind::spans: {
      SpanSet set;
      for (const auto& s : array(label, "spans label")) {
        if (!s.is_array() || s.size() != 3) throw ValidationError("span must be [start, end, \"TAG\"]");
        set.spans.push_back({index_value(s[0], "span start"), index_value(s[1], "span end"),
                             string_value(s[2], "span tag")});
      }
      return set;
    }
    case PayloadKind::tree:
      return parse_tree(label);
    case PayloadKind::ranking: {
      Ranking r;
      for (const auto& e : array(label, "ranking label")) r.order.push_back(string_value(e, "ranking element"));
      return r;
    }
  }
  throw ValidationError("unknown payload kind");
}

inline DatasetMeta parse_meta(const json& m) {
  if (!m.is_object()) throw ValidationError("\"meta\" must be an object");
  DatasetMeta meta;
  if (m.contains("ranges")) {
    VectorRanges ranges;
    for (const auto& r : array(m["ranges"], "ranges")) {
      if (!r.is_array() || r.size() != 2) throw ValidationError("range must be [min, max]");
      ranges.push_back({number(r[0], "range bound"), number(r[1], "range bound")});
    }
    meta.ranges = ranges;
  }
  if (m.contains("universe")) {
    std::vector<std::string> u;
    for (const auto& e : array(m["universe"], "universe")) u.push_back(string_value(e, "universe element"));
    meta.universe = u;
  }
  if (m.contains("oks_scale_default")) meta.oks_scale_default = number(m["oks_scale_default"], "oks_scale_default");
  if (m.contains("oks_k_default")) meta.oks_k_default = number(m["oks_k_default"], "oks_k_default");
  for (const auto& [key, _] : m.items()) {
    if (key != "ranges" && key != "universe" && key != "oks_scale_default" && key != "oks_k_default") {
      throw ValidationError("unknown meta field '" + key + "'");
    }
  }
  return meta;
}

inline void attach_lines(ValidationSummary& summary, const Dataset& ds,
                         const std::vector<std::size_t>& lines) {
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_key;
  std::map<std::string, std::size_t> first_of_item;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    by_key[{r.item_id, r.annotator_id}].push_back(lines[i]);
    first_of_item.emplace(r.item_id, lines[i]);
  }
  std::map<std::pair<std::string, std::string>, std::size_t> duplicates_seen;
  for (auto& v : summary.violations) {
    if (v.kind == ViolationKind::single_annotation_item) {
      v.line = first_of_item.at(v.item_id);
      continue;
    }
    const auto& candidates = by_key.at({v.item_id, v.annotator_id});
    if (v.kind == ViolationKind::duplicate_annotation) {
      const std::size_t k = ++duplicates_seen[{v.item_id, v.annotator_id}];
      v.line = candidates[std::min(k, candidates.size() - 1)];
    } else {
      v.line = candidates.front();
    }
  }
}

}  // namespace detail

/// Parses a JSONL dataset and validates it. Malformed lines raise ValidationError naming
/// the line; the returned summary carries any violations with their lines.
inline LoadedDataset parse_dataset(std::istream& in, const ParseOptions& opt = {}) {
  LoadedDataset out;
  std::optional<PayloadKind> kind;
  std::string text;
  std::size_t line = 0;
  bool seen_record = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      detail::fail_line(line, std::string("malformed JSON (") + e.what() + ")");
    }
    try {
      if (!j.is_object()) throw ValidationError("expected a JSON object");
      if (j.contains("meta")) {
        if (seen_record) throw ValidationError("meta header must precede all records");
        if (j.size() != 1) throw ValidationError("meta header must contain only \"meta\"");
        out.dataset.meta = detail::parse_meta(j["meta"]);
        continue;
      }
      for (const char* field : {"item", "annotator", "kind", "label"}) {
        if (!j.contains(field)) throw ValidationError(std::string("missing field \"") + field + "\"");
      }
      const std::string item = detail::string_value(j["item"], "item");
      const std::string annotator = detail::string_value(j["annotator"], "annotator");
      const std::string kind_name = detail::string_value(j["kind"], "kind");
      const auto this_kind = parse_payload_kind(kind_name);
      if (!this_kind) throw ValidationError("unknown kind '" + kind_name + "'");
      if (kind && *kind != *this_kind) {
        throw ValidationError("kind '" + kind_name + "' differs from the file's kind '" +
                              std::string(to_string(*kind)) + "'");
      }
      kind = this_kind;
      out.dataset.records.push_back(
          {item, annotator, detail::parse_label(*this_kind, j["label"], item, annotator, out.dataset.meta, opt)});
      out.lines.push_back(line);
      seen_record = true;
    } catch (const ValidationError& e) {
      detail::fail_line(line, e.what());
    } catch (const json::exception& e) {
      detail::fail_line(line, e.what());
    }
  }
  if (out.dataset.records.empty()) throw ValidationError("empty dataset");
  out.summary = validate_dataset(out.dataset);
  detail::attach_lines(out.summary, out.dataset, out.lines);
  return out;
}

inline LoadedDataset parse_dataset(const std::string& text, const ParseOptions& opt = {}) {
  std::istringstream in(text);
  return parse_dataset(in, opt);
}

/// Reads, parses and validates a dataset file; throws on any fatal violation.
inline Dataset load_dataset(const std::string& path, const ParseOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset file '" + path + "'");
  auto loaded = parse_dataset(in, opt);
  require_valid(loaded.summary);
  return std::move(loaded.dataset);
}

inline json label_to_json(const LabelPayload& payload, const std::string& item,
                          const std::string& annotator) {
  return std::visit(
      [&](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NumericVector>) {
          return p.values;
        } else if constexpr (std::is_same_v<T, TokenSequence>) {
          if (p.sentence_id == default_sentence_id(item, annotator)) return p.tokens;
          return json{{"sentence_id", p.sentence_id}, {"tokens", p.tokens}};
        } else if constexpr (std::is_same_v<T, BoxSet>) {
          json a = json::array();
          for (const auto& b : p.boxes) a.push_back({b.x0, b.y0, b.x1, b.y1});
          return a;
        } else if constexpr (std::is_same_v<T, KeypointSet>) {
          json a = json::array();
          for (const auto& o : p.objects) {
            json pts = json::array();
            for (const auto& pt : o.points) pts.push_back({pt.x, pt.y});
            a.push_back({{"points", pts}, {"scale", o.scale}, {"k", o.per_point_constant}});
          }
          return a;
        } else if constexpr (std::is_same_v<T, SpanSet>) {
          json a = json::array();
          for (const auto& s : p.spans) a.push_back({s.start, s.end, s.tag});
          return a;
        } else if constexpr (std::is_same_v<T, OrderedTree>) {
          return detail::tree_to_json(p);
        } else {
          return p.order;
        }
      },
      payload);
}

inline json meta_to_json(const DatasetMeta& meta) {
  json m = json::object();
  if (meta.ranges) {
    json r = json::array();
    for (const auto& range : *meta.ranges) r.push_back({range.min, range.max});
    m["ranges"] = r;
  }
  if (meta.universe) m["universe"] = *meta.universe;
  if (meta.oks_scale_default) m["oks_scale_default"] = *meta.oks_scale_default;
  if (meta.oks_k_default) m["oks_k_default"] = *meta.oks_k_default;
  return m;
}

/// Writes the dataset as JSONL, with a meta header when any meta field is set.
inline void write_dataset(std::ostream& out, const Dataset& ds) {
  const json m = meta_to_json(ds.meta);
  if (!m.empty()) out << json{{"meta", m}}.dump() << '\n';
  for (const auto& r : ds.records) {
    json line = {{"item", r.item_id},
                 {"annotator", r.annotator_id},
                 {"kind", std::string(to_string(kind_of(r.payload)))},
                 {"label", label_to_json(r.payload, r.item_id, r.annotator_id)}};
    out << line.dump() << '\n';
  }
}

/// Per-dimension [min, max] over the data; a constant dimension gets width 1.
inline VectorRanges infer_vector_ranges(const Dataset& ds) {
  VectorRanges ranges;
  for (const auto& r : ds.records) {
    const auto& v = std::get<NumericVector>(r.payload).values;
    if (ranges.empty()) {
      for (double x : v) ranges.push_back({x, x});
    }
    for (std::size_t i = 0; i < std::min(v.size(), ranges.size()); ++i) {
      ranges[i].min = std::min(ranges[i].min, v[i]);
      ranges[i].max = std::max(ranges[i].max, v[i]);
    }
  }
  for (auto& range : ranges) {
    if (!(range.max > range.min)) range.max = range.min + 1.0;
  }
  return ranges;
}

/// Embedding table from JSONL lines {"sentence_id": ..., "vectors": [[...], ...]}.
inline std::shared_ptr<TokenEmbeddingTable> load_embeddings(std::istream& in) {
  auto table = std::make_shared<TokenEmbeddingTable>();
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      if (!j.is_object() || !j.contains("sentence_id") || !j.contains("vectors")) {
        throw ValidationError("expected {\"sentence_id\": ..., \"vectors\": [[...], ...]}");
      }
      table->add(detail::string_value(j["sentence_id"], "sentence_id"),
                 j["vectors"].get<std::vector<std::vector<double>>>());
    } catch (const ValidationError& e) {
      detail::fail_line(line, e.what());
    } catch (const json::exception& e) {
      detail::fail_line(line, e.what());
    }
  }
  return table;
}

inline std::shared_ptr<TokenEmbeddingTable> load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open embeddings file '" + path + "'");
  return load_embeddings(in);
}

inline json histogram_to_json(const Histogram& h) {
  json a = json::array();
  for (std::size_t i = 0; i < h.counts.size(); ++i) a.push_back({h.bin_lo(i), h.bin_hi(i), h.counts[i]});
  return a;
}

inline json report_to_json(const AgreementReport& r) {
  json params = json::object();
  for (const auto& [k, v] : r.distance.params) params[k] = v;
  json bounds = json::array();
  bounds.push_back(r.kde_bounds.low ? json(*r.kde_bounds.low) : json(nullptr));
  bounds.push_back(r.kde_bounds.high ? json(*r.kde_bounds.high) : json(nullptr));
  json j = {
      {"distance", {{"name", r.distance.name}, {"kind", std::string(to_string(r.distance.kind))}, {"params", params}}},
      {"alpha", r.alpha},
      {"sigma", r.sigma},
      {"ks", {{"statistic", r.ks.statistic}, {"pvalue", r.ks.pvalue}, {"measure", r.ks.measure},
              {"permutations", r.ks.permutations}}},
      {"p_threshold", r.p_threshold},
      {"counts", {{"items", r.n_items},
                  {"annotations", r.n_annotations},
                  {"observed_pairs", r.n_observed_pairs},
                  {"expected_pairs", r.n_expected_pairs},
                  {"expected_pairs_available", r.n_expected_available}}},
      {"means", {{"observed", r.mean_observed}, {"expected", r.mean_expected}}},
      {"kde", {{"bandwidth", r.bandwidth}, {"bounds", bounds}}},
      {"diagnostics", r.diagnostics.flags()},
      {"histograms", {{"observed", histogram_to_json(r.observed_histogram)},
                      {"expected", histogram_to_json(r.expected_histogram)}}},
      {"seed", r.seed},
  };
  if (r.alpha_unclamped) j["alpha_unclamped"] = *r.alpha_unclamped;
  return j;
}

namespace detail {

inline Histogram histogram_from_json(const json& a) {
  Histogram h;
  if (!a.is_array() || a.empty()) throw ValidationError("histogram must be a nonempty array");
  h.lo = a.front().at(0).get<double>();
  h.hi = a.back().at(1).get<double>();
  for (const auto& bin : a) h.counts.push_back(bin.at(2).get<std::size_t>());
  return h;
}

}  // namespace detail

/// Inverse of report_to_json.
inline AgreementReport report_from_json(const json& j) {
  try {
    AgreementReport r;
    r.distance.name = j.at("distance").at("name").get<std::string>();
    const auto kind = parse_payload_kind(j.at("distance").at("kind").get<std::string>());
    if (!kind) throw ValidationError("report has an unknown distance kind");
    r.distance.kind = *kind;
    for (const auto& [k, v] : j.at("distance").at("params").items()) r.distance.params[k] = v.get<std::string>();
    r.alpha = j.at("alpha").get<double>();
    if (j.contains("alpha_unclamped")) r.alpha_unclamped = j["alpha_unclamped"].get<double>();
    r.sigma = j.at("sigma").get<double>();
    const auto& ks = j.at("ks");
    r.ks = {ks.at("statistic").get<double>(), ks.at("pvalue").get<double>(), ks.at("measure").get<double>(),
            ks.at("permutations").get<std::size_t>()};
    r.p_threshold = j.at("p_threshold").get<double>();
    const auto& c = j.at("counts");
    r.n_items = c.at("items").get<std::size_t>();
    r.n_annotations = c.at("annotations").get<std::size_t>();
    r.n_observed_pairs = c.at("observed_pairs").get<std::size_t>();
    r.n_expected_pairs = c.at("expected_pairs").get<std::size_t>();
    r.n_expected_available = c.at("expected_pairs_available").get<std::size_t>();
    r.mean_observed = j.at("means").at("observed").get<double>();
    r.mean_expected = j.at("means").at("expected").get<double>();
    r.bandwidth = j.at("kde").at("bandwidth").get<double>();
    const auto& b = j.at("kde").at("bounds");
    if (!b.at(0).is_null()) r.kde_bounds.low = b[0].get<double>();
    if (!b.at(1).is_null()) r.kde_bounds.high = b[1].get<double>();
    for (const auto& f : j.at("diagnostics")) {
      const auto flag = f.get<std::string>();
      if (flag == "expected_low_boundary_mode") r.diagnostics.expected_low_mode = true;
      else if (flag == "observed_high_boundary_mode") r.diagnostics.observed_high_mode = true;
      else if (flag == "observed_multimodal") r.diagnostics.observed_multimodal = true;
      else if (flag == "expected_multimodal") r.diagnostics.expected_multimodal = true;
      else throw ValidationError("unknown diagnostic flag '" + flag + "'");
    }
    r.observed_histogram = detail::histogram_from_json(j.at("histograms").at("observed"));
    r.expected_histogram = detail::histogram_from_json(j.at("histograms").at("expected"));
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

/// CSV with header series,bin,lo,hi,count; observed rows first.
inline void write_histogram_csv(std::ostream& out, const AgreementReport& r) {
  out << "series,bin,lo,hi,count\n";
  auto rows = [&](const char* series, const Histogram& h) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      out << series << ',' << i << ',' << json(h.bin_lo(i)).dump() << ',' << json(h.bin_hi(i)).dump()
          << ',' << h.counts[i] << '\n';
    }
  };
  rows("observed", r.observed_histogram);
  rows("expected", r.expected_histogram);
}

}  // namespace iaa
