#pragma once

// The `agree` command line: compute, compare, hist, simulate, check-metric.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iaa/agreement.hpp"
#include "iaa/distance.hpp"
#include "iaa/error.hpp"
#include "iaa/io.hpp"
#include "iaa/metric_check.hpp"
#include "iaa/noise.hpp"

namespace iaa {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitValidation = 3, kExitNumeric = 4 };

namespace cli {

/// Options shared by the subcommands that run the agreement pipeline.
struct PipelineArgs {
  std::string input;
  std::vector<std::string> params;
  double p = 0.05;
  std::string de_samples;
  std::uint64_t seed = 0;
  std::optional<double> bandwidth;
  std::size_t exact_ks = 0;
  bool exclude_same_annotator = false;
  unsigned threads = 1;
  std::string embeddings;
  std::optional<double> oks_k;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--input", input, "Dataset file (JSONL)")->required();
    cmd.add_option("--p", p, "sigma threshold p")->capture_default_str();
    cmd.add_option("--de-samples", de_samples, "Expected-pair sample size, N or 'all' (default min(10|Do|, all))");
    cmd.add_option("--seed", seed, "Root random seed")->capture_default_str();
    cmd.add_option("--bandwidth", bandwidth, "Fixed KDE bandwidth (default Scott's rule)");
    cmd.add_option("--exact-ks", exact_ks, "Permutation count for the KS p-value (0 = asymptotic)");
    cmd.add_flag("--exclude-same-annotator", exclude_same_annotator,
                 "Leave same-annotator pairs out of the expected sample");
    cmd.add_option("--threads", threads, "Worker threads for distance evaluation")->capture_default_str();
    cmd.add_option("--embeddings", embeddings, "Token embedding table (JSONL) for embedding_f1");
    cmd.add_option("--oks-k", oks_k, "Per-point OKS constant for keypoints without k");
  }

  AgreementOptions options() const {
    AgreementOptions opt;
    opt.p = p;
    opt.seed = seed;
    opt.bandwidth = bandwidth;
    opt.ks_permutations = exact_ks;
    opt.exclude_same_annotator = exclude_same_annotator;
    opt.threads = threads;
    if (!de_samples.empty()) {
      if (de_samples == "all") {
        opt.de_sample_size = kAllPairs;
      } else {
        std::size_t used = 0;
        unsigned long long n = 0;
        try {
          n = std::stoull(de_samples, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != de_samples.size() || n == 0 || de_samples.front() == '-') {
          throw UsageError("--de-samples expects a positive integer or 'all', got '" + de_samples + "'");
        }
        opt.de_sample_size = static_cast<std::size_t>(n);
      }
    }
    if (!(p > 0 && p < 1)) throw UsageError("--p must lie in (0, 1)");
    if (bandwidth && !(*bandwidth > 0)) throw UsageError("--bandwidth must be positive");
    return opt;
  }

  Dataset load() const {
    ParseOptions po;
    po.oks_k_default = oks_k;
    return load_dataset(input, po);
  }

  DistanceContext context(const Dataset& ds) const {
    DistanceContext ctx;
    if (ds.kind() == PayloadKind::vector) ctx.ranges = ds.meta.ranges ? *ds.meta.ranges : infer_vector_ranges(ds);
    if (!embeddings.empty()) ctx.embeddings = load_embeddings(embeddings);
    return ctx;
  }
};

inline DistanceParams parse_params(const std::vector<std::string>& items) {
  DistanceParams params;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + item + "'");
    params[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return params;
}

/// "name" or "name:key=value:key=value".
inline std::pair<std::string, DistanceParams> parse_distance_item(const std::string& item) {
  std::vector<std::string> parts;
  std::stringstream ss(item);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.empty() || parts.front().empty()) throw UsageError("empty distance name");
  return {parts.front(), parse_params({parts.begin() + 1, parts.end()})};
}

inline std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string label(const DistanceSpec& spec) {
  std::string s = spec.name;
  for (const auto& [k, v] : spec.params) s += ":" + k + "=" + v;
  return s;
}

inline void print_table(std::ostream& out, const std::vector<AgreementReport>& reports) {
  std::size_t width = 8;
  for (const auto& r : reports) width = std::max(width, label(r.distance).size());
  out << std::left << std::setw(static_cast<int>(width)) << "distance" << std::right << std::setw(10) << "alpha"
      << std::setw(10) << "sigma" << std::setw(10) << "ks_stat" << std::setw(12) << "ks_pvalue" << std::setw(12)
      << "ks_measure" << '\n';
  for (const auto& r : reports) {
    out << std::left << std::setw(static_cast<int>(width)) << label(r.distance) << std::right << std::setw(10)
        << fixed(r.alpha) << std::setw(10) << fixed(r.sigma) << std::setw(10) << fixed(r.ks.statistic)
        << std::setw(12) << fixed(r.ks.pvalue, 6) << std::setw(12) << fixed(r.ks.measure, 6) << '\n';
  }
}

inline void print_details(std::ostream& out, const AgreementReport& r) {
  out << "pairs: observed " << r.n_observed_pairs << ", expected " << r.n_expected_pairs << " of "
      << r.n_expected_available << "; items " << r.n_items << ", annotations " << r.n_annotations << '\n';
  if (r.alpha_unclamped) out << "alpha (unclamped distances): " << fixed(*r.alpha_unclamped) << '\n';
  const auto flags = r.diagnostics.flags();
  out << "diagnostics:";
  if (flags.empty()) out << " none";
  for (const auto& f : flags) out << ' ' << f;
  out << '\n';
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
  if (!f) throw UsageError("failed writing '" + path + "'");
}

inline AgreementReport run_pipeline(const Dataset& ds, const DistanceContext& ctx, const std::string& name,
                                    DistanceParams params, const AgreementOptions& opt) {
  const Distance d = make_distance(DistanceSpec{name, ds.kind(), std::move(params)}, ctx);
  return agreement_report(ds, d, opt);
}

}  // namespace cli

/// Entry point of the `agree` tool. Returns the process exit code.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inter-annotator agreement for complex annotation types"};
  app.name("agree");
  app.require_subcommand(1);

  cli::PipelineArgs compute_args, compare_args, hist_args;
  std::string compute_distance, compute_out;
  auto* compute = app.add_subcommand("compute", "Agreement measures for one distance");
  compute_args.add_to(*compute);
  compute->add_option("--distance", compute_distance, "Distance name")->required();
  compute->add_option("--param", compute_args.params, "Distance parameter key=value (repeatable)");
  compute->add_option("--out", compute_out, "Write the report JSON here");

  std::vector<std::string> compare_distances;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Rank several distances by KS measure");
  compare_args.add_to(*compare);
  compare->add_option("--distances", compare_distances, "Comma-separated names, each optionally name:key=value")
      ->required()
      ->delimiter(',');
  compare->add_option("--out", compare_out, "Write the reports and ranking JSON here");

  std::string hist_distance, hist_out;
  auto* hist = app.add_subcommand("hist", "Export observed/expected histograms as CSV");
  hist_args.add_to(*hist);
  hist->add_option("--distance", hist_distance, "Distance name")->required();
  hist->add_option("--param", hist_args.params, "Distance parameter key=value (repeatable)");
  hist->add_option("--out", hist_out, "CSV output file")->required();

  std::string sim_task, sim_out;
  std::size_t sim_items = 50, sim_annotators = 3, sim_size = 0, sim_doc_length = 50;
  double sim_noise = 0, sim_extent = 100;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Generate a noisy synthetic dataset");
  simulate->add_option("--task", sim_task, "ranking, vector, spans or boxes")->required();
  simulate->add_option("--items", sim_items, "Number of items")->capture_default_str();
  simulate->add_option("--annotators", sim_annotators, "Annotators per item")->capture_default_str();
  simulate->add_option("--noise", sim_noise, "Noise level in [0, 1]")->required();
  simulate->add_option("--seed", sim_seed, "Root random seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Dataset output file (JSONL)")->required();
  simulate->add_option("--size", sim_size,
                       "Ranking length, vector dimension, spans or boxes per item (task default if 0)");
  simulate->add_option("--doc-length", sim_doc_length, "Tokens per document (spans)")->capture_default_str();
  simulate->add_option("--extent", sim_extent, "Image side length (boxes)")->capture_default_str();

  std::string check_distance, check_input;
  std::vector<std::string> check_params;
  std::size_t check_samples = 200;
  double check_tolerance = 1e-9;
  std::uint64_t check_seed = 0;
  std::optional<double> check_oks_k;
  std::string check_embeddings;
  bool check_triangle = false;
  auto* check = app.add_subcommand("check-metric", "Test the distance axioms on dataset payloads");
  check->add_option("--distance", check_distance, "Distance name")->required();
  check->add_option("--input", check_input, "Dataset file (JSONL)")->required();
  check->add_option("--param", check_params, "Distance parameter key=value (repeatable)");
  check->add_option("--samples", check_samples, "Payloads drawn from the dataset")->capture_default_str();
  check->add_option("--tolerance", check_tolerance, "Numeric tolerance")->capture_default_str();
  check->add_option("--seed", check_seed, "Seed for drawing payloads")->capture_default_str();
  check->add_option("--oks-k", check_oks_k, "Per-point OKS constant for keypoints without k");
  check->add_option("--embeddings", check_embeddings, "Token embedding table (JSONL)");
  check->add_flag("--triangle", check_triangle, "Check the triangle inequality for dissimilarities too");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::Success& e) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      const auto* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
      err << "error: " << e.what() << "\n\n" << failed->help();
      return kExitUsage;
    }

    if (compute->parsed()) {
      const auto opt = compute_args.options();
      const Dataset ds = compute_args.load();
      const auto ctx = compute_args.context(ds);
      const auto report = cli::run_pipeline(ds, ctx, compute_distance, cli::parse_params(compute_args.params), opt);
      cli::print_table(out, {report});
      cli::print_details(out, report);
      if (!compute_out.empty()) cli::write_text(compute_out, report_to_json(report).dump(2) + "\n");
      return kExitOk;
    }

    if (compare->parsed()) {
      const auto opt = compare_args.options();
      const Dataset ds = compare_args.load();
      const auto ctx = compare_args.context(ds);
      std::vector<AgreementReport> reports;
      for (const auto& item : compare_distances) {
        auto [name, params] = cli::parse_distance_item(item);
        reports.push_back(cli::run_pipeline(ds, ctx, name, std::move(params), opt));
      }
      std::stable_sort(reports.begin(), reports.end(), [](const AgreementReport& a, const AgreementReport& b) {
        if (a.ks.measure != b.ks.measure) return a.ks.measure > b.ks.measure;
        if (a.sigma != b.sigma) return a.sigma > b.sigma;
        return cli::label(a.distance) < cli::label(b.distance);
      });
      cli::print_table(out, reports);
      if (!compare_out.empty()) {
        json j = {{"reports", json::array()}, {"ranking", json::array()}};
        for (const auto& r : reports) {
          j["reports"].push_back(report_to_json(r));
          j["ranking"].push_back(cli::label(r.distance));
        }
        cli::write_text(compare_out, j.dump(2) + "\n");
      }
      return kExitOk;
    }

    if (hist->parsed()) {
      const auto opt = hist_args.options();
      const Dataset ds = hist_args.load();
      const auto ctx = hist_args.context(ds);
      const auto report = cli::run_pipeline(ds, ctx, hist_distance, cli::parse_params(hist_args.params), opt);
      std::ostringstream csv;
      write_histogram_csv(csv, report);
      cli::write_text(hist_out, csv.str());
      out << "wrote " << report.observed_histogram.counts.size() << " bins per series to " << hist_out << '\n';
      return kExitOk;
    }

    if (simulate->parsed()) {
      const auto task = parse_noise_task(sim_task);
      if (!task) throw UsageError("unknown task '" + sim_task + "' (available: ranking, vector, spans, boxes)");
      NoiseSpec spec;
      spec.task = *task;
      spec.level = sim_noise;
      spec.n_annotators = sim_annotators;
      spec.seed = sim_seed;
      spec.image_extent = sim_extent;
      spec.doc_length = sim_doc_length;
      if (sim_items < 2) throw UsageError("--items must be at least 2");
      GoldShape shape;
      if (sim_size > 0) {
        shape.ranking_size = shape.vector_dim = shape.spans_per_item = shape.boxes_per_item = sim_size;
      }
      const Dataset ds = generate_cst_dataset(random_gold(spec, sim_items, shape), spec);
      std::ostringstream text;
      write_dataset(text, ds);
      cli::write_text(sim_out, text.str());
      out << "wrote " << ds.records.size() << " annotations (" << sim_items << " items x " << sim_annotators
          << " annotators, " << sim_task << ", noise " << sim_noise << ") to " << sim_out << '\n';
      return kExitOk;
    }

    if (check->parsed()) {
      ParseOptions po;
      po.oks_k_default = check_oks_k;
      const Dataset ds = load_dataset(check_input, po);
      DistanceContext ctx;
      if (ds.kind() == PayloadKind::vector) ctx.ranges = ds.meta.ranges ? *ds.meta.ranges : infer_vector_ranges(ds);
      if (!check_embeddings.empty()) ctx.embeddings = load_embeddings(check_embeddings);
      const Distance d = make_distance(DistanceSpec{check_distance, ds.kind(), cli::parse_params(check_params)}, ctx);
      if (check_samples < 1) throw UsageError("--samples must be positive");
      std::vector<std::size_t> idx(ds.records.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      Rng rng(derive_seed(check_seed, {0x63686bULL}));
      rng.shuffle(std::span<std::size_t>(idx));
      idx.resize(std::min(idx.size(), check_samples));
      std::sort(idx.begin(), idx.end());
      std::vector<LabelPayload> sample;
      for (std::size_t i : idx) sample.push_back(ds.records[i].payload);
      const auto rep = check_metric_properties(d, sample, check_tolerance,
                                               check_triangle ? std::optional<bool>(true) : std::nullopt);
      out << "distance " << cli::label(d.spec()) << " (" << (d.dissimilarity() ? "dissimilarity" : "metric")
          << "), " << rep.sample_size << " payloads, tolerance " << check_tolerance << '\n';
      out << "negative: " << rep.negative.size() << ", asymmetric: " << rep.asymmetric.size()
          << ", nonzero self-distance: " << rep.nonzero_self.size() << ", triangle: "
          << (rep.triangle_checked ? std::to_string(rep.triangle.size()) : std::string("not checked")) << '\n';
      if (!rep.triangle.empty()) {
        const auto& t = rep.triangle.front();
        out << "first triangle violation: d(" << t.i << "," << t.k << ") exceeds d(" << t.i << "," << t.j
            << ") + d(" << t.j << "," << t.k << ") by " << t.excess << '\n';
      }
      out << (rep.ok() ? "ok" : "FAILED") << '\n';
      return rep.ok() ? kExitOk : kExitCheckFailed;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}

}  // namespace iaa
