// Scores one dataset under every registered distance for its kind.
//   basic_usage samples/data/rankings.jsonl

#include <cstdio>
#include <exception>

#include "iaa/iaa.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <dataset.jsonl>\n", argv[0]);
    return 2;
  }
  try {
    const iaa::Dataset ds = iaa::load_dataset(argv[1]);
    iaa::DistanceContext ctx;
    if (ds.kind() == iaa::PayloadKind::vector) ctx.ranges = ds.meta.ranges ? *ds.meta.ranges : iaa::infer_vector_ranges(ds);

    iaa::AgreementOptions opt;
    opt.seed = 1;
    std::printf("%-14s %8s %8s %10s\n", "distance", "alpha", "sigma", "ks");
    for (const auto& e : iaa::registry_entries()) {
      if (e.kind != ds.kind() || e.name == "embedding_f1") continue;
      iaa::AgreementReport report;
      try {
        report = iaa::agreement_report(ds, iaa::make_distance(e.name, e.kind, {}, ctx), opt);
      } catch (const iaa::NumericError& err) {
        std::printf("%-14s %s\n", e.name.c_str(), err.what());
        continue;
      }
      std::printf("%-14s %8.4f %8.4f %10.6f", e.name.c_str(), report.alpha, report.sigma, report.ks.measure);
      for (const auto& flag : report.diagnostics.flags()) std::printf("  %s", flag.c_str());
      std::printf("\n");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
