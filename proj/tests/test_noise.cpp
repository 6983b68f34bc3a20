#include <gtest/gtest.h>

#include "support.hpp"

using namespace iaa;

namespace {

constexpr NoiseTask kTasks[] = {NoiseTask::ranking, NoiseTask::vector, NoiseTask::spans, NoiseTask::boxes};

NoiseSpec spec_for(NoiseTask task, double level, std::uint64_t seed = 1) {
  NoiseSpec s;
  s.task = task;
  s.level = level;
  s.seed = seed;
  return s;
}

double sigma_for(const Dataset& ds, const char* distance, std::uint64_t seed) {
  AgreementOptions opt;
  opt.seed = seed;
  return agreement_report(ds, make_distance(distance, PayloadKind::ranking), opt).sigma;
}

}  // namespace

TEST(Noise, ZeroLevelIsIdentity) {
  for (auto task : kTasks) {
    const auto spec = spec_for(task, 0.0);
    for (const auto& [item, label] : random_gold(spec, 5)) {
      Rng rng(3);
      EXPECT_EQ(perturb(label, spec, rng), label) << to_string(task);
    }
  }
}

TEST(Noise, ZeroLevelDatasetHasPerfectAlpha) {
  const auto spec = spec_for(NoiseTask::ranking, 0.0);
  const auto ds = generate_cst_dataset(random_gold(spec, 20), spec);
  EXPECT_EQ(agreement_report(ds, make_distance("tau", PayloadKind::ranking)).alpha, 1.0);
}

TEST(Noise, DatasetShape) {
  for (auto task : kTasks) {
    const auto spec = spec_for(task, 0.5);
    const auto ds = generate_cst_dataset(random_gold(spec, 10), spec);
    const auto summary = validate_dataset(ds);
    EXPECT_EQ(summary.annotations, 30u);
    EXPECT_EQ(summary.items, 10u);
    EXPECT_EQ(summary.annotators, 3u);
    EXPECT_TRUE(summary.ok()) << to_string(task);
    EXPECT_EQ(summary.kind, payload_kind(task));
  }
}

TEST(Noise, Deterministic) {
  for (auto task : kTasks) {
    const auto spec = spec_for(task, 0.6, 42);
    const auto gold = random_gold(spec, 8);
    EXPECT_EQ(generate_cst_dataset(gold, spec), generate_cst_dataset(gold, spec));
    EXPECT_NE(generate_cst_dataset(gold, spec), generate_cst_dataset(gold, spec_for(task, 0.6, 43)));
  }
}

TEST(Noise, RankingSwapCount) {
  const auto spec = spec_for(NoiseTask::ranking, 0.5);
  const auto gold = std::get<Ranking>(random_gold(spec, 1)[0].second);
  ASSERT_EQ(gold.order.size(), 10u);
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const auto noisy = std::get<Ranking>(perturb(gold, spec, rng));
    // floor(0.5 * 45 / 2) = 11 inversions
    EXPECT_EQ(test::kendall_discordant(gold, noisy), 11u);
  }
}

TEST(Noise, FullLevelRankingIsUncorrelated) {
  const auto spec = spec_for(NoiseTask::ranking, 1.0);
  const auto gold = std::get<Ranking>(random_gold(spec, 1)[0].second);
  double tau = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto noisy = std::get<Ranking>(perturb(gold, spec, rng));
    tau += 1 - 2 * test::kendall_distance_definition(gold, noisy);
  }
  EXPECT_NEAR(tau / 1000, 0.0, 0.05);
}

TEST(Noise, PerturbedLabelsStayValid) {
  for (auto task : {NoiseTask::vector, NoiseTask::spans, NoiseTask::boxes}) {
    for (double level : {0.3, 1.0}) {
      auto spec = spec_for(task, level);
      spec.ranges = {Range{0, 1}, Range{-5, 5}, Range{10, 20}};
      Rng rng(11);
      for (const auto& [item, label] : random_gold(spec, 50)) {
        const auto noisy = perturb(label, spec, rng);
        if (task == NoiseTask::vector) {
          const auto& v = std::get<NumericVector>(noisy).values;
          for (std::size_t d = 0; d < v.size(); ++d) {
            EXPECT_GE(v[d], spec.ranges[d].min);
            EXPECT_LE(v[d], spec.ranges[d].max);
          }
        } else if (task == NoiseTask::spans) {
          const auto& spans = std::get<SpanSet>(noisy).spans;
          EXPECT_TRUE(std::is_sorted(spans.begin(), spans.end()));
          for (const auto& s : spans) {
            EXPECT_LT(s.start, s.end);
            EXPECT_LE(s.end, spec.doc_length);
            EXPECT_NE(std::find(spec.tags.begin(), spec.tags.end(), s.tag), spec.tags.end());
          }
        } else {
          for (const auto& b : std::get<BoxSet>(noisy).boxes) {
            EXPECT_TRUE(b.valid());
            EXPECT_GE(b.x0, 0.0);
            EXPECT_LE(b.x1, spec.image_extent);
          }
        }
      }
    }
  }
}

TEST(Noise, SigmaDecreasesWithLevel) {
  double prev = 2;
  for (double level : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto spec = spec_for(NoiseTask::ranking, level, seed);
      sum += sigma_for(generate_cst_dataset(random_gold(spec, 50), spec), "tau", seed);
    }
    EXPECT_LE(sum / 5, prev) << level;
    prev = sum / 5;
  }
}

TEST(Noise, SeedStability) {
  const auto s1 = spec_for(NoiseTask::ranking, 0.5, 100), s2 = spec_for(NoiseTask::ranking, 0.5, 200);
  const auto d1 = generate_cst_dataset(random_gold(s1, 100), s1);
  const auto d2 = generate_cst_dataset(random_gold(s2, 100), s2);
  EXPECT_NE(d1, d2);
  EXPECT_NEAR(sigma_for(d1, "tau", 1), sigma_for(d2, "tau", 2), 0.1);
}

TEST(Noise, ShuffleKeepsPayloadMultiset) {
  const auto spec = spec_for(NoiseTask::vector, 0.2);
  const auto ds = generate_cst_dataset(random_gold(spec, 30), spec);
  const auto shuffled = shuffle_labels_across_items(ds, 9);
  ASSERT_EQ(shuffled.records.size(), ds.records.size());
  std::vector<std::vector<double>> a, b;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    EXPECT_EQ(shuffled.records[i].item_id, ds.records[i].item_id);
    EXPECT_EQ(shuffled.records[i].annotator_id, ds.records[i].annotator_id);
    a.push_back(std::get<NumericVector>(ds.records[i].payload).values);
    b.push_back(std::get<NumericVector>(shuffled.records[i].payload).values);
  }
  EXPECT_NE(a, b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Noise, Errors) {
  auto spec = spec_for(NoiseTask::ranking, 0.5);
  Rng rng(1);
  EXPECT_THROW(perturb(test::scalar(1), spec, rng), ValidationError);
  spec.level = 1.5;
  EXPECT_THROW(check_noise_spec(spec), UsageError);
  spec.level = 0.5;
  spec.n_annotators = 1;
  EXPECT_THROW(check_noise_spec(spec), UsageError);
  EXPECT_THROW(generate_cst_dataset({}, spec_for(NoiseTask::ranking, 0.5)), UsageError);
  EXPECT_EQ(parse_noise_task("spans"), NoiseTask::spans);
  EXPECT_FALSE(parse_noise_task("trees").has_value());
}

TEST(Noise, PaddedIds) {
  EXPECT_EQ(padded_id("item", 7, 100), "item007");
  EXPECT_EQ(padded_id("a", 2, 3), "a2");
  EXPECT_EQ(padded_id("a", 9, 10), "a09");
}
