#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "serkit/eval.hpp"
#include "serkit/pqpso.hpp"

using namespace serkit;
using namespace serkit::eval;

TEST(Loso, OneFoldPerSpeakerPartitioningRows) {
  std::vector<std::string> spk;
  for (int i = 0; i < 57; ++i) spk.push_back("s" + std::to_string(i % 10));
  const auto folds = loso_folds(spk);
  ASSERT_EQ(folds.size(), 10u);
  std::vector<int> seen(spk.size(), 0);
  for (const auto& f : folds) {
    EXPECT_EQ(f.train.size() + f.test.size(), spk.size());
    for (auto i : f.test) {
      ++seen[i];
      EXPECT_EQ(spk[i], f.speaker);
    }
    for (auto i : f.train) EXPECT_NE(spk[i], f.speaker);
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST(Loso, TwoSpeakerSizesAndSingleSpeakerError) {
  const auto folds = loso_folds({"a", "b", "a", "b", "a"});
  ASSERT_EQ(folds.size(), 2u);
  EXPECT_EQ(folds[0].test.size(), 3u);
  EXPECT_EQ(folds[1].test.size(), 2u);
  try {
    loso_folds({"a", "a"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadManifest);
  }
}

TEST(Metrics, WorkedExamples) {
  auto perfect = compute_metrics({0, 1, 2, 1}, {0, 1, 2, 1}, 3);
  EXPECT_EQ(perfect.war, 1.0);
  EXPECT_EQ(perfect.uar, 1.0);
  EXPECT_EQ(perfect.gmean, 1.0);
  const auto r = compute_metrics({0, 0, 0, 1}, {0, 0, 0, 0}, 2);
  EXPECT_DOUBLE_EQ(r.war, 0.75);
  EXPECT_DOUBLE_EQ(r.uar, 0.5);
  EXPECT_EQ(r.gmean, 0.0);
  std::vector<int> truth(100, 0), pred(100, 0);
  for (int i = 0; i < 10; ++i) truth[static_cast<std::size_t>(i)] = 1;
  pred[50] = 1;  // majority recall 0.99-ish, minority recall 0
  EXPECT_EQ(compute_metrics(truth, pred, 2).gmean, 0.0);
  EXPECT_THROW(compute_metrics({0}, {0, 1}, 2), Error);
}

TEST(Metrics, AbsentClassExcludedWithWarning) {
  const auto r = compute_metrics({0, 0, 2}, {0, 1, 2}, 3);
  EXPECT_TRUE(std::isnan(r.recalls[1]));
  EXPECT_DOUBLE_EQ(r.uar, 0.75);
  EXPECT_NEAR(r.gmean, std::sqrt(0.5), 1e-15);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Metrics, InvariantsOnRandomPredictions) {
  rng::Engine eng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(eng() % 5);
    const std::size_t n = 20 + eng() % 200;
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(eng() % static_cast<std::uint64_t>(m));
      p[i] = eng() % 3 == 0 ? static_cast<int>(eng() % static_cast<std::uint64_t>(m)) : t[i];
    }
    const auto r = compute_metrics(t, p, m);
    double weighted = 0.0, top = 0.0;
    for (int c = 0; c < m; ++c) {
      const double count = static_cast<double>(std::count(t.begin(), t.end(), c));
      EXPECT_EQ(r.confusion.row(c).sum(), count);
      if (count > 0) {
        weighted += count / static_cast<double>(n) * r.recalls[static_cast<std::size_t>(c)];
        top = std::max(top, r.recalls[static_cast<std::size_t>(c)]);
      }
    }
    EXPECT_GE(r.confusion.minCoeff(), 0.0);
    EXPECT_NEAR(r.war, weighted, 1e-12);
    EXPECT_LE(r.gmean, r.uar + 1e-15);
    EXPECT_LE(r.uar, top + 1e-15);
  }
}

TEST(ImbalanceRatio, CorpusConstants) {
  EXPECT_NEAR(imbalance_ratio({127, 46, 69, 71, 62, 81, 79}), 0.3622, 5e-5);
  EXPECT_NEAR(imbalance_ratio({120, 60, 60, 60, 60, 60, 60}), 0.5, 5e-5);
  EXPECT_NEAR(imbalance_ratio({1103, 1636, 1084, 1708}), 0.6347, 5e-5);
  EXPECT_DOUBLE_EQ(imbalance_ratio({100, 10}), 0.1);
  EXPECT_EQ(imbalance_ratio({5, 5, 5}), 1.0);
  EXPECT_LT(imbalance_ratio({5, 6, 5}), 1.0);
  try {
    imbalance_ratio({3, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
  }
}

TEST(PairError, DirectionalRatio) {
  Matrix conf(3, 3);
  conf << 5, 2, 0, 1, 4, 0, 0, 0, 0;
  EXPECT_DOUBLE_EQ(correlated_pair_error(conf, 0, 1), 0.5);
  EXPECT_DOUBLE_EQ(correlated_pair_error(conf, 1, 0), 0.2);
  try {
    correlated_pair_error(conf, 0, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Undefined);
  }
  const Matrix diag = Matrix::Identity(3, 3) * 4;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) EXPECT_EQ(correlated_pair_error(diag, a, b), 0.0);
  const auto r = compute_metrics({0, 0, 1}, {0, 1, 1}, 3);
  EXPECT_FALSE(r.per_pair_errors.at({0, 2}).has_value());
  EXPECT_DOUBLE_EQ(*r.per_pair_errors.at({0, 1}), 1.0);
}

TEST(Synth, PresetShapeAndSpeakers) {
  auto cfg = synth_preset("imbalanced10to1");
  cfg.seed = 3;
  const auto fm = synth_imbalanced(cfg);
  EXPECT_EQ(fm.samples(), 220);
  EXPECT_EQ(fm.dims(), 10);
  const std::set<std::string> spk(fm.speakers.begin(), fm.speakers.end());
  EXPECT_EQ(spk.size(), 10u);
  EXPECT_DOUBLE_EQ(imbalance_ratio(class_counts(fm.labels, 2)), 0.1);
  EXPECT_EQ(synth_imbalanced(cfg).X, fm.X);
  EXPECT_THROW(synth_preset("nope"), Error);
}

TEST(Synth, SeparationControlsDifficulty) {
  SynthConfig far;
  far.counts = {100, 100, 100};
  far.separation = 12.0;
  far.seed = 1;
  auto train = synth_imbalanced(far);
  far.seed = 2;
  auto test = synth_imbalanced(far);
  const pqpso::NearestCentroid nc(train.X, train.labels, 3);
  EXPECT_GE(compute_metrics(test.labels, nc.predict(test.X), 3).war, 0.99);

  // Indistinguishable classes: mean UAR across seeds stays near chance.
  std::vector<double> uars;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SynthConfig flat;
    flat.counts = {60, 60};
    flat.separation = 0.0;
    flat.seed = 2 * s;
    const auto a = synth_imbalanced(flat);
    flat.seed = 2 * s + 1;
    const auto b = synth_imbalanced(flat);
    const pqpso::NearestCentroid chance(a.X, a.labels, 2);
    uars.push_back(compute_metrics(b.labels, chance.predict(b.X), 2).uar);
  }
  double mean = 0, var = 0;
  for (double u : uars) mean += u / uars.size();
  for (double u : uars) var += (u - mean) * (u - mean) / (uars.size() - 1);
  EXPECT_NEAR(mean, 0.5, 3 * std::sqrt(var / uars.size()) + 1e-9);
}
