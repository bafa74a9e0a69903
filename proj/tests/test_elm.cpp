#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "serkit/elm.hpp"
#include "serkit/eval.hpp"

using namespace serkit;
using namespace serkit::elm;

namespace {

std::vector<int> labels_from_counts(const std::vector<std::size_t>& counts) {
  std::vector<int> out;
  for (std::size_t c = 0; c < counts.size(); ++c) out.insert(out.end(), counts[c], static_cast<int>(c));
  return out;
}

double rel_err(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

Matrix random_matrix(rng::Engine& eng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng::normal(eng);
  return m;
}

}  // namespace

TEST(Weights, WorkedExamples) {
  auto w = [](std::vector<std::size_t> counts, SchemeKind k) { return class_weights(counts, {k, 2.0}); };
  const auto w1 = w({2, 1}, SchemeKind::W1);
  EXPECT_NEAR(w1[0], 0.5, 1e-12);
  EXPECT_NEAR(w1[1], 1.0, 1e-12);
  const auto w2 = w({4, 1}, SchemeKind::W2);
  EXPECT_NEAR(w2[0], 0.1545, 1e-12);
  EXPECT_NEAR(w2[1], 1.0, 1e-12);
  const auto w3 = w({4, 1}, SchemeKind::W3);
  EXPECT_NEAR(w3[0], 0.25, 1e-12);
  EXPECT_NEAR(w3[1], 0.5, 1e-12);
  const auto w4 = w({3, 1}, SchemeKind::W4);
  EXPECT_NEAR(w4[0], 0.25, 1e-12);
  EXPECT_NEAR(w4[1], 0.75, 1e-12);
  const auto wp = w({3, 1}, SchemeKind::proposed);
  EXPECT_NEAR(wp[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(wp[1], 3.0 / 7.0, 1e-12);
}

TEST(Weights, BalancedCountsAreUniform) {
  for (auto k : {SchemeKind::W1, SchemeKind::W2, SchemeKind::W3, SchemeKind::W4, SchemeKind::proposed}) {
    const auto w = class_weights({7, 7, 7}, {k, 2.0});
    EXPECT_NEAR(w[0], w[1], 1e-15);
    EXPECT_NEAR(w[1], w[2], 1e-15);
  }
}

TEST(Weights, RatiosAreScaleFree) {
  const std::vector<std::size_t> base{127, 46, 69, 71, 62, 81, 79};
  for (auto k : {SchemeKind::W3, SchemeKind::W4, SchemeKind::proposed}) {
    const auto a = class_weights(base, {k, 2.0});
    for (std::size_t f : {2u, 5u}) {
      std::vector<std::size_t> scaled;
      for (auto n : base) scaled.push_back(n * f);
      const auto b = class_weights(scaled, {k, 2.0});
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i] / a[0], b[i] / b[0], 1e-12);
    }
  }
}

TEST(Weights, LargerClassesNeverWeighMore) {
  rng::Engine eng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + eng() % 6;
    std::vector<std::size_t> counts(m);
    for (auto& n : counts) n = 1 + eng() % 200;
    for (auto k : {SchemeKind::W1, SchemeKind::W2, SchemeKind::W3, SchemeKind::W4, SchemeKind::proposed}) {
      if (k == SchemeKind::proposed && m > 2) continue;  // only ordered for two classes
      const auto w = class_weights(counts, {k, 2.0});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          EXPECT_GT(w[i], 0.0);
          if (counts[i] >= counts[j]) EXPECT_LE(w[i], w[j] * (1 + 1e-12));
        }
    }
  }
}

TEST(Weights, ProposedGivesMajorityTheW1Weight) {
  const auto p = class_weights({200, 20}, {SchemeKind::proposed, 2.0});
  EXPECT_NEAR(p[0], 1.0 / 200.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 182.0, 1e-15);
}

TEST(Weights, ExpandedPerSampleAndErrors) {
  const auto w = make_weights({0, 1, 0}, 2, {SchemeKind::W1, 2.0});
  EXPECT_EQ(w(0), 0.5);
  EXPECT_EQ(w(1), 1.0);
  try {
    class_weights({3, 0}, {SchemeKind::W1, 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
  }
  EXPECT_EQ(parse_scheme("Proposed"), SchemeKind::proposed);
  EXPECT_EQ(parse_scheme("unweighted"), SchemeKind::none);
  EXPECT_THROW(parse_scheme("W9"), Error);
}

TEST(Solve, BranchesAgree) {
  rng::Engine eng(21);
  for (auto [n, l] : {std::pair{30, 50}, std::pair{50, 30}}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix H = random_matrix(eng, n, l), T = random_matrix(eng, n, 3);
      Vector w(n);
      for (int i = 0; i < n; ++i) w(i) = rng::uniform(eng, 0.1, 2.0);
      for (const Vector& wt : {Vector(), w}) {
        const Matrix p = solve_output_weights(H, T, wt, 8.0, Branch::primal);
        const Matrix d = solve_output_weights(H, T, wt, 8.0, Branch::dual);
        EXPECT_LT(rel_err(p, d), 1e-8);
      }
    }
  }
}

TEST(Solve, UnitWeightsReduceToUnweighted) {
  rng::Engine eng(2);
  const Matrix H = random_matrix(eng, 40, 12), T = random_matrix(eng, 40, 2);
  EXPECT_LT(rel_err(solve_output_weights(H, T, Vector::Ones(40), 3.0), solve_output_weights(H, T, Vector(), 3.0)),
            1e-10);
}

TEST(Solve, ZeroesObjectiveGradient) {
  rng::Engine eng(12);
  const Matrix H = random_matrix(eng, 25, 8), T = random_matrix(eng, 25, 3);
  Vector w(25);
  for (int i = 0; i < 25; ++i) w(i) = rng::uniform(eng, 0.2, 3.0);
  const double C = 5.0;
  const Matrix beta = solve_output_weights(H, T, w, C);
  // objective 0.5 |beta|^2 + 0.5 C sum w_i |h_i beta - t_i|^2
  auto objective = [&](const Matrix& b) {
    return 0.5 * b.squaredNorm() + 0.5 * C * (w.asDiagonal() * (H * b - T).rowwise().squaredNorm()).sum();
  };
  const Matrix grad = beta + C * H.transpose() * w.asDiagonal() * (H * beta - T);
  EXPECT_LE(grad.norm(), 1e-6 * beta.norm());
  const double h = 1e-5;
  for (int k = 0; k < 5; ++k) {
    Matrix e = Matrix::Zero(8, 3);
    e(k, k % 3) = h;
    EXPECT_NEAR((objective(beta + e) - objective(beta - e)) / (2 * h), 0.0, 1e-5);
  }
}

TEST(Solve, RejectsBadArguments) {
  const Matrix H = Matrix::Ones(3, 2), T = Matrix::Ones(3, 1);
  EXPECT_THROW(solve_output_weights(H, T, Vector(), 0.0), Error);
  EXPECT_THROW(solve_output_weights(H, Matrix::Ones(2, 1), Vector(), 1.0), Error);
  EXPECT_THROW(solve_output_weights(H, T, Vector::Zero(3), 1.0), Error);
}

TEST(SingleLayer, InterpolatesAtLargeC) {
  rng::Engine eng(5);
  const Matrix X = random_matrix(eng, 40, 6);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(eng() % 3);
  ElmConfig cfg;
  cfg.hidden = 40;
  cfg.C = 1e12;
  cfg.seed = 3;
  const auto model = elm_train(X, y, 3, cfg);
  EXPECT_LT((model.hidden(X) * model.beta - one_hot(y, 3)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(predict(model, X).labels, y);
  EXPECT_THROW(predict(model, Matrix::Zero(2, 5)), Error);
}

TEST(SingleLayer, DeterministicAndBranchConsistent) {
  const auto fm = eval::two_moons(60, 0.1, 1);
  ElmConfig cfg;
  cfg.hidden = 80;
  cfg.seed = 11;
  const WeightScheme w{SchemeKind::W1, 2.0};
  const auto a = elm_train(fm.X, fm.labels, 2, cfg, w, Branch::primal);
  const auto b = elm_train(fm.X, fm.labels, 2, cfg, w, Branch::dual);
  EXPECT_EQ(a.input_weights, b.input_weights);
  EXPECT_LT(rel_err(a.beta, b.beta), 1e-8);
  EXPECT_EQ(b.solve.used, Branch::dual);
}

TEST(Fista, MatchesLeastSquaresAtZeroLambda) {
  rng::Engine eng(7);
  const Matrix A = random_matrix(eng, 20, 10), G = random_matrix(eng, 20, 4);
  FistaOptions opt;
  opt.lambda = 0.0;
  opt.iterations = 5000;
  const auto res = fista_lasso(A, G, opt);
  const Matrix direct = (A.transpose() * A).ldlt().solve(A.transpose() * G);
  EXPECT_NEAR((A * res.alpha - G).norm(), (A * direct - G).norm(), 1e-6);
}

TEST(Fista, ObjectiveNeverIncreases) {
  rng::Engine eng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix A = random_matrix(eng, 30, 15), G = random_matrix(eng, 30, 6);
    FistaOptions opt;
    opt.lambda = 0.05 * trial;
    opt.iterations = 100;
    const auto res = fista_lasso(A, G, opt);
    ASSERT_EQ(res.objective.size(), 101u);
    for (std::size_t i = 1; i < res.objective.size(); ++i) EXPECT_LE(res.objective[i], res.objective[i - 1]);
  }
}

TEST(Fista, PowerIterationFindsTopEigenvalue) {
  Matrix S = Matrix::Zero(4, 4);
  S.diagonal() << 1, 9, 3, 2;
  EXPECT_NEAR(power_iteration(S, 200, 1), 9.0, 1e-8);
}

TEST(Helm, ProjectionIsOrthonormalInBothShapes) {
  rng::Engine eng(3);
  const Matrix tall = orthonormal_projection(rng::uniform_matrix(eng, 60, 20));
  EXPECT_LT((tall.transpose() * tall - Matrix::Identity(20, 20)).norm(), 1e-10);
  const Matrix wide = orthonormal_projection(rng::uniform_matrix(eng, 20, 60));
  EXPECT_EQ(wide.rows(), 20);
  EXPECT_LT((wide * wide.transpose() - Matrix::Identity(20, 20)).norm(), 1e-10);
  EXPECT_FALSE(full_rank(Matrix::Ones(4, 3)));
}

namespace {

HelmConfig small_config() {
  HelmConfig cfg;
  cfg.sparse_sizes = {20, 20};
  cfg.proj_size = 60;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(Helm, TwoMoonsAndModelInvariants) {
  const auto train = eval::two_moons(1000, 0.15, 1);
  const auto test = eval::two_moons(1000, 0.15, 2);
  HelmConfig cfg;
  cfg.seed = 9;
  const auto model = helm_train(train.X, train.labels, 2, cfg);
  EXPECT_LT(model.projection_residual(), 1e-10);
  EXPECT_EQ(model.sparse_layers.size(), 2u);
  EXPECT_EQ(model.output.rows(), 501);
  const auto pred = predict(model, test.X);
  const double acc = eval::compute_metrics(test.labels, pred.labels, 2).war;
  EXPECT_GE(acc, 0.95);
  for (const auto& obj : model.fista_objectives)
    for (std::size_t i = 1; i < obj.size(); ++i) EXPECT_LE(obj[i], obj[i - 1]);
}

TEST(Helm, DeterministicForSeed) {
  const auto fm = eval::two_moons(200, 0.2, 3);
  const auto a = helm_train(fm.X, fm.labels, 2, small_config(), {SchemeKind::W2, 2.0});
  const auto b = helm_train(fm.X, fm.labels, 2, small_config(), {SchemeKind::W2, 2.0});
  EXPECT_EQ(a.projection, b.projection);
  EXPECT_EQ(a.output, b.output);
  for (std::size_t i = 0; i < a.sparse_layers.size(); ++i) EXPECT_EQ(a.sparse_layers[i], b.sparse_layers[i]);
}

TEST(Helm, RowPermutationPermutesPredictions) {
  const auto fm = eval::two_moons(150, 0.2, 4);
  const auto model = helm_train(fm.X, fm.labels, 2, small_config());
  std::vector<Eigen::Index> perm(150);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  Matrix Xp(150, 2);
  for (Eigen::Index i = 0; i < 150; ++i) Xp.row(i) = fm.X.row(perm[static_cast<std::size_t>(i)]);
  const auto p = predict(model, fm.X);
  const auto q = predict(model, Xp);
  for (Eigen::Index i = 0; i < 150; ++i) {
    EXPECT_EQ(q.labels[static_cast<std::size_t>(i)], p.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    EXPECT_LT((q.scores.row(i) - p.scores.row(perm[static_cast<std::size_t>(i)])).norm(), 1e-12);
  }
}

TEST(Helm, JsonRoundTripPreservesPredictions) {
  const auto fm = eval::two_moons(120, 0.2, 6);
  auto model = helm_train(fm.X, fm.labels, 2, small_config(), {SchemeKind::proposed, 2.0});
  model.class_names = {"upper", "lower"};
  const auto j = to_json(model);
  EXPECT_EQ(j.at("format_version"), kModelFormatVersion);
  const auto back = model_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.class_names, model.class_names);
  EXPECT_EQ(predict(back, fm.X).scores, predict(model, fm.X).scores);
  auto broken = j;
  broken["output"] = nlohmann::json::array({nlohmann::json::array({1.0})});
  EXPECT_THROW(model_from_json(broken), Error);
}

TEST(Helm, RejectsMismatchAndEmptyClass) {
  const auto fm = eval::two_moons(80, 0.2, 7);
  const auto model = helm_train(fm.X, fm.labels, 2, small_config());
  try {
    predict(model, Matrix::Zero(3, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadInput);
  }
  try {
    helm_train(fm.X, fm.labels, 3, small_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
  }
}
