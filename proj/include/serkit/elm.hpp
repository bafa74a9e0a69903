#pragma once

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "serkit/types.hpp"

namespace serkit::elm {

// Sample weighting ------------------------------------------------------------

enum class SchemeKind { none, W1, W2, W3, W4, proposed };

struct WeightScheme {
  SchemeKind kind = SchemeKind::none;
  double d = 2.0;  // decaying parameter of W3
};

inline std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::none: return "none";
    case SchemeKind::W1: return "W1";
    case SchemeKind::W2: return "W2";
    case SchemeKind::W3: return "W3";
    case SchemeKind::W4: return "W4";
    case SchemeKind::proposed: return "proposed";
  }
  return "none";
}

inline SchemeKind parse_scheme(const std::string& s) {
  auto lower = [](std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return v;
  };
  const std::string key = lower(s);
  for (auto k : {SchemeKind::none, SchemeKind::W1, SchemeKind::W2, SchemeKind::W3, SchemeKind::W4,
                 SchemeKind::proposed})
    if (key == lower(to_string(k))) return k;
  if (key == "unweighted") return SchemeKind::none;
  throw Error(ErrorKind::BadConfig, "unknown weighting scheme '" + s + "'");
}

/// Per-class weight for the given class counts (all counts must be > 0).
inline std::vector<double> class_weights(const std::vector<std::size_t>& counts, const WeightScheme& scheme) {
  require(!counts.empty(), ErrorKind::EmptyClass, "no classes");
  for (std::size_t c = 0; c < counts.size(); ++c)
    require(counts[c] > 0, ErrorKind::EmptyClass, "class " + std::to_string(c) + " has no samples");
  const auto m = counts.size();
  double total = 0.0, largest = 0.0;
  for (auto n : counts) {
    total += static_cast<double>(n);
    largest = std::max(largest, static_cast<double>(n));
  }
  std::vector<double> w(m, 1.0);
  switch (scheme.kind) {
    case SchemeKind::none: break;
    case SchemeKind::W1:
      for (std::size_t c = 0; c < m; ++c) w[c] = 1.0 / static_cast<double>(counts[c]);
      break;
    case SchemeKind::W2: {
      const double avg = total / static_cast<double>(m);
      for (std::size_t c = 0; c < m; ++c) {
        const double n = static_cast<double>(counts[c]);
        w[c] = (n > avg ? 0.618 : 1.0) / n;
      }
      break;
    }
    case SchemeKind::W3:
      require(scheme.d >= 1.0, ErrorKind::BadConfig, "W3 decaying parameter d must be >= 1");
      for (std::size_t c = 0; c < m; ++c) {
        const double n = static_cast<double>(counts[c]);
        w[c] = std::pow(n / largest, 1.0 / scheme.d) / n;
      }
      break;
    case SchemeKind::W4: {
      // rank r(c) in the ascending order of counts; tied classes share the
      // lowest rank of their group
      std::vector<std::size_t> sorted = counts;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t c = 0; c < m; ++c) {
        const auto rank = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), counts[c]) -
                                                   sorted.begin()) + 1;
        w[c] = static_cast<double>(sorted[m - rank]) / total;
      }
      break;
    }
    case SchemeKind::proposed:
      for (std::size_t c = 0; c < m; ++c) {
        const double n = static_cast<double>(counts[c]);
        const double p = total - n;
        w[c] = 1.0 / (p + (n - p) * n / largest);
      }
      break;
  }
  return w;
}

/// Diagonal of the N x N sample-weight matrix.
inline Vector make_weights(const std::vector<int>& labels, int num_classes, const WeightScheme& scheme) {
  const auto w = class_weights(class_counts(labels, num_classes), scheme);
  Vector out(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) out(static_cast<Eigen::Index>(i)) = w[static_cast<std::size_t>(labels[i])];
  return out;
}

// Closed-form output layer ---------------------------------------------------------

enum class Branch { automatic, primal, dual };

struct SolveInfo {
  Branch used = Branch::primal;
  bool fallback = false;
  std::string diagnostics;
};

/// Weighted Tikhonov output weights.
///   primal (N >= L): (I/C + H'WH)^-1 H'WT
///   dual   (N <  L): H'W (I/C + HH'W)^-1 T, solved as H' (W^-1/C + HH')^-1 T
/// An empty weight vector means W = I. A failed Cholesky factorization falls
/// back to a complete orthogonal decomposition.
inline Matrix solve_output_weights(const Matrix& H, const Matrix& T, const Vector& weights, double C,
                                   Branch branch = Branch::automatic, SolveInfo* info = nullptr) {
  require(C > 0.0, ErrorKind::BadConfig, "regularization C must be positive");
  require(H.rows() == T.rows(), ErrorKind::BadInput, "H and T row counts differ");
  const bool weighted = weights.size() > 0;
  if (weighted) {
    require(weights.size() == H.rows(), ErrorKind::BadInput, "weight vector length differs from N");
    require((weights.array() > 0.0).all(), ErrorKind::BadInput, "weights must be positive");
  }
  if (branch == Branch::automatic) branch = H.rows() < H.cols() ? Branch::dual : Branch::primal;
  SolveInfo local;
  local.used = branch;
  Matrix beta;
  if (branch == Branch::primal) {
    const Matrix HtW = weighted ? Matrix(H.transpose() * weights.asDiagonal()) : Matrix(H.transpose());
    Matrix A = HtW * H;
    A.diagonal().array() += 1.0 / C;
    const Matrix rhs = HtW * T;
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() == Eigen::Success) {
      beta = llt.solve(rhs);
    } else {
      local.fallback = true;
      local.diagnostics = "primal system not positive definite; used pseudo-inverse";
      beta = A.completeOrthogonalDecomposition().solve(rhs);
    }
  } else {
    Matrix A = H * H.transpose();
    if (weighted)
      A.diagonal().array() += weights.array().inverse() / C;
    else
      A.diagonal().array() += 1.0 / C;
    Eigen::LLT<Matrix> llt(A);
    Matrix z;
    if (llt.info() == Eigen::Success) {
      z = llt.solve(T);
    } else {
      local.fallback = true;
      local.diagnostics = "dual system not positive definite; used pseudo-inverse";
      z = A.completeOrthogonalDecomposition().solve(T);
    }
    beta = H.transpose() * z;
  }
  require(beta.allFinite(), ErrorKind::AbortWithDiagnostics, "output weights are not finite");
  if (info) *info = local;
  return beta;
}

inline Matrix one_hot(const std::vector<int>& labels, int num_classes) {
  Matrix T = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < num_classes, ErrorKind::BadInput, "label out of range");
    T(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return T;
}

inline Matrix with_bias(const Matrix& H) {
  Matrix G(H.rows(), H.cols() + 1);
  G << H, Matrix::Ones(H.rows(), 1);
  return G;
}

struct Prediction {
  std::vector<int> labels;
  Matrix scores;  // [N x M]
};

/// Row-wise argmax; ties go to the lowest class id.
inline std::vector<int> argmax_rows(const Matrix& Y) {
  std::vector<int> out(static_cast<std::size_t>(Y.rows()));
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < Y.cols(); ++c)
      if (Y(i, c) > Y(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

/// Per-feature affine map applied before the first layer (identity unless
/// enabled).
struct Standardizer {
  RowVector mean, scale;

  static Standardizer fit(const Matrix& X, bool enabled) {
    Standardizer s;
    s.mean = RowVector::Zero(X.cols());
    s.scale = RowVector::Ones(X.cols());
    if (!enabled || X.rows() < 2) return s;
    s.mean = X.colwise().mean();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double sd = std::sqrt((X.col(j).array() - s.mean(j)).square().sum() / static_cast<double>(X.rows() - 1));
      s.scale(j) = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
    return s;
  }

  Matrix apply(const Matrix& X) const {
    return ((X.rowwise() - mean).array().rowwise() * scale.array()).matrix();
  }
};

// Single hidden layer ELM ------------------------------------------------------------

struct ElmConfig {
  int hidden = 500;
  double C = 1024.0;
  std::uint64_t seed = 0;
  bool standardize = false;
};

struct SingleLayerModel {
  ElmConfig config;
  WeightScheme scheme;
  Standardizer input;
  Matrix input_weights;  // [D x L]
  RowVector bias;        // [L]
  Matrix beta;           // [L x M]
  std::vector<std::string> class_names;
  SolveInfo solve;

  Matrix hidden(const Matrix& X) const {
    return ((input.apply(X) * input_weights).rowwise() + bias).array().tanh().matrix();
  }
};

/// H = tanh(X Win + b) with Win, b ~ U(-1,1); beta from the (weighted)
/// regularized closed form, branch chosen by N vs L.
inline SingleLayerModel elm_train(const Matrix& X, const std::vector<int>& labels, int num_classes,
                                  const ElmConfig& cfg, const WeightScheme& scheme = {},
                                  Branch branch = Branch::automatic) {
  require(cfg.hidden >= 1, ErrorKind::BadConfig, "hidden size must be >= 1");
  require(cfg.C > 0.0, ErrorKind::BadConfig, "C must be positive");
  require(static_cast<std::size_t>(X.rows()) == labels.size() && X.rows() > 0, ErrorKind::BadInput,
          "feature/label count mismatch");
  SingleLayerModel model;
  model.config = cfg;
  model.scheme = scheme;
  model.input = Standardizer::fit(X, cfg.standardize);
  rng::Engine eng(rng::substream(cfg.seed, 0xe1));
  model.input_weights = rng::uniform_matrix(eng, X.cols(), cfg.hidden);
  model.bias = rng::uniform_matrix(eng, 1, cfg.hidden);
  const Matrix H = model.hidden(X);
  const Vector w = scheme.kind == SchemeKind::none ? Vector() : make_weights(labels, num_classes, scheme);
  model.beta = solve_output_weights(H, one_hot(labels, num_classes), w, cfg.C, branch, &model.solve);
  return model;
}

inline Prediction predict(const SingleLayerModel& model, const Matrix& X) {
  require(X.cols() == model.input_weights.rows(), ErrorKind::BadInput,
          "expected " + std::to_string(model.input_weights.rows()) + " features, got " + std::to_string(X.cols()));
  Prediction p;
  p.scores = model.hidden(X) * model.beta;
  p.labels = argmax_rows(p.scores);
  return p;
}

// Sparse coding --------------------------------------------------------------------

struct FistaOptions {
  double lambda = 1e-3;
  int iterations = 50;
  int power_iterations = 30;
  std::uint64_t seed = 0;
};

struct FistaResult {
  Matrix alpha;
  std::vector<double> objective;  // F at the start and after every iteration
  double lipschitz = 0.0;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double power_iteration(const Matrix& S, int iterations, std::uint64_t seed) {
  rng::Engine eng(rng::substream(seed, 0x90e));
  Vector v(S.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng::uniform(eng, 0.5, 1.5);
  v.normalize();
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const Vector w = S * v;
    lambda = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
  }
  return std::max(lambda, v.dot(S * v));
}

/// Minimizes ||A a - G||_F^2 + lambda ||a||_1 by monotone FISTA with a
/// backtracking safeguard on the step. The objective sequence never increases.
inline FistaResult fista_lasso(const Matrix& A, const Matrix& G, const FistaOptions& opt) {
  require(A.rows() == G.rows(), ErrorKind::BadInput, "A and G row counts differ");
  require(opt.lambda >= 0.0 && opt.iterations >= 0, ErrorKind::BadConfig, "invalid FISTA options");
  const Matrix AtA = A.transpose() * A;
  const Matrix AtG = A.transpose() * G;
  const double g2 = G.squaredNorm();
  auto smooth = [&](const Matrix& a) { return (a.transpose() * AtA * a).trace() - 2.0 * (a.transpose() * AtG).trace() + g2; };
  auto full = [&](const Matrix& a) { return std::max(smooth(a), 0.0) + opt.lambda * a.cwiseAbs().sum(); };
  auto shrink = [](const Matrix& v, double tau) {
    return (v.array().sign() * (v.array().abs() - tau).max(0.0)).matrix();
  };

  FistaResult res;
  // gradient of the smooth part is 2 (AtA a - AtG): Lipschitz 2 lambda_max(AtA)
  double L = 2.0 * power_iteration(AtA, opt.power_iterations, opt.seed);
  if (!(L > 0.0)) L = 1.0;
  Matrix x = Matrix::Zero(A.cols(), G.cols());
  Matrix x_prev = x, y = x;
  double fx = full(x), t = 1.0;
  res.objective.push_back(fx);
  for (int k = 0; k < opt.iterations; ++k) {
    const Matrix grad = 2.0 * (AtA * y - AtG);
    const double fy = smooth(y);
    Matrix z;
    for (int tries = 0; tries < 60; ++tries) {
      z = shrink(y - grad / L, opt.lambda / L);
      const Matrix dz = z - y;
      if (smooth(z) <= fy + (grad.array() * dz.array()).sum() + 0.5 * L * dz.squaredNorm() + 1e-12 * std::abs(fy)) break;
      L *= 2.0;
    }
    const double fz = full(z);
    x_prev = x;
    if (fz <= fx) {
      x = z;
      fx = fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    res.objective.push_back(fx);
  }
  res.alpha = x;
  res.lipschitz = L;
  return res;
}

// Hierarchical ELM -----------------------------------------------------------------

struct HelmConfig {
  std::vector<int> sparse_sizes{100, 100};
  int proj_size = 500;
  double lambda = 1e-3;
  double C = 1024.0;
  int fista_iters = 50;
  int power_iters = 30;
  std::uint64_t seed = 0;
  bool standardize = true;
  /// When positive, the projected activations are rescaled so their RMS over
  /// the training data equals this value before tanh; zero leaves them as is.
  double projection_rms = 32.0;

  /// Layer sizes of the production network: 1000, 1000 sparse, 20000 projection.
  static HelmConfig production() {
    HelmConfig c;
    c.sparse_sizes = {1000, 1000};
    c.proj_size = 20000;
    return c;
  }

  void validate() const {
    for (int s : sparse_sizes) require(s >= 1, ErrorKind::BadConfig, "sparse layer sizes must be >= 1");
    require(proj_size >= 1, ErrorKind::BadConfig, "projection size must be >= 1");
    require(lambda >= 0.0 && C > 0.0, ErrorKind::BadConfig, "need lambda >= 0 and C > 0");
    require(fista_iters >= 0 && power_iters >= 1, ErrorKind::BadConfig, "invalid iteration counts");
    require(projection_rms >= 0.0, ErrorKind::BadConfig, "projection_rms must be >= 0");
  }
};

struct ElmModel {
  HelmConfig config;
  WeightScheme scheme;
  Standardizer input;
  std::vector<Matrix> sparse_layers;  // beta_i: [(N_i + 1) x N_{i+1}]
  Matrix projection;                  // [(N_U + 1) x proj_size], orthonormal columns or rows
  Matrix output;                      // [(proj_size + 1) x M]
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> fista_objectives;  // per sparse layer
  double activation_scale = 1.0;  // resolved multiplier in front of tanh
  SolveInfo solve;
  int projection_attempts = 1;

  Eigen::Index input_dims() const { return input.mean.size(); }

  /// Hidden representation fed to the output layer (without bias column).
  Matrix features(const Matrix& X) const {
    Matrix H = input.apply(X);
    for (const auto& beta : sparse_layers) H = with_bias(H) * beta;
    return (activation_scale * (with_bias(H) * projection)).array().tanh().matrix();
  }

  /// Orthonormality residual of the projection matrix (Frobenius).
  double projection_residual() const {
    if (projection.rows() >= projection.cols())
      return (projection.transpose() * projection - Matrix::Identity(projection.cols(), projection.cols())).norm();
    return (projection * projection.transpose() - Matrix::Identity(projection.rows(), projection.rows())).norm();
  }
};

/// Orthonormal basis of a random (rows x cols) matrix via compact SVD:
/// columns when rows >= cols, rows otherwise.
inline Matrix orthonormal_projection(const Matrix& random) {
  if (random.rows() >= random.cols()) {
    Eigen::JacobiSVD<Matrix> svd(random, Eigen::ComputeThinU);
    return svd.matrixU();
  }
  Eigen::JacobiSVD<Matrix> svd(random.transpose(), Eigen::ComputeThinU);
  return svd.matrixU().transpose();
}

inline bool full_rank(const Matrix& m) {
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  return s.size() > 0 && s(s.size() - 1) > 1e-10 * s(0);
}

/// Three stages: linear sparse auto-encoder layers, an SVD-orthogonalized
/// random projection with tanh, and a weighted Tikhonov output layer.
inline ElmModel helm_train(const Matrix& X, const std::vector<int>& labels, int num_classes, const HelmConfig& cfg,
                           const WeightScheme& scheme = {}) {
  cfg.validate();
  require(static_cast<std::size_t>(X.rows()) == labels.size() && X.rows() > 0, ErrorKind::BadInput,
          "feature/label count mismatch");
  const auto counts = class_counts(labels, num_classes);
  for (std::size_t c = 0; c < counts.size(); ++c)
    require(counts[c] > 0, ErrorKind::EmptyClass, "class " + std::to_string(c) + " has no training samples");

  ElmModel model;
  model.config = cfg;
  model.scheme = scheme;
  model.input = Standardizer::fit(X, cfg.standardize);

  Matrix H = model.input.apply(X);
  for (std::size_t layer = 0; layer < cfg.sparse_sizes.size(); ++layer) {
    const Matrix G = with_bias(H);
    rng::Engine eng(rng::substream(cfg.seed, 1, layer));
    const Matrix beta_tmp = rng::uniform_matrix(eng, G.cols(), cfg.sparse_sizes[layer]);
    const Matrix A = G * beta_tmp;
    FistaOptions opt{cfg.lambda, cfg.fista_iters, cfg.power_iters, rng::substream(cfg.seed, 2, layer)};
    FistaResult fr = fista_lasso(A, G, opt);
    model.fista_objectives.push_back(std::move(fr.objective));
    model.sparse_layers.push_back(fr.alpha.transpose());
    H = G * model.sparse_layers.back();
  }

  const Matrix G = with_bias(H);
  for (int attempt = 0;; ++attempt) {
    require(attempt < 16, ErrorKind::AbortWithDiagnostics, "could not draw a full-rank projection matrix");
    rng::Engine eng(rng::substream(cfg.seed, 3, static_cast<std::uint64_t>(attempt)));
    const Matrix beta_tmp = rng::uniform_matrix(eng, G.cols(), cfg.proj_size);
    if (!full_rank(beta_tmp)) continue;
    model.projection = orthonormal_projection(beta_tmp);
    model.projection_attempts = attempt + 1;
    break;
  }
  const Matrix P = G * model.projection;
  if (cfg.projection_rms > 0.0) {
    const double rms = std::sqrt(P.squaredNorm() / static_cast<double>(P.size()));
    if (rms > 0.0) model.activation_scale = cfg.projection_rms / rms;
  }
  const Matrix Hp = with_bias((model.activation_scale * P).array().tanh().matrix());
  const Vector w = scheme.kind == SchemeKind::none ? Vector() : make_weights(labels, num_classes, scheme);
  // over-determined when N >= proj_size
  const Branch branch = X.rows() >= cfg.proj_size ? Branch::primal : Branch::dual;
  model.output = solve_output_weights(Hp, one_hot(labels, num_classes), w, cfg.C, branch, &model.solve);
  return model;
}

inline Prediction predict(const ElmModel& model, const Matrix& X) {
  require(X.cols() == model.input_dims(), ErrorKind::BadInput,
          "expected " + std::to_string(model.input_dims()) + " features, got " + std::to_string(X.cols()));
  Prediction p;
  p.scores = with_bias(model.features(X)) * model.output;
  p.labels = argmax_rows(p.scores);
  return p;
}

// Model files ----------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  require(j.is_array(), ErrorKind::BadInput, "matrix must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    require(static_cast<Eigen::Index>(j[i].size()) == cols, ErrorKind::BadInput, "ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

inline nlohmann::json to_json(const ElmModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "helm";
  j["seed"] = m.config.seed;
  j["config"] = {{"sparse_sizes", m.config.sparse_sizes}, {"proj_size", m.config.proj_size},
                 {"lambda", m.config.lambda},             {"C", m.config.C},
                 {"fista_iters", m.config.fista_iters},   {"power_iters", m.config.power_iters},
                 {"standardize", m.config.standardize},   {"projection_rms", m.config.projection_rms},
                 {"activation", "tanh"}};
  j["scheme"] = {{"kind", to_string(m.scheme.kind)}, {"d", m.scheme.d}};
  j["class_names"] = m.class_names;
  j["activation_scale"] = m.activation_scale;
  j["input_mean"] = matrix_to_json(m.input.mean)[0];
  j["input_scale"] = matrix_to_json(m.input.scale)[0];
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& b : m.sparse_layers) layers.push_back(matrix_to_json(b));
  j["sparse_layers"] = std::move(layers);
  j["projection"] = matrix_to_json(m.projection);
  j["output"] = matrix_to_json(m.output);
  return j;
}

inline ElmModel model_from_json(const nlohmann::json& j) {
  require(j.contains("format_version") && j["format_version"].get<int>() == kModelFormatVersion, ErrorKind::BadInput,
          "unsupported model format version");
  require(j.value("kind", "") == "helm", ErrorKind::BadInput, "not a hierarchical ELM model");
  ElmModel m;
  const auto& c = j.at("config");
  m.config.sparse_sizes = c.at("sparse_sizes").get<std::vector<int>>();
  m.config.proj_size = c.at("proj_size").get<int>();
  m.config.lambda = c.at("lambda").get<double>();
  m.config.C = c.at("C").get<double>();
  m.config.fista_iters = c.at("fista_iters").get<int>();
  m.config.power_iters = c.at("power_iters").get<int>();
  m.config.standardize = c.at("standardize").get<bool>();
  m.config.projection_rms = c.at("projection_rms").get<double>();
  m.activation_scale = j.at("activation_scale").get<double>();
  m.config.seed = j.at("seed").get<std::uint64_t>();
  m.scheme.kind = parse_scheme(j.at("scheme").at("kind").get<std::string>());
  m.scheme.d = j.at("scheme").at("d").get<double>();
  m.class_names = j.at("class_names").get<std::vector<std::string>>();
  const auto mean = j.at("input_mean").get<std::vector<double>>();
  const auto scale = j.at("input_scale").get<std::vector<double>>();
  require(mean.size() == scale.size(), ErrorKind::BadInput, "input normalization size mismatch");
  m.input.mean = Eigen::Map<const RowVector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  m.input.scale = Eigen::Map<const RowVector>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  for (const auto& b : j.at("sparse_layers")) m.sparse_layers.push_back(matrix_from_json(b));
  m.projection = matrix_from_json(j.at("projection"));
  m.output = matrix_from_json(j.at("output"));
  Eigen::Index width = m.input.mean.size();
  for (const auto& b : m.sparse_layers) {
    require(b.rows() == width + 1, ErrorKind::BadInput, "sparse layer shape mismatch");
    width = b.cols();
  }
  require(m.projection.rows() == width + 1 && m.output.rows() == m.projection.cols() + 1, ErrorKind::BadInput,
          "projection/output shape mismatch");
  require(static_cast<std::size_t>(m.output.cols()) == m.class_names.size(), ErrorKind::BadInput,
          "output width differs from class count");
  return m;
}

}  // namespace serkit::elm
