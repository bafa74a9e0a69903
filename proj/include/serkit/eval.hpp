#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "serkit/types.hpp"

namespace serkit::eval {

// Leave-one-speaker-out -------------------------------------------------------

struct Fold {
  std::string speaker;
  std::vector<std::size_t> train, test;
};

/// One fold per distinct speaker, in sorted speaker order.
inline std::vector<Fold> loso_folds(const std::vector<std::string>& speakers) {
  const std::set<std::string> distinct(speakers.begin(), speakers.end());
  require(distinct.size() >= 2, ErrorKind::BadManifest,
          "leave-one-speaker-out needs at least two speakers, found " + std::to_string(distinct.size()));
  std::vector<Fold> folds;
  for (const auto& s : distinct) {
    require(!s.empty(), ErrorKind::BadManifest, "empty speaker id");
    Fold f;
    f.speaker = s;
    for (std::size_t i = 0; i < speakers.size(); ++i) (speakers[i] == s ? f.test : f.train).push_back(i);
    folds.push_back(std::move(f));
  }
  return folds;
}

// Metrics -----------------------------------------------------------------------

inline double imbalance_ratio(const std::vector<std::size_t>& counts) {
  require(!counts.empty(), ErrorKind::EmptyClass, "no class counts");
  for (auto c : counts) require(c > 0, ErrorKind::EmptyClass, "imbalance ratio needs every class count > 0");
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  return static_cast<double>(*lo) / static_cast<double>(*hi);
}

/// Share of true c1 samples predicted as c2, relative to the correctly
/// recognized c2 samples: confusion(c1,c2) / confusion(c2,c2).
inline double correlated_pair_error(const Matrix& confusion, int c1, int c2) {
  require(confusion.rows() == confusion.cols(), ErrorKind::BadInput, "confusion matrix must be square");
  require(c1 >= 0 && c2 >= 0 && c1 < confusion.rows() && c2 < confusion.rows(), ErrorKind::BadInput,
          "class index out of range");
  const double denom = confusion(c2, c2);
  require(denom > 0.0, ErrorKind::Undefined, "no correctly recognized samples of the second class");
  return confusion(c1, c2) / denom;
}

struct EvalReport {
  Matrix confusion;  // rows: truth, columns: prediction (counts)
  double war = 0.0, uar = 0.0, gmean = 0.0, ir = 0.0;
  std::vector<double> recalls;  // NaN for classes absent from the truth
  std::map<std::pair<int, int>, std::optional<double>> per_pair_errors;
  std::vector<std::string> warnings;
  std::size_t samples = 0;
};

inline EvalReport compute_metrics(const std::vector<int>& truth, const std::vector<int>& pred, int num_classes) {
  require(truth.size() == pred.size(), ErrorKind::BadInput,
          "truth has " + std::to_string(truth.size()) + " labels, prediction has " + std::to_string(pred.size()));
  require(num_classes >= 1, ErrorKind::BadInput, "need at least one class");
  require(!truth.empty(), ErrorKind::BadInput, "no samples to evaluate");
  EvalReport r;
  r.samples = truth.size();
  r.confusion = Matrix::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < num_classes && pred[i] >= 0 && pred[i] < num_classes, ErrorKind::BadInput,
            "label out of range at row " + std::to_string(i));
    r.confusion(truth[i], pred[i]) += 1.0;
  }
  r.war = r.confusion.trace() / static_cast<double>(truth.size());

  std::vector<std::size_t> present_counts;
  double recall_sum = 0.0, log_sum = 0.0;
  bool any_zero = false;
  r.recalls.assign(static_cast<std::size_t>(num_classes), std::numeric_limits<double>::quiet_NaN());
  for (int c = 0; c < num_classes; ++c) {
    const double n = r.confusion.row(c).sum();
    if (n == 0.0) {
      r.warnings.push_back("class " + std::to_string(c) + " absent from truth; excluded from UAR and G-mean");
      continue;
    }
    const double recall = r.confusion(c, c) / n;
    r.recalls[static_cast<std::size_t>(c)] = recall;
    present_counts.push_back(static_cast<std::size_t>(n));
    recall_sum += recall;
    if (recall == 0.0)
      any_zero = true;
    else
      log_sum += std::log(recall);
  }
  const auto present = static_cast<double>(present_counts.size());
  r.uar = recall_sum / present;
  r.gmean = any_zero ? 0.0 : std::exp(log_sum / present);
  r.ir = imbalance_ratio(present_counts);

  for (int a = 0; a < num_classes; ++a)
    for (int b = 0; b < num_classes; ++b) {
      if (a == b) continue;
      r.per_pair_errors[{a, b}] =
          r.confusion(b, b) > 0.0 ? std::optional<double>(correlated_pair_error(r.confusion, a, b)) : std::nullopt;
    }
  return r;
}

// Synthetic data --------------------------------------------------------------------

struct SynthConfig {
  std::vector<std::size_t> counts{200, 20};
  int dims = 10;
  double separation = 2.0;
  double noise_sd = 1.0;
  int speakers = 10;
  std::uint64_t seed = 0;
};

/// Named presets. "imbalanced10to1" is the two-class 10:1 Gaussian set used to
/// compare weighting schemes.
inline SynthConfig synth_preset(const std::string& name) {
  SynthConfig c;
  if (name == "imbalanced10to1") return c;
  if (name == "balanced") {
    c.counts = {110, 110};
    return c;
  }
  if (name == "multiclass") {
    c.counts = {120, 60, 40, 30};
    c.dims = 8;
    c.separation = 2.0;
    return c;
  }
  throw Error(ErrorKind::BadConfig, "unknown synth preset '" + name + "'");
}

/// Class-conditional Gaussians: class c has mean separation * e_(c mod dims)
/// and isotropic noise. Rows are ordered by class; speakers are assigned
/// round-robin over the rows.
inline FeatureMatrix synth_imbalanced(const SynthConfig& cfg) {
  require(!cfg.counts.empty() && cfg.dims >= 1 && cfg.speakers >= 1, ErrorKind::BadConfig, "invalid synth config");
  for (auto n : cfg.counts) require(n > 0, ErrorKind::BadConfig, "synth class counts must be positive");
  std::size_t total = 0;
  for (auto n : cfg.counts) total += n;
  FeatureMatrix fm;
  fm.X.resize(static_cast<Eigen::Index>(total), cfg.dims);
  rng::Engine eng(rng::substream(cfg.seed, 0x5e));
  std::size_t row = 0;
  for (std::size_t c = 0; c < cfg.counts.size(); ++c) {
    fm.class_names.push_back("c" + std::to_string(c));
    for (std::size_t k = 0; k < cfg.counts[c]; ++k, ++row) {
      for (int d = 0; d < cfg.dims; ++d)
        fm.X(static_cast<Eigen::Index>(row), d) = cfg.noise_sd * rng::normal(eng);
      fm.X(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c % static_cast<std::size_t>(cfg.dims))) +=
          cfg.separation;
      fm.labels.push_back(static_cast<int>(c));
      fm.speakers.push_back("spk" + std::to_string(row % static_cast<std::size_t>(cfg.speakers)));
    }
  }
  for (int d = 0; d < cfg.dims; ++d) fm.feature_names.push_back("x" + std::to_string(d));
  return fm;
}

/// Two interleaving half circles with Gaussian noise, alternating classes.
inline FeatureMatrix two_moons(std::size_t n, double noise, std::uint64_t seed, int speakers = 1) {
  require(n >= 2 && noise >= 0.0, ErrorKind::BadConfig, "invalid two-moons parameters");
  rng::Engine eng(rng::substream(seed, 0x2a));
  FeatureMatrix fm;
  fm.X.resize(static_cast<Eigen::Index>(n), 2);
  fm.class_names = {"upper", "lower"};
  fm.feature_names = {"x", "y"};
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    const double t = std::numbers::pi * rng::uniform01(eng);
    double x = std::cos(t), y = std::sin(t);
    if (c == 1) {
      x = 1.0 - x;
      y = 0.5 - y;
    }
    fm.X(static_cast<Eigen::Index>(i), 0) = x + noise * rng::normal(eng);
    fm.X(static_cast<Eigen::Index>(i), 1) = y + noise * rng::normal(eng);
    fm.labels.push_back(c);
    fm.speakers.push_back("spk" + std::to_string(i % static_cast<std::size_t>(std::max(speakers, 1))));
  }
  return fm;
}

}  // namespace serkit::eval
