#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "serkit/error.hpp"

namespace serkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Per-frame features of one utterance: one row per feature dimension,
/// one column per frame.
struct FrameFeatures {
  Matrix values;
  std::vector<std::string> dim_labels;

  Eigen::Index dims() const { return values.rows(); }
  Eigen::Index frames() const { return values.cols(); }
};

/// Samples in rows, features in columns. Labels are 0-based indices into
/// class_names; speakers are opaque ids used for leave-one-speaker-out.
struct FeatureMatrix {
  Matrix X;
  std::vector<int> labels;
  std::vector<std::string> speakers;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;

  Eigen::Index samples() const { return X.rows(); }
  Eigen::Index dims() const { return X.cols(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }

  FeatureMatrix subset(const std::vector<std::size_t>& rows) const {
    FeatureMatrix out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.X.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
      out.labels.push_back(labels[rows[r]]);
      if (!speakers.empty()) out.speakers.push_back(speakers[rows[r]]);
    }
    out.class_names = class_names;
    out.feature_names = feature_names;
    return out;
  }

  FeatureMatrix select_columns(const std::vector<std::size_t>& cols) const {
    FeatureMatrix out;
    out.X.resize(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out.X.col(static_cast<Eigen::Index>(c)) = X.col(static_cast<Eigen::Index>(cols[c]));
      if (!feature_names.empty()) out.feature_names.push_back(feature_names[cols[c]]);
    }
    out.labels = labels;
    out.speakers = speakers;
    out.class_names = class_names;
    return out;
  }
};

inline std::vector<std::size_t> class_counts(const std::vector<int>& labels, int num_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int l : labels) {
    require(l >= 0 && l < num_classes, ErrorKind::BadInput,
            "label " + std::to_string(l) + " outside [0, " + std::to_string(num_classes) + ")");
    ++counts[static_cast<std::size_t>(l)];
  }
  return counts;
}

namespace rng {

using Engine = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

/// Uniform in [0,1) built from the top 53 bits, so results do not depend on
/// the standard library's distribution implementation.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) { return lo + (hi - lo) * uniform01(eng); }

/// Standard normal via Box-Muller; portable across standard libraries.
inline double normal(Engine& eng) {
  double u1 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline Matrix uniform_matrix(Engine& eng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                             double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = uniform(eng, lo, hi);
  return m;
}

}  // namespace rng

}  // namespace serkit
