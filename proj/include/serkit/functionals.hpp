#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "serkit/types.hpp"

namespace serkit::functionals {

enum class Kind { mean, quadratic_mean, harmonic_mean, geometric_mean, std, skewness, kurtosis, percentile, zero_crossing };

struct Functional {
  Kind kind = Kind::mean;
  double percentile = 50.0;  // only for Kind::percentile

  std::string name() const {
    switch (kind) {
      case Kind::mean: return "mean";
      case Kind::quadratic_mean: return "qmean";
      case Kind::harmonic_mean: return "hmean";
      case Kind::geometric_mean: return "gmean";
      case Kind::std: return "std";
      case Kind::skewness: return "skew";
      case Kind::kurtosis: return "kurt";
      case Kind::zero_crossing: return "zc";
      case Kind::percentile: {
        std::string p = std::to_string(percentile);
        p.erase(p.find_last_not_of('0') + 1);
        if (!p.empty() && p.back() == '.') p.pop_back();
        return "p" + p;
      }
    }
    return "?";
  }
};

using FunctionalSet = std::vector<Functional>;

/// mean, SD, skewness, kurtosis.
inline FunctionalSet default_set() {
  return {{Kind::mean}, {Kind::std}, {Kind::skewness}, {Kind::kurtosis}};
}

/// Parses names such as "mean", "std", "skew", "kurt", "qmean", "hmean",
/// "gmean", "zc", "p50", "percentile".
inline Functional parse(const std::string& name) {
  if (name == "mean") return {Kind::mean};
  if (name == "qmean" || name == "quadratic_mean") return {Kind::quadratic_mean};
  if (name == "hmean" || name == "harmonic_mean") return {Kind::harmonic_mean};
  if (name == "gmean" || name == "geometric_mean") return {Kind::geometric_mean};
  if (name == "std" || name == "sd") return {Kind::std};
  if (name == "skew" || name == "skewness") return {Kind::skewness};
  if (name == "kurt" || name == "kurtosis") return {Kind::kurtosis};
  if (name == "zc" || name == "zero_crossing") return {Kind::zero_crossing};
  if (name == "percentile" || name == "median") return {Kind::percentile, 50.0};
  if (name.size() > 1 && name[0] == 'p') {
    try {
      std::size_t used = 0;
      const double p = std::stod(name.substr(1), &used);
      if (used == name.size() - 1) return {Kind::percentile, p};
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorKind::BadConfig, "unknown functional '" + name + "'");
}

inline void validate(const FunctionalSet& set) {
  require(!set.empty(), ErrorKind::BadConfig, "functional set is empty");
  for (const auto& f : set)
    if (f.kind == Kind::percentile)
      require(f.percentile >= 0.0 && f.percentile <= 100.0, ErrorKind::BadConfig,
              "percentile must lie in [0,100]");
}

inline bool needs_two(Kind k) { return k == Kind::std || k == Kind::skewness || k == Kind::kurtosis; }

namespace detail {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sd(std::span<const double> x, double m) {
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

/// (1/n) sum ((x - mean)/sd)^p with the n-1 SD; 0 for a constant row.
inline double standardized_moment(std::span<const double> x, int p) {
  const double m = mean(x);
  const double s = sd(x, m);
  if (s < 1e-12) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += std::pow((v - m) / s, p);
  return acc / static_cast<double>(x.size());
}

}  // namespace detail

inline double apply(const Functional& f, std::span<const double> x) {
  require(!x.empty(), ErrorKind::TooFewFrames, "functional of an empty row");
  if (needs_two(f.kind))
    require(x.size() >= 2, ErrorKind::TooFewFrames, f.name() + " needs at least two frames");
  const double n = static_cast<double>(x.size());
  switch (f.kind) {
    case Kind::mean: return detail::mean(x);
    case Kind::quadratic_mean: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return std::sqrt(s / n);
    }
    case Kind::harmonic_mean: {
      double s = 0.0;
      for (double v : x) {
        require(v > 0.0, ErrorKind::DomainError, "harmonic mean needs positive values");
        s += 1.0 / v;
      }
      return n / s;
    }
    case Kind::geometric_mean: {
      double s = 0.0;
      for (double v : x) {
        require(v > 0.0, ErrorKind::DomainError, "geometric mean needs positive values");
        s += std::log(v);
      }
      return std::exp(s / n);
    }
    case Kind::std: return detail::sd(x, detail::mean(x));
    case Kind::skewness: return detail::standardized_moment(x, 3);
    case Kind::kurtosis: return detail::standardized_moment(x, 4);
    case Kind::percentile: {
      std::vector<double> sorted(x.begin(), x.end());
      std::sort(sorted.begin(), sorted.end());
      // 1-based rank floor(P*N/100); rank 0 maps to the first element
      const auto rank = static_cast<std::size_t>(std::floor(f.percentile * n / 100.0));
      return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
    }
    case Kind::zero_crossing: {
      // sgn(0) = +1
      double s = 0.0;
      for (std::size_t i = 1; i < x.size(); ++i) {
        const double a = x[i] >= 0.0 ? 1.0 : -1.0;
        const double b = x[i - 1] >= 0.0 ? 1.0 : -1.0;
        s += std::abs(a - b);
      }
      return s / (2.0 * n);
    }
  }
  return 0.0;
}

/// Collapses [dims x frames] into one vector of |set| * dims values,
/// functional-major: all dims for set[0], then all dims for set[1], ...
inline Vector apply_functionals(const FrameFeatures& ff, const FunctionalSet& set) {
  validate(set);
  const Eigen::Index dims = ff.values.rows();
  const Eigen::Index frames = ff.values.cols();
  require(frames >= 1, ErrorKind::TooFewFrames, "no frames");
  for (const auto& f : set)
    if (needs_two(f.kind))
      require(frames >= 2, ErrorKind::TooFewFrames, f.name() + " needs at least two frames");
  Vector out(static_cast<Eigen::Index>(set.size()) * dims);
  std::vector<double> row(static_cast<std::size_t>(frames));
  for (Eigen::Index d = 0; d < dims; ++d) {
    for (Eigen::Index t = 0; t < frames; ++t) row[static_cast<std::size_t>(t)] = ff.values(d, t);
    for (std::size_t k = 0; k < set.size(); ++k)
      out(static_cast<Eigen::Index>(k) * dims + d) = functionals::apply(set[k], std::span<const double>(row));
  }
  return out;
}

inline std::vector<std::string> output_labels(const FrameFeatures& ff, const FunctionalSet& set) {
  std::vector<std::string> labels;
  for (const auto& f : set)
    for (Eigen::Index d = 0; d < ff.values.rows(); ++d)
      labels.push_back(f.name() + "_" +
                       (static_cast<std::size_t>(d) < ff.dim_labels.size() ? ff.dim_labels[static_cast<std::size_t>(d)]
                                                                           : "f" + std::to_string(d)));
  return labels;
}

}  // namespace serkit::functionals
