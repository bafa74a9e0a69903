#pragma once

#include <cmath>
#include <limits>
#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "serkit/types.hpp"

namespace serkit::selection {

enum class Method { mrmr, cfs };

inline std::string to_string(Method m) { return m == Method::mrmr ? "mrmr" : "cfs"; }

inline Method parse_method(const std::string& s) {
  if (s == "mrmr") return Method::mrmr;
  if (s == "cfs") return Method::cfs;
  throw Error(ErrorKind::BadConfig, "unknown selection method '" + s + "'");
}

struct SelectionResult {
  std::vector<std::size_t> selected_indices;
  std::vector<double> scores;  // in selection order
  Method method = Method::mrmr;
};

/// Three levels split at mean - sd and mean + sd (n-1 SD).
inline std::vector<int> discretize(const Eigen::Ref<const Vector>& x) {
  const double n = static_cast<double>(x.size());
  const double m = x.mean();
  const double sd = x.size() > 1 ? std::sqrt((x.array() - m).square().sum() / (n - 1.0)) : 0.0;
  std::vector<int> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out[static_cast<std::size_t>(i)] = x(i) < m - sd ? 0 : (x(i) > m + sd ? 2 : 1);
  return out;
}

/// Plug-in mutual information (nats) between two sequences of small
/// nonnegative codes.
inline double mutual_information(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size() && !a.empty(), ErrorKind::BadInput, "MI needs equal-length nonempty inputs");
  int na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i] >= 0 && b[i] >= 0, ErrorKind::BadInput, "MI codes must be nonnegative");
    na = std::max(na, a[i] + 1);
    nb = std::max(nb, b[i] + 1);
  }
  std::vector<double> joint(static_cast<std::size_t>(na * nb), 0.0), pa(static_cast<std::size_t>(na), 0.0),
      pb(static_cast<std::size_t>(nb), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a[i] * nb + b[i])] += 1.0;
    pa[static_cast<std::size_t>(a[i])] += 1.0;
    pb[static_cast<std::size_t>(b[i])] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      const double c = joint[static_cast<std::size_t>(i * nb + j)];
      if (c > 0.0) mi += c / n * std::log(c * n / (pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(j)]));
    }
  return std::max(mi, 0.0);
}

namespace detail {

inline void check(const FeatureMatrix& fm, std::size_t k) {
  require(fm.labels.size() == static_cast<std::size_t>(fm.samples()), ErrorKind::BadInput,
          "labels missing or mismatched");
  require(k <= static_cast<std::size_t>(fm.dims()), ErrorKind::BadConfig,
          "cannot select " + std::to_string(k) + " of " + std::to_string(fm.dims()) + " features");
}

}  // namespace detail

/// Greedy mRMR: each step picks argmax I(f;c) - mean_{s in S} I(f;s) over the
/// discretized features. Ties go to the lowest index.
inline SelectionResult mrmr_select(const FeatureMatrix& fm, std::size_t k) {
  detail::check(fm, k);
  const auto dims = static_cast<std::size_t>(fm.dims());
  std::vector<std::vector<int>> levels(dims);
  std::vector<double> relevance(dims);
  for (std::size_t f = 0; f < dims; ++f) {
    levels[f] = discretize(fm.X.col(static_cast<Eigen::Index>(f)));
    relevance[f] = mutual_information(levels[f], fm.labels);
  }
  SelectionResult res;
  res.method = Method::mrmr;
  std::vector<double> redundancy(dims, 0.0);  // running sum of I(f; s)
  std::vector<bool> taken(dims, false);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = dims;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < dims; ++f) {
      if (taken[f]) continue;
      const double score = step == 0 ? relevance[f] : relevance[f] - redundancy[f] / static_cast<double>(step);
      if (score > best_score) {
        best_score = score;
        best = f;
      }
    }
    taken[best] = true;
    res.selected_indices.push_back(best);
    res.scores.push_back(best_score);
    for (std::size_t f = 0; f < dims; ++f)
      if (!taken[f]) redundancy[f] += mutual_information(levels[f], levels[best]);
  }
  return res;
}

inline double abs_pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return denom > 0.0 ? std::abs(da.dot(db)) / denom : 0.0;
}

/// CFS merit k * mean(r_cf) / sqrt(k + k(k-1) mean(r_ff)).
inline double cfs_merit(double sum_rcf, double sum_rff_pairs, std::size_t k) {
  if (k == 0) return 0.0;
  const double kk = static_cast<double>(k);
  const double mean_rcf = sum_rcf / kk;
  const double mean_rff = k > 1 ? sum_rff_pairs / (kk * (kk - 1.0) / 2.0) : 0.0;
  const double denom = std::sqrt(kk + kk * (kk - 1.0) * mean_rff);
  return denom > 0.0 ? kk * mean_rcf / denom : 0.0;
}

/// Greedy forward CFS. Scores are marginal merit gains. Zero-variance features
/// are never chosen while others remain; they trail with score 0.
inline SelectionResult cfs_rank(const FeatureMatrix& fm, std::size_t k) {
  detail::check(fm, k);
  const auto dims = static_cast<std::size_t>(fm.dims());
  Vector y(fm.samples());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = fm.labels[static_cast<std::size_t>(i)];
  std::vector<bool> constant(dims);
  std::vector<double> rcf(dims);
  for (std::size_t f = 0; f < dims; ++f) {
    const auto col = fm.X.col(static_cast<Eigen::Index>(f));
    constant[f] = (col.array() - col.mean()).abs().maxCoeff() == 0.0;
    rcf[f] = constant[f] ? 0.0 : abs_pearson(col, y);
  }
  SelectionResult res;
  res.method = Method::cfs;
  std::vector<bool> taken(dims, false);
  std::vector<double> rff_sum(dims, 0.0);  // sum of |r| to the selected set
  double sum_rcf = 0.0, sum_rff = 0.0, merit = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = dims;
    double best_merit = -std::numeric_limits<double>::infinity();
    bool best_constant = true;
    for (std::size_t f = 0; f < dims; ++f) {
      if (taken[f]) continue;
      const double m = constant[f] ? 0.0 : cfs_merit(sum_rcf + rcf[f], sum_rff + rff_sum[f], step + 1);
      // non-constant features always outrank constant ones
      const bool better = best == dims || (best_constant && !constant[f]) ||
                          (best_constant == constant[f] && m > best_merit);
      if (better) {
        best = f;
        best_merit = m;
        best_constant = constant[f];
      }
    }
    taken[best] = true;
    res.selected_indices.push_back(best);
    if (constant[best]) {
      res.scores.push_back(0.0);
      continue;
    }
    res.scores.push_back(best_merit - merit);
    merit = best_merit;
    sum_rcf += rcf[best];
    sum_rff += rff_sum[best];
    const auto chosen = fm.X.col(static_cast<Eigen::Index>(best));
    for (std::size_t f = 0; f < dims; ++f)
      if (!taken[f] && !constant[f]) rff_sum[f] += abs_pearson(fm.X.col(static_cast<Eigen::Index>(f)), chosen);
  }
  return res;
}

inline SelectionResult select(const FeatureMatrix& fm, std::size_t k, Method method) {
  return method == Method::mrmr ? mrmr_select(fm, k) : cfs_rank(fm, k);
}

inline std::vector<double> cumulative_score_curve(const SelectionResult& res) {
  require(!res.scores.empty(), ErrorKind::Empty, "no scores to accumulate");
  std::vector<double> out(res.scores.size());
  std::partial_sum(res.scores.begin(), res.scores.end(), out.begin());
  return out;
}

}  // namespace serkit::selection
