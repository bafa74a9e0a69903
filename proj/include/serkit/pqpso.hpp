#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "serkit/types.hpp"

namespace serkit::pqpso {

/// Laplace(mu, sigma) restricted to [lower, upper]. Bounds may be infinite.
class TruncatedLaplace {
 public:
  TruncatedLaplace(double mu, double sigma, double lower, double upper)
      : mu_(mu), sigma_(sigma), lower_(lower), upper_(upper) {
    require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::BadConfig, "TLD scale must be positive and finite");
    require(std::isfinite(mu) && lower <= mu && mu <= upper, ErrorKind::BadConfig,
            "TLD location must lie within [lower, upper]");
    tail_lo_ = std::exp(-(mu_ - lower_) / sigma_);
    tail_hi_ = std::exp(-(upper_ - mu_) / sigma_);
    norm_ = 2.0 - tail_hi_ - tail_lo_;
  }

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  /// A = 2 - exp(-(upper-mu)/sigma) - exp(-(mu-lower)/sigma), in (0, 2].
  double normalizer() const { return norm_; }

  double pdf(double x) const {
    if (x < lower_ || x > upper_) return 0.0;
    return std::exp(-std::abs(x - mu_) / sigma_) / (sigma_ * norm_);
  }

  double cdf(double x) const {
    if (x <= lower_) return 0.0;
    if (x >= upper_) return 1.0;
    if (x <= mu_) return (std::exp((x - mu_) / sigma_) - tail_lo_) / norm_;
    return (2.0 - std::exp(-(x - mu_) / sigma_) - tail_lo_) / norm_;
  }

  /// Inverse CDF: x = mu + S sigma ln(1 + S (A u + exp(-(mu-lower)/sigma) - 1)),
  /// S = sgn(F(mu) - u). Always inside [lower, upper].
  double sample(double u) const {
    require(u > 0.0 && u < 1.0, ErrorKind::BadVariate, "uniform variate must lie in (0,1)");
    const double at_mu = cdf(mu_);
    const double s = at_mu > u ? 1.0 : (at_mu < u ? -1.0 : 0.0);
    if (s == 0.0) return mu_;
    const double x = mu_ + s * sigma_ * std::log1p(s * (norm_ * u + tail_lo_ - 1.0));
    return std::clamp(x, lower_, upper_);
  }

 private:
  double mu_, sigma_, lower_, upper_;
  double tail_lo_ = 0.0, tail_hi_ = 0.0, norm_ = 2.0;
};

inline double tld_sample(const TruncatedLaplace& d, double u) { return d.sample(u); }

struct Candidate {
  std::vector<double> position;
  double cost = 0.0;
};

/// r_k = c_k / sum c with c_k = 1 + (E_max - E_k)/(E_max - E_min); uniform
/// when all costs are equal.
inline std::vector<double> lucky_global_weights(std::span<const Candidate> top_k) {
  require(!top_k.empty(), ErrorKind::Empty, "top-K list is empty");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : top_k) {
    require(std::isfinite(c.cost), ErrorKind::BadInput, "top-K cost is not finite");
    lo = std::min(lo, c.cost);
    hi = std::max(hi, c.cost);
  }
  std::vector<double> r(top_k.size(), 1.0);
  if (hi > lo)
    for (std::size_t k = 0; k < top_k.size(); ++k) r[k] = 1.0 + (hi - top_k[k].cost) / (hi - lo);
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  for (double& v : r) v /= total;
  return r;
}

/// Index drawn from the point-mass distribution over the top-K list using the
/// uniform variate u in [0,1).
inline std::size_t lucky_global_index(std::span<const Candidate> top_k, double u) {
  const auto r = lucky_global_weights(top_k);
  double acc = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    acc += r[k];
    if (u < acc) return k;
  }
  return r.size() - 1;
}

inline const std::vector<double>& lucky_global(std::span<const Candidate> top_k, rng::Engine& eng) {
  return top_k[lucky_global_index(top_k, rng::uniform01(eng))].position;
}

struct CeSchedule {
  double alpha0 = 1.0;
  double alpha1 = 0.4;
  int T = 1000;
  int max_try = 20;
  double epsilon = 1e-6;

  void validate() const {
    require(alpha0 >= alpha1 && alpha1 > 0.0, ErrorKind::BadConfig, "need alpha0 >= alpha1 > 0");
    require(T >= 1 && max_try >= 1, ErrorKind::BadConfig, "need T >= 1 and max_try >= 1");
    require(epsilon > 0.0, ErrorKind::BadConfig, "epsilon must be positive");
  }
};

/// alpha = (1 - mt/maxTry) * (alpha1 + (alpha0 - alpha1) (T - t)/T).
inline double ce_coefficient(const CeSchedule& s, int t, int mt) {
  require(t >= 0 && t <= s.T && mt >= 0 && mt <= s.max_try, ErrorKind::BadInput,
          "iteration or stagnation count out of range");
  return (1.0 - static_cast<double>(mt) / s.max_try) *
         (s.alpha1 + (s.alpha0 - s.alpha1) * static_cast<double>(s.T - t) / s.T);
}

struct Config {
  int particles = 40;
  int K = 5;
  CeSchedule schedule;
  std::uint64_t seed = 0;
  /// Optional starting positions for the first particles (clamped to bounds).
  std::vector<std::vector<double>> initial_positions;
};

struct TraceRow {
  int iteration = 0;
  double best_cost = 0.0;
  double alpha = 0.0;
  int mt = 0;
};

struct Result {
  std::vector<double> best_position;
  double best_cost = 0.0;
  std::vector<TraceRow> trace;
  bool stagnated = false;
};

using Objective = std::function<double(std::span<const double>)>;

struct Bounds {
  std::vector<double> lower, upper;

  static Bounds uniform(std::size_t dims, double lo, double hi) {
    return {std::vector<double>(dims, lo), std::vector<double>(dims, hi)};
  }
};

/// Point-mass quantum-behaved PSO. Each particle samples every coordinate from
/// a truncated Laplace centred at a random mix of its personal best and a
/// lucky-global draw from the top-K list, with scale alpha |LG - x|.
inline Result pqpso_minimize(const Objective& cost, const Bounds& bounds, const Config& cfg) {
  const std::size_t dims = bounds.lower.size();
  require(dims >= 1 && bounds.upper.size() == dims, ErrorKind::BadConfig, "bounds must have matching size >= 1");
  for (std::size_t d = 0; d < dims; ++d)
    require(std::isfinite(bounds.lower[d]) && std::isfinite(bounds.upper[d]) && bounds.lower[d] <= bounds.upper[d],
            ErrorKind::BadConfig, "bounds must be finite with lower <= upper");
  require(cfg.K >= 1 && cfg.particles >= cfg.K, ErrorKind::BadConfig, "need particles >= K >= 1");
  cfg.schedule.validate();

  const auto n = static_cast<std::size_t>(cfg.particles);
  std::vector<rng::Engine> streams;
  for (std::size_t p = 0; p < n; ++p) streams.emplace_back(rng::substream(cfg.seed, p));

  std::vector<std::vector<double>> x(n, std::vector<double>(dims));
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t d = 0; d < dims; ++d) x[p][d] = rng::uniform(streams[p], bounds.lower[d], bounds.upper[d]);
    if (p < cfg.initial_positions.size()) {
      require(cfg.initial_positions[p].size() == dims, ErrorKind::BadConfig, "initial position has wrong size");
      for (std::size_t d = 0; d < dims; ++d)
        x[p][d] = std::clamp(cfg.initial_positions[p][d], bounds.lower[d], bounds.upper[d]);
    }
  }

  auto evaluate = [&](std::size_t p, int iteration) {
    const double c = cost(x[p]);
    if (!std::isfinite(c)) {
      std::ostringstream os;
      os << "objective returned " << c << " for particle " << p << " at iteration " << iteration;
      throw Error(ErrorKind::AbortWithDiagnostics, os.str());
    }
    return c;
  };

  std::vector<Candidate> pbest(n);
  for (std::size_t p = 0; p < n; ++p) pbest[p] = {x[p], evaluate(p, 0)};

  const auto k = static_cast<std::size_t>(cfg.K);
  std::vector<std::size_t> order(n);
  std::vector<Candidate> top_k(k);
  auto refresh_top_k = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pbest[a].cost < pbest[b].cost; });
    for (std::size_t i = 0; i < k; ++i) top_k[i] = pbest[order[i]];
  };
  refresh_top_k();

  Result res;
  int mt = 0;
  const auto& s = cfg.schedule;
  for (int t = 0; t < s.T; ++t) {
    const double alpha = ce_coefficient(s, t, mt);
    const double prev_best = top_k[0].cost;
    for (std::size_t p = 0; p < n; ++p) {
      auto& eng = streams[p];
      const auto& lg = lucky_global(top_k, eng);
      for (std::size_t d = 0; d < dims; ++d) {
        const double phi = rng::uniform01(eng);
        const double mu = std::clamp(phi * pbest[p].position[d] + (1.0 - phi) * lg[d], bounds.lower[d],
                                     bounds.upper[d]);
        const double floor = 1e-12 * (bounds.upper[d] - bounds.lower[d]);
        const double sigma = std::max({alpha * std::abs(lg[d] - x[p][d]), floor,
                                       std::numeric_limits<double>::min()});
        double u = rng::uniform01(eng);
        while (u <= 0.0) u = rng::uniform01(eng);
        x[p][d] = TruncatedLaplace(mu, sigma, bounds.lower[d], bounds.upper[d]).sample(u);
      }
    }
    for (std::size_t p = 0; p < n; ++p) {
      const double c = evaluate(p, t + 1);
      if (c < pbest[p].cost) pbest[p] = {x[p], c};
    }
    refresh_top_k();
    const double new_best = top_k[0].cost;
    const double rel = (prev_best - new_best) / std::max(std::abs(prev_best), 1e-300);
    mt = rel < s.epsilon ? mt + 1 : 0;
    res.trace.push_back({t + 1, new_best, alpha, mt});
    if (mt >= s.max_try) {
      res.stagnated = true;
      break;
    }
  }
  res.best_position = top_k[0].position;
  res.best_cost = top_k[0].cost;
  return res;
}

// Projection learning --------------------------------------------------------

struct Split {
  std::vector<std::size_t> train, validation;
};

/// Stratified split: from each class, round(fraction * count) samples (at
/// least one, and never the whole class when it has two or more) go to
/// validation.
inline Split stratified_split(const std::vector<int>& labels, int num_classes, double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::BadConfig, "validation fraction must lie in (0,1)");
  rng::Engine eng(rng::substream(seed, 0x5711));
  Split split;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[static_cast<std::size_t>(eng() % i)]);
    auto n_val = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size())));
    n_val = std::clamp<std::size_t>(n_val, members.empty() ? 0 : 1, members.size() > 1 ? members.size() - 1 : 1);
    for (std::size_t i = 0; i < members.size(); ++i) (i < n_val ? split.validation : split.train).push_back(members[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

/// Nearest-centroid classifier in Euclidean distance; ties go to the lower
/// class id. Classes absent from training get no centroid.
class NearestCentroid {
 public:
  NearestCentroid(const Matrix& X, const std::vector<int>& labels, int num_classes)
      : centroids_(Matrix::Zero(num_classes, X.cols())), present_(static_cast<std::size_t>(num_classes), false) {
    std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
      centroids_.row(static_cast<Eigen::Index>(c)) += X.row(i);
      counts[c] += 1.0;
    }
    for (std::size_t c = 0; c < counts.size(); ++c)
      if (counts[c] > 0.0) {
        centroids_.row(static_cast<Eigen::Index>(c)) /= counts[c];
        present_[c] = true;
      }
  }

  std::vector<int> predict(const Matrix& X) const {
    std::vector<int> out(static_cast<std::size_t>(X.rows()), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < centroids_.rows(); ++c) {
        if (!present_[static_cast<std::size_t>(c)]) continue;
        const double d = (X.row(i) - centroids_.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          out[static_cast<std::size_t>(i)] = static_cast<int>(c);
        }
      }
    }
    return out;
  }

 private:
  Matrix centroids_;
  std::vector<bool> present_;
};

inline double accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == pred[i];
  return truth.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(truth.size());
}

struct ProjectionConfig {
  int d_out = 50;
  double validation_fraction = 0.3;
  double bound = 1.0;  // entries searched in [-bound, bound]
  bool include_identity = true;
  Config swarm;
};

struct ProjectionResult {
  Matrix projection;  // [dims x d_out]
  double best_cost = 0.0;
  double baseline_cost = 0.0;  // unprojected nearest-centroid error
  std::vector<TraceRow> trace;
};

/// Learns a [dims x d_out] linear map by minimizing 1 - accuracy of a
/// nearest-centroid classifier on a held-out validation split.
inline ProjectionResult learn_projection(const FeatureMatrix& fm, const ProjectionConfig& cfg) {
  const auto dims = fm.dims();
  require(cfg.d_out >= 1 && cfg.d_out <= dims, ErrorKind::BadConfig, "d_out must lie in [1, dims]");
  require(cfg.bound > 0.0, ErrorKind::BadConfig, "projection bound must be positive");
  const int m = fm.num_classes();
  const Split split = stratified_split(fm.labels, m, cfg.validation_fraction, cfg.swarm.seed);
  const auto train_counts = class_counts([&] {
    std::vector<int> l;
    for (auto i : split.train) l.push_back(fm.labels[i]);
    return l;
  }(), m);
  for (int c = 0; c < m; ++c)
    require(train_counts[static_cast<std::size_t>(c)] > 0, ErrorKind::BadSplit,
            "class '" + fm.class_names[static_cast<std::size_t>(c)] + "' has no training samples");

  const FeatureMatrix train = fm.subset(split.train);
  const FeatureMatrix val = fm.subset(split.validation);
  const auto d_out = static_cast<Eigen::Index>(cfg.d_out);

  auto objective = [&](std::span<const double> flat) {
    const Eigen::Map<const Matrix> P(flat.data(), dims, d_out);
    const NearestCentroid nc(train.X * P, train.labels, m);
    return 1.0 - accuracy(val.labels, nc.predict(val.X * P));
  };

  Config swarm = cfg.swarm;
  if (cfg.include_identity) {
    Matrix eye = Matrix::Identity(dims, d_out) * std::min(1.0, cfg.bound);
    swarm.initial_positions.insert(swarm.initial_positions.begin(),
                                   std::vector<double>(eye.data(), eye.data() + eye.size()));
  }
  const Result r =
      pqpso_minimize(objective, Bounds::uniform(static_cast<std::size_t>(dims * d_out), -cfg.bound, cfg.bound), swarm);

  ProjectionResult out;
  out.projection = Eigen::Map<const Matrix>(r.best_position.data(), dims, d_out);
  out.best_cost = r.best_cost;
  out.trace = r.trace;
  const NearestCentroid base(train.X, train.labels, m);
  out.baseline_cost = 1.0 - accuracy(val.labels, base.predict(val.X));
  return out;
}

}  // namespace serkit::pqpso
