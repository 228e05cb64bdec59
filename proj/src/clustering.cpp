#include "facies/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "facies/error.hpp"
#include "facies/parallel.hpp"
#include "facies/tensor.hpp"

namespace facies {
namespace {

void require_data(const Matrix& x, const ClusterConfig& cfg) {
  cfg.validate();
  if (x.rows() < cfg.clusters)
    throw RangeError("clustering needs at least as many points (" + std::to_string(x.rows()) +
                     ") as clusters (" + std::to_string(cfg.clusters) + ")");
  if (x.cols() == 0) throw ShapeError("clustering input has no features");
  for (double v : x.data())
    if (!std::isfinite(v)) throw RangeError("clustering input contains non-finite values");
}

Matrix kmeanspp_seeds(const Matrix& x, std::size_t c, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centroids(c, x.cols());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t j = 0; j < c; ++j) {
    if (j > 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += nearest[i];
      if (total > 0.0) {
        double target = std::uniform_real_distribution<double>(0.0, total)(rng);
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (nearest[i] <= 0.0) continue;
          pick = i;
          target -= nearest[i];
          if (target < 0.0) break;
        }
      } else {
        // Every remaining point duplicates a seed; take any unused one.
        std::vector<std::size_t> unused;
        for (std::size_t i = 0; i < n; ++i)
          if (!chosen[i]) unused.push_back(i);
        pick = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
      }
    }
    chosen[pick] = true;
    std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(j).begin());
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], squared_distance(x.row(i), centroids.row(j)));
  }
  return centroids;
}

std::vector<std::size_t> assign(const Matrix& x, const Matrix& centroids, std::size_t threads) {
  std::vector<std::size_t> labels(x.rows());
  parallel_chunks(x.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < centroids.rows(); ++j) {
        const double d = squared_distance(x.row(i), centroids.row(j));
        if (d < best) {
          best = d;
          labels[i] = j;
        }
      }
    }
  });
  return labels;
}

Matrix hard_means(const Matrix& x, const std::vector<std::size_t>& labels, std::size_t c) {
  Matrix centroids(c, x.cols());
  std::vector<std::size_t> counts(c, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto dst = centroids.row(labels[i]);
    const auto src = x.row(i);
    for (std::size_t d = 0; d < x.cols(); ++d) dst[d] += src[d];
    ++counts[labels[i]];
  }
  for (std::size_t j = 0; j < c; ++j)
    for (auto& v : centroids.row(j)) v /= static_cast<double>(counts[j]);
  return centroids;
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const Matrix& x, const Matrix& centroids, std::vector<std::size_t>& labels,
                  std::size_t c) {
  std::vector<std::size_t> counts(c, 0);
  for (auto l : labels) ++counts[l];
  for (std::size_t j = 0; j < c; ++j) {
    if (counts[j] > 0) continue;
    std::size_t far = x.rows();
    double far_dist = -1.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = squared_distance(x.row(i), centroids.row(labels[i]));
      if (d > far_dist) {
        far_dist = d;
        far = i;
      }
    }
    --counts[labels[far]];
    labels[far] = j;
    ++counts[j];
  }
}

double hard_objective(const Matrix& x, const Matrix& centroids,
                      const std::vector<std::size_t>& labels) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    sum += squared_distance(x.row(i), centroids.row(labels[i]));
  return sum;
}

void require_non_increasing(double previous, double current) {
  if (current > previous + 1e-12 * std::max(1.0, std::abs(previous)))
    throw Error("clustering objective increased from " + std::to_string(previous) + " to " +
                std::to_string(current));
}

Matrix one_hot(const std::vector<std::size_t>& labels, std::size_t c) {
  Matrix u(labels.size(), c);
  for (std::size_t i = 0; i < labels.size(); ++i) u(i, labels[i]) = 1.0;
  return u;
}

ClusterResult kmeans_once(const Matrix& x, const ClusterConfig& cfg, Rng& rng,
                          std::size_t threads) {
  const std::size_t c = cfg.clusters;
  ClusterResult r;
  Matrix centroids = kmeanspp_seeds(x, c, rng);
  std::vector<std::size_t> labels = assign(x, centroids, threads);
  repair_empty(x, centroids, labels, c);
  centroids = hard_means(x, labels, c);
  r.objective_history.push_back(hard_objective(x, centroids, labels));

  for (std::size_t iter = 1; iter < cfg.max_iter; ++iter) {
    auto next = assign(x, centroids, threads);
    if (next == labels) break;
    labels = std::move(next);
    repair_empty(x, centroids, labels, c);
    centroids = hard_means(x, labels, c);
    const double previous = r.objective_history.back();
    const double current = hard_objective(x, centroids, labels);
    require_non_increasing(previous, current);
    r.objective_history.push_back(current);
    if (previous - current <= cfg.tol * previous) break;
  }
  r.memberships = one_hot(labels, c);
  r.centroids = std::move(centroids);
  r.labels = std::move(labels);
  return r;
}

ClusterResult fuzzy_once(const Matrix& x, const ClusterConfig& cfg, Rng& rng,
                         std::size_t threads) {
  const double m = cfg.fuzzifier;
  ClusterResult r;
  Matrix u = fuzzy_memberships(x, kmeanspp_seeds(x, cfg.clusters, rng), m, threads);
  Matrix centroids = update_centroids(x, u, m);
  r.objective_history.push_back(clustering_objective(x, centroids, u, m));
  for (std::size_t iter = 1; iter < cfg.max_iter; ++iter) {
    Matrix next = fuzzy_memberships(x, centroids, m, threads);
    double change = 0.0;
    for (std::size_t i = 0; i < next.data().size(); ++i)
      change = std::max(change, std::abs(next.data()[i] - u.data()[i]));
    u = std::move(next);
    centroids = update_centroids(x, u, m);
    const double current = clustering_objective(x, centroids, u, m);
    require_non_increasing(r.objective_history.back(), current);
    r.objective_history.push_back(current);
    if (change < cfg.tol) break;
  }
  r.labels = harden(u);
  r.memberships = std::move(u);
  r.centroids = std::move(centroids);
  return r;
}

template <class Once>
ClusterResult best_of(const Matrix& x, const ClusterConfig& cfg, std::size_t threads, Once once) {
  require_data(x, cfg);
  Rng rng(cfg.seed);
  ClusterResult best;
  for (std::size_t run = 0; run < cfg.restarts; ++run) {
    ClusterResult r = once(x, cfg, rng, threads);
    if (run == 0 || r.objective() < best.objective()) best = std::move(r);
  }
  return best;
}

}  // namespace

void ClusterConfig::validate() const {
  if (clusters < 2) throw RangeError("cluster count must be >= 2");
  if (mode == ClusterMode::fuzzy && !(fuzzifier > 1.0))
    throw RangeError("fuzzifier m must be > 1");
  if (!(tol > 0.0)) throw RangeError("tolerance must be > 0");
  if (max_iter == 0) throw RangeError("max_iter must be >= 1");
  if (restarts == 0) throw RangeError("restarts must be >= 1");
}

ClusterResult kmeans(const Matrix& x, const ClusterConfig& cfg, std::size_t threads) {
  return best_of(x, cfg, threads, kmeans_once);
}

ClusterResult fuzzy_cmeans(const Matrix& x, const ClusterConfig& cfg, std::size_t threads) {
  return best_of(x, cfg, threads, fuzzy_once);
}

ClusterResult cluster(const Matrix& x, const ClusterConfig& cfg, std::size_t threads) {
  return cfg.mode == ClusterMode::fuzzy ? fuzzy_cmeans(x, cfg, threads) : kmeans(x, cfg, threads);
}

Matrix update_centroids(const Matrix& x, const Matrix& memberships, double m) {
  if (memberships.rows() != x.rows())
    throw ShapeError("update_centroids: membership rows must match the data");
  const std::size_t c = memberships.cols();
  Matrix centroids(c, x.cols());
  for (std::size_t j = 0; j < c; ++j) {
    double weight = 0.0;
    auto dst = centroids.row(j);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double w = std::pow(memberships(i, j), m);
      if (w == 0.0) continue;
      weight += w;
      const auto src = x.row(i);
      for (std::size_t d = 0; d < x.cols(); ++d) dst[d] += w * src[d];
    }
    if (weight > 0.0)
      for (auto& v : dst) v /= weight;
  }
  return centroids;
}

Matrix fuzzy_memberships(const Matrix& x, const Matrix& centroids, double m,
                         std::size_t threads) {
  const std::size_t c = centroids.rows();
  const double power = 1.0 / (m - 1.0);
  Matrix u(x.rows(), c);
  parallel_chunks(x.rows(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dist(c);
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t coincident = c;
      for (std::size_t j = 0; j < c; ++j) {
        dist[j] = squared_distance(x.row(i), centroids.row(j));
        if (dist[j] == 0.0 && coincident == c) coincident = j;
      }
      if (coincident < c) {
        u(i, coincident) = 1.0;
        continue;
      }
      for (std::size_t j = 0; j < c; ++j) {
        double sum = 0.0;
        for (std::size_t l = 0; l < c; ++l) sum += std::pow(dist[j] / dist[l], power);
        u(i, j) = 1.0 / sum;
      }
    }
  });
  return u;
}

double clustering_objective(const Matrix& x, const Matrix& centroids, const Matrix& memberships,
                            double m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < centroids.rows(); ++j) {
      const double w = memberships(i, j);
      if (w == 0.0) continue;
      sum += std::pow(w, m) * squared_distance(x.row(i), centroids.row(j));
    }
  return sum;
}

std::vector<std::size_t> harden(const Matrix& memberships) {
  std::vector<std::size_t> labels(memberships.rows(), 0);
  for (std::size_t i = 0; i < memberships.rows(); ++i) {
    const auto row = memberships.row(i);
    labels[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return labels;
}

std::vector<std::size_t> harden(const ClusterResult& result) { return harden(result.memberships); }

}  // namespace facies
