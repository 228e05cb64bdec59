#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "facies/matrix.hpp"

namespace facies {

enum class ClusterMode { hard, fuzzy };

struct ClusterConfig {
  std::size_t clusters = 2;
  double fuzzifier = 2.0;  // m, fuzzy mode only
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  ClusterMode mode = ClusterMode::hard;
  /// Independent seeded initialisations; the lowest final objective wins.
  std::size_t restarts = 10;

  void validate() const;
};

struct ClusterResult {
  Matrix centroids;    // c x d
  Matrix memberships;  // N x c
  std::vector<std::size_t> labels;
  std::vector<double> objective_history;

  double objective() const { return objective_history.back(); }
};

/// Lloyd's algorithm from k-means++ seeds. Stops when the assignment no
/// longer changes, the relative objective decrease falls below tol, or after
/// max_iter iterations. A cluster that empties is reseeded with the point
/// farthest from its own centroid.
ClusterResult kmeans(const Matrix& x, const ClusterConfig& cfg, std::size_t threads = 1);

/// Fuzzy c-means with fuzzifier m. Alternates the membership update
///   u_ij = 1 / sum_l (|x_i - C_j| / |x_i - C_l|)^(2/(m-1))
/// with the weighted centroid update until no membership moves more than tol.
ClusterResult fuzzy_cmeans(const Matrix& x, const ClusterConfig& cfg, std::size_t threads = 1);

/// Dispatches on cfg.mode.
ClusterResult cluster(const Matrix& x, const ClusterConfig& cfg, std::size_t threads = 1);

/// C_j = sum_i u_ij^m x_i / sum_i u_ij^m.
Matrix update_centroids(const Matrix& x, const Matrix& memberships, double m);

/// Fuzzy memberships of every point for fixed centroids. A point that
/// coincides with a centroid belongs to it (the first one) with weight 1.
Matrix fuzzy_memberships(const Matrix& x, const Matrix& centroids, double m,
                         std::size_t threads = 1);

/// J_m = sum_i sum_j u_ij^m |x_i - C_j|^2.
double clustering_objective(const Matrix& x, const Matrix& centroids, const Matrix& memberships,
                            double m);

/// Row-wise argmax; ties go to the lowest cluster index.
std::vector<std::size_t> harden(const Matrix& memberships);
std::vector<std::size_t> harden(const ClusterResult& result);

}  // namespace facies
