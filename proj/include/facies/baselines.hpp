#pragma once

#include <cstddef>
#include <vector>

#include "facies/features.hpp"
#include "facies/matrix.hpp"

namespace facies {

/// Covariance PCA with the full eigensystem kept; `retained` is the smallest
/// number of leading components whose variance share reaches the threshold.
struct PcaModel {
  std::vector<double> mean;
  std::vector<double> eigenvalues;  // descending, clamped at zero
  Matrix eigenvectors;              // d x d, column j pairs with eigenvalues[j]
  std::size_t retained = 0;
  double threshold = 0.9;

  std::size_t dimension() const { return mean.size(); }
  /// Fraction of total variance carried by the first r components.
  double cumulative_ratio(std::size_t r) const;
};

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and matching unit eigenvectors
/// as columns, each signed so its largest-magnitude entry is positive.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};
SymmetricEigen jacobi_eigen(const Matrix& symmetric, std::size_t max_sweeps = 100);

/// Unbiased (N-1) sample covariance of the rows of x.
Matrix sample_covariance(const Matrix& x, const std::vector<double>& mean);

PcaModel pca_fit(const Matrix& x, double variance_threshold = 0.9);

/// Centred projection onto the first `components` eigenvectors
/// (0 selects model.retained).
Matrix pca_transform(const PcaModel& model, const Matrix& x, std::size_t components = 0);

/// Maps projected rows back to the input space.
Matrix pca_inverse_transform(const PcaModel& model, const Matrix& projected);

/// Poststack trace: mean over offsets for every time sample, standardized.
/// A trace without variance becomes zeros and sets *degenerate.
std::vector<double> stack_poststack(const GatherWindow& window, bool* degenerate = nullptr);

}  // namespace facies
