#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace facies {

/// Seeded generator used for every stochastic step (init, corruption,
/// unpool routing, clustering seeds).
using Rng = std::mt19937_64;

/// Dense row-major array of doubles with up to four extents.
///
/// Rank-3 tensors are laid out [channels, height, width]; kernel banks are
/// rank-4 [in_channels, n, n, out_channels].
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;

  /// A single zero; placeholder for containers.
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  /// Throws ShapeError when data.size() disagrees with the extents and
  /// RangeError on non-finite values.
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  double& at(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
  }
  double at(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
  }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Argmax offsets recorded by max pooling: one value in {0,1,2,3} per pooled
/// cell, the row-major position inside its 2x2 source block.
struct PoolIndices {
  Tensor::Shape shape;  // [k, h/2, w/2]
  std::vector<std::uint8_t> offsets;

  std::uint8_t at(std::size_t c, std::size_t i, std::size_t j) const {
    return offsets[(c * shape[1] + i) * shape[2] + j];
  }

  friend bool operator==(const PoolIndices&, const PoolIndices&) = default;
};

struct Pooled {
  Tensor values;
  PoolIndices indices;
};

enum class UnpoolMode { random, recorded };

/// Multi-channel valid cross-correlation.
///   out[k][i][j] = sum_c sum_{r,s} input[c][i+r][j+s] * kernels[c][r][s][k]
/// input [c,h,w], kernels [c,n,n,k] -> [k, h-n+1, w-n+1].
Tensor conv2d_valid(const Tensor& input, const Tensor& kernels);

/// Multi-channel full cross-correlation (zero padding n-1 on every side).
/// input [c,h,w], kernels [c,n,n,k] -> [k, h+n-1, w+n-1]. The valid result is
/// the crop starting at (n-1, n-1).
Tensor conv2d_full(const Tensor& input, const Tensor& kernels);

/// Reverses every n x n slice of a [c,n,n,k] bank along both spatial axes.
Tensor flip180(const Tensor& kernels);

/// [c,n,n,k] -> [k,n,n,c]; turns an encoder bank into a decoder bank.
Tensor swap_kernel_channels(const Tensor& kernels);

/// Gradient of conv2d_valid with respect to its kernels:
///   dK[c][r][s][k] = sum_{i,j} input[c][i+r][j+s] * grad_out[k][i][j]
Tensor conv2d_valid_kernel_grad(const Tensor& input, const Tensor& grad_out);

/// 2x2 stride-2 max pooling of a [k,h,w] tensor; h and w must be even. Ties
/// go to the smallest row-major offset inside the block.
Pooled maxpool2x2(const Tensor& input);

/// Uniform routing for random unpooling, shaped like `pooled_shape`.
PoolIndices random_routing(const Tensor::Shape& pooled_shape, Rng& rng);

/// Places every pooled value at one position of its 2x2 block and zeros the
/// other three. `recorded` uses `indices` (RangeError if null), `random` draws
/// the position from `rng`.
Tensor unpool2x2(const Tensor& pooled, UnpoolMode mode, const PoolIndices* indices,
                 Rng& rng);

/// Unpooling with a fixed routing. Also the gradient of maxpool2x2.
Tensor unpool2x2(const Tensor& pooled, const PoolIndices& routing);

/// Reads back the routed position of each 2x2 block; the adjoint of unpool.
Tensor gather2x2(const Tensor& full, const PoolIndices& routing);

/// x if x >= 0, slope * x otherwise.
Tensor leaky_relu(const Tensor& input, double slope);
/// Elementwise derivative: 1 where x >= 0, slope elsewhere.
Tensor leaky_relu_grad(const Tensor& input, double slope);

}  // namespace facies
