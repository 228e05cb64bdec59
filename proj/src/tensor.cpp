#include "facies/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "facies/error.hpp"

namespace facies {
namespace {

std::size_t product(const Tensor::Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string describe(const Tensor::Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

void check_shape(const Tensor::Shape& shape) {
  if (shape.empty() || shape.size() > 4)
    throw ShapeError("tensor rank must be 1..4, got " + std::to_string(shape.size()));
  for (auto e : shape)
    if (e == 0) throw ShapeError("tensor extents must be >= 1, got " + describe(shape));
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank)
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) +
                     ", got " + describe(t.shape()));
}

void require_conv_args(const Tensor& input, const Tensor& kernels, const char* what) {
  require_rank(input, 3, what);
  require_rank(kernels, 4, what);
  if (kernels.extent(1) != kernels.extent(2))
    throw ShapeError(std::string(what) + ": kernels must be square, got " +
                     describe(kernels.shape()));
  if (kernels.extent(0) != input.extent(0))
    throw ShapeError(std::string(what) + ": input has " + std::to_string(input.extent(0)) +
                     " channels but kernels expect " + std::to_string(kernels.extent(0)));
}

}  // namespace

Tensor::Tensor() : shape_{1}, data_(1, 0.0) {}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (product(shape_) != data_.size())
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match extents " + describe(shape_));
  if (!all_finite()) throw RangeError("tensor data contains non-finite values");
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor conv2d_valid(const Tensor& input, const Tensor& kernels) {
  require_conv_args(input, kernels, "conv2d_valid");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  const std::size_t n = kernels.extent(1), k = kernels.extent(3);
  if (h < n || w < n)
    throw ShapeError("conv2d_valid: kernel " + std::to_string(n) + "x" + std::to_string(n) +
                     " exceeds input " + describe(input.shape()));
  const std::size_t oh = h - n + 1, ow = w - n + 1;
  Tensor out({k, oh, ow});
  for (std::size_t kk = 0; kk < k; ++kk)
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) {
          const double wt = kernels.at(ci, r, s, kk);
          for (std::size_t i = 0; i < oh; ++i) {
            const double* src = &input.data()[(ci * h + i + r) * w + s];
            double* dst = &out.data()[(kk * oh + i) * ow];
            for (std::size_t j = 0; j < ow; ++j) dst[j] += wt * src[j];
          }
        }
  return out;
}

Tensor conv2d_full(const Tensor& input, const Tensor& kernels) {
  require_conv_args(input, kernels, "conv2d_full");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  const std::size_t n = kernels.extent(1), k = kernels.extent(3);
  const std::size_t oh = h + n - 1, ow = w + n - 1;
  Tensor out({k, oh, ow});
  // out[i][j] reads input[i-(n-1)+r][j-(n-1)+s]; equivalently each input
  // sample scatters into out[p+(n-1)-r][q+(n-1)-s].
  for (std::size_t kk = 0; kk < k; ++kk)
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) {
          const double wt = kernels.at(ci, r, s, kk);
          const std::size_t di = n - 1 - r, dj = n - 1 - s;
          for (std::size_t p = 0; p < h; ++p) {
            const double* src = &input.data()[(ci * h + p) * w];
            double* dst = &out.data()[(kk * oh + p + di) * ow + dj];
            for (std::size_t q = 0; q < w; ++q) dst[q] += wt * src[q];
          }
        }
  return out;
}

Tensor flip180(const Tensor& kernels) {
  require_rank(kernels, 4, "flip180");
  const std::size_t c = kernels.extent(0), nh = kernels.extent(1), nw = kernels.extent(2),
                    k = kernels.extent(3);
  Tensor out(kernels.shape());
  for (std::size_t ci = 0; ci < c; ++ci)
    for (std::size_t r = 0; r < nh; ++r)
      for (std::size_t s = 0; s < nw; ++s)
        for (std::size_t kk = 0; kk < k; ++kk)
          out.at(ci, r, s, kk) = kernels.at(ci, nh - 1 - r, nw - 1 - s, kk);
  return out;
}

Tensor swap_kernel_channels(const Tensor& kernels) {
  require_rank(kernels, 4, "swap_kernel_channels");
  const std::size_t c = kernels.extent(0), nh = kernels.extent(1), nw = kernels.extent(2),
                    k = kernels.extent(3);
  Tensor out({k, nh, nw, c});
  for (std::size_t ci = 0; ci < c; ++ci)
    for (std::size_t r = 0; r < nh; ++r)
      for (std::size_t s = 0; s < nw; ++s)
        for (std::size_t kk = 0; kk < k; ++kk) out.at(kk, r, s, ci) = kernels.at(ci, r, s, kk);
  return out;
}

Tensor conv2d_valid_kernel_grad(const Tensor& input, const Tensor& grad_out) {
  require_rank(input, 3, "conv2d_valid_kernel_grad");
  require_rank(grad_out, 3, "conv2d_valid_kernel_grad");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  const std::size_t k = grad_out.extent(0), oh = grad_out.extent(1), ow = grad_out.extent(2);
  if (oh > h || ow > w || h - oh != w - ow)
    throw ShapeError("conv2d_valid_kernel_grad: output " + describe(grad_out.shape()) +
                     " is not a valid correlation of " + describe(input.shape()) +
                     " with a square kernel");
  const std::size_t n = h - oh + 1;
  Tensor dk({c, n, n, k});
  for (std::size_t ci = 0; ci < c; ++ci)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t kk = 0; kk < k; ++kk) {
          double acc = 0.0;
          for (std::size_t i = 0; i < oh; ++i) {
            const double* src = &input.data()[(ci * h + i + r) * w + s];
            const double* g = &grad_out.data()[(kk * oh + i) * ow];
            for (std::size_t j = 0; j < ow; ++j) acc += src[j] * g[j];
          }
          dk.at(ci, r, s, kk) = acc;
        }
  return dk;
}

Pooled maxpool2x2(const Tensor& input) {
  require_rank(input, 3, "maxpool2x2");
  const std::size_t k = input.extent(0), h = input.extent(1), w = input.extent(2);
  if (h % 2 != 0 || w % 2 != 0)
    throw ShapeError("maxpool2x2: spatial extents must be even, got " +
                     describe(input.shape()));
  const std::size_t ph = h / 2, pw = w / 2;
  Pooled out{Tensor({k, ph, pw}), PoolIndices{{k, ph, pw}, std::vector<std::uint8_t>(k * ph * pw)}};
  for (std::size_t kk = 0; kk < k; ++kk)
    for (std::size_t i = 0; i < ph; ++i)
      for (std::size_t j = 0; j < pw; ++j) {
        std::uint8_t best = 0;
        double best_value = input.at(kk, 2 * i, 2 * j);
        for (std::uint8_t o = 1; o < 4; ++o) {
          const double v = input.at(kk, 2 * i + o / 2, 2 * j + o % 2);
          if (v > best_value) {
            best_value = v;
            best = o;
          }
        }
        const std::size_t flat = (kk * ph + i) * pw + j;
        out.values[flat] = best_value;
        out.indices.offsets[flat] = best;
      }
  return out;
}

PoolIndices random_routing(const Tensor::Shape& pooled_shape, Rng& rng) {
  PoolIndices routing{pooled_shape, {}};
  std::size_t count = 1;
  for (auto e : pooled_shape) count *= e;
  routing.offsets.resize(count);
  std::uniform_int_distribution<int> pick(0, 3);
  for (auto& o : routing.offsets) o = static_cast<std::uint8_t>(pick(rng));
  return routing;
}

Tensor unpool2x2(const Tensor& pooled, const PoolIndices& routing) {
  require_rank(pooled, 3, "unpool2x2");
  if (routing.shape != pooled.shape())
    throw ShapeError("unpool2x2: routing shape " + describe(routing.shape) +
                     " does not match pooled " + describe(pooled.shape()));
  const std::size_t k = pooled.extent(0), ph = pooled.extent(1), pw = pooled.extent(2);
  Tensor out({k, 2 * ph, 2 * pw});
  for (std::size_t kk = 0; kk < k; ++kk)
    for (std::size_t i = 0; i < ph; ++i)
      for (std::size_t j = 0; j < pw; ++j) {
        const std::uint8_t o = routing.at(kk, i, j);
        if (o > 3) throw RangeError("unpool2x2: routing offset out of range");
        out.at(kk, 2 * i + o / 2, 2 * j + o % 2) = pooled.at(kk, i, j);
      }
  return out;
}

Tensor unpool2x2(const Tensor& pooled, UnpoolMode mode, const PoolIndices* indices,
                 Rng& rng) {
  if (mode == UnpoolMode::recorded) {
    if (indices == nullptr) throw RangeError("unpool2x2: recorded mode requires pool indices");
    return unpool2x2(pooled, *indices);
  }
  require_rank(pooled, 3, "unpool2x2");
  return unpool2x2(pooled, random_routing(pooled.shape(), rng));
}

Tensor gather2x2(const Tensor& full, const PoolIndices& routing) {
  require_rank(full, 3, "gather2x2");
  const std::size_t k = routing.shape.at(0), ph = routing.shape.at(1), pw = routing.shape.at(2);
  if (full.extent(0) != k || full.extent(1) != 2 * ph || full.extent(2) != 2 * pw)
    throw ShapeError("gather2x2: tensor " + describe(full.shape()) +
                     " is not twice the routing shape " + describe(routing.shape));
  Tensor out({k, ph, pw});
  for (std::size_t kk = 0; kk < k; ++kk)
    for (std::size_t i = 0; i < ph; ++i)
      for (std::size_t j = 0; j < pw; ++j) {
        const std::uint8_t o = routing.at(kk, i, j);
        out.at(kk, i, j) = full.at(kk, 2 * i + o / 2, 2 * j + o % 2);
      }
  return out;
}

Tensor leaky_relu(const Tensor& input, double slope) {
  Tensor out = input;
  for (auto& v : out.data())
    if (v < 0.0) v *= slope;
  return out;
}

Tensor leaky_relu_grad(const Tensor& input, double slope) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] >= 0.0 ? 1.0 : slope;
  return out;
}

}  // namespace facies
