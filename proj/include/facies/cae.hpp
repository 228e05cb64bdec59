#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "facies/tensor.hpp"

namespace facies {

enum class DecoderActivation : std::uint8_t { identity, leaky };

/// One convolutional autoencoder layer.
///
/// Encoder:  Y = leaky(pool(conv2d_valid(X, W) + b))
/// Decoder:  Z = act(conv2d_full(unpool(Y), swap(flip180(W))) + c)
///
/// The encoder correlates with W; the decoder uses the same bank flipped and
/// with its channel axes swapped, which makes it the transpose of the encoder
/// convolution.
struct CaeLayer {
  Tensor filters;                     // [c, n, n, k]
  std::vector<double> encoder_bias;   // k, broadcast over each feature map
  std::vector<double> decoder_bias;   // c, one per reconstruction channel
  double slope = 0.01;
  bool pooled = true;
  DecoderActivation decoder_activation = DecoderActivation::identity;

  std::size_t in_channels() const { return filters.extent(0); }
  std::size_t kernel_size() const { return filters.extent(1); }
  std::size_t maps() const { return filters.extent(3); }

  /// Throws ShapeError/RangeError on inconsistent extents or a bad slope.
  void validate() const;
};

struct CaeModel {
  std::array<std::size_t, 3> input_shape{1, 1, 1};  // c, h, w
  std::vector<CaeLayer> layers;
  UnpoolMode unpool_mode = UnpoolMode::random;

  /// Checks that channels chain and every pooled layer sees even extents.
  void validate() const;
  /// Shape of layer `index`'s features for the model input shape.
  std::array<std::size_t, 3> feature_shape(std::size_t index) const;
  /// Length of extract_features() output.
  std::size_t feature_length() const;
};

struct TrainConfig {
  double learning_rate = 0.02;
  std::size_t epochs = 30;
  double corruption_prob = 0.05;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  double slope = 0.01;
  /// Divide each step by the number of entries per example, so lr applies to
  /// the per-entry mean squared error. The reported loss keeps the
  /// per-example sum either way.
  bool per_entry_step = true;

  void validate() const;
};

struct Encoded {
  Tensor features;
  PoolIndices indices;  // empty for unpooled layers
};

/// Intermediate values of one encode/decode pass, kept for backprop.
struct LayerForward {
  Tensor pre_pool;      // conv + bias
  PoolIndices indices;  // argmax of pre_pool
  PoolIndices routing;  // positions used by the decoder's unpooling
  Tensor pre_activation;
  Tensor features;
  Tensor unpooled;
  Tensor pre_output;
  Tensor reconstruction;
};

struct LayerGradients {
  Tensor filters;
  std::vector<double> encoder_bias;
  std::vector<double> decoder_bias;
  double loss = 0.0;  // 0.5 * ||clean - reconstruction||^2 for this example
};

struct TrainResult {
  CaeModel model;
  std::vector<std::vector<double>> loss_history;  // [layer][epoch]
};

/// Uniform fan-in/fan-out initialisation in [-s, s], s = sqrt(6 / (c n^2 + k n^2)).
/// Biases start at zero.
CaeLayer init_layer(std::size_t in_channels, std::size_t kernel_size, std::size_t maps,
                    std::uint64_t seed);

/// Builds a model of `layer_count` identical-width layers for the given input.
CaeModel make_model(std::array<std::size_t, 3> input_shape, std::size_t layer_count,
                    std::size_t kernel_size, std::size_t maps, double slope,
                    std::uint64_t seed);

/// Smallest extent >= `extent` that survives `layer_count` rounds of
/// valid convolution (kernel_size) followed by 2x2 pooling.
std::size_t smallest_accepted_extent(std::size_t extent, std::size_t kernel_size,
                                     std::size_t layer_count);

Encoded encode(const CaeLayer& layer, const Tensor& input);

Tensor decode(const CaeLayer& layer, const Tensor& features, const PoolIndices& indices,
              UnpoolMode mode, Rng& rng);

/// Full pass. `routing` overrides the recorded argmax positions in the
/// decoder; pass nullptr for recorded unpooling.
LayerForward forward(const CaeLayer& layer, const Tensor& input,
                     const PoolIndices* routing = nullptr);

/// Zeroes each entry independently with probability p.
Tensor corrupt(const Tensor& input, double p, Rng& rng);

/// L = 1/(2n) sum_i ||X_i - Z_i||^2 where n is the number of examples
/// (the leading extent of a rank-4 batch, 1 otherwise).
double mse_loss(const Tensor& clean, const Tensor& reconstruction);
double mse_loss(std::span<const Tensor> clean, std::span<const Tensor> reconstruction);

/// Gradients of 0.5 * ||clean - decode(encode(corrupted))||^2 with respect to
/// W, b and c. Unpooling follows `routing` when given, the recorded argmax
/// otherwise.
LayerGradients backward(const CaeLayer& layer, const Tensor& clean, const Tensor& corrupted,
                        const PoolIndices* routing = nullptr);

/// Greedy layer-wise denoising training with plain SGD. Layer l learns to
/// reconstruct the clean outputs of the frozen layers below it.
TrainResult train_layerwise(CaeModel model, std::span<const Tensor> data,
                            const TrainConfig& cfg);

/// Runs the encoder stack and flattens the deepest maps (map, row, column).
std::vector<double> extract_features(const CaeModel& model, const Tensor& input);

}  // namespace facies
