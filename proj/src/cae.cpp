#include "facies/cae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "facies/error.hpp"

namespace facies {
namespace {

void add_channel_bias(Tensor& t, std::span<const double> bias) {
  const std::size_t plane = t.extent(1) * t.extent(2);
  for (std::size_t ch = 0; ch < t.extent(0); ++ch) {
    auto values = t.data().subspan(ch * plane, plane);
    for (auto& v : values) v += bias[ch];
  }
}

std::vector<double> channel_sums(const Tensor& t) {
  const std::size_t plane = t.extent(1) * t.extent(2);
  std::vector<double> sums(t.extent(0), 0.0);
  for (std::size_t ch = 0; ch < t.extent(0); ++ch) {
    auto values = t.data().subspan(ch * plane, plane);
    sums[ch] = std::accumulate(values.begin(), values.end(), 0.0);
  }
  return sums;
}

Tensor hadamard(Tensor a, const Tensor& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  return a;
}

Tensor decoder_bank(const CaeLayer& layer) {
  return swap_kernel_channels(flip180(layer.filters));
}

Tensor finish_decoder(const CaeLayer& layer, const Tensor& unpooled, Tensor* pre_output) {
  Tensor s = conv2d_full(unpooled, decoder_bank(layer));
  add_channel_bias(s, layer.decoder_bias);
  Tensor z = layer.decoder_activation == DecoderActivation::leaky ? leaky_relu(s, layer.slope) : s;
  if (pre_output != nullptr) *pre_output = std::move(s);
  return z;
}

void require_input(const CaeLayer& layer, const Tensor& x) {
  if (x.rank() != 3 || x.extent(0) != layer.in_channels())
    throw ShapeError("layer expects " + std::to_string(layer.in_channels()) +
                     "-channel rank-3 input");
}

std::size_t layer_output_extent(std::size_t extent, std::size_t n, bool pooled) {
  if (extent < n) return 0;
  const std::size_t conv = extent - n + 1;
  if (!pooled) return conv;
  return conv % 2 == 0 ? conv / 2 : 0;
}

}  // namespace

void CaeLayer::validate() const {
  if (filters.rank() != 4 || filters.extent(1) != filters.extent(2))
    throw ShapeError("layer filters must be a square [c,n,n,k] bank");
  if (kernel_size() % 2 == 0) throw ShapeError("layer kernel size must be odd");
  if (encoder_bias.size() != maps())
    throw ShapeError("encoder bias length must equal the number of maps");
  if (decoder_bias.size() != in_channels())
    throw ShapeError("decoder bias length must equal the number of input channels");
  if (!(slope > 0.0 && slope <= 1.0)) throw RangeError("activation slope must lie in (0, 1]");
}

void CaeModel::validate() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  std::size_t c = input_shape[0], h = input_shape[1], w = input_shape[2];
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    layer.validate();
    if (layer.in_channels() != c)
      throw ShapeError("layer " + std::to_string(l) + " expects " +
                       std::to_string(layer.in_channels()) + " channels, receives " +
                       std::to_string(c));
    const std::size_t n = layer.kernel_size();
    const std::size_t nh = layer_output_extent(h, n, layer.pooled);
    const std::size_t nw = layer_output_extent(w, n, layer.pooled);
    if (nh == 0 || nw == 0)
      throw ShapeError("layer " + std::to_string(l) + " cannot process a " + std::to_string(h) +
                       "x" + std::to_string(w) + " input (needs >= kernel and even conv output)");
    c = layer.maps();
    h = nh;
    w = nw;
  }
}

std::array<std::size_t, 3> CaeModel::feature_shape(std::size_t index) const {
  std::size_t c = input_shape[0], h = input_shape[1], w = input_shape[2];
  for (std::size_t l = 0; l <= index; ++l) {
    const auto& layer = layers.at(l);
    h = layer_output_extent(h, layer.kernel_size(), layer.pooled);
    w = layer_output_extent(w, layer.kernel_size(), layer.pooled);
    c = layer.maps();
  }
  return {c, h, w};
}

std::size_t CaeModel::feature_length() const {
  const auto s = feature_shape(layers.size() - 1);
  return s[0] * s[1] * s[2];
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw RangeError("learning_rate must be > 0");
  if (!(corruption_prob >= 0.0 && corruption_prob < 1.0))
    throw RangeError("corruption_prob must lie in [0, 1)");
  if (batch_size == 0) throw RangeError("batch_size must be >= 1");
  if (!(slope > 0.0 && slope <= 1.0)) throw RangeError("slope must lie in (0, 1]");
}

CaeLayer init_layer(std::size_t in_channels, std::size_t kernel_size, std::size_t maps,
                    std::uint64_t seed) {
  if (in_channels == 0 || kernel_size == 0 || maps == 0)
    throw RangeError("init_layer: extents must be positive");
  const double fan_in = static_cast<double>(in_channels * kernel_size * kernel_size);
  const double fan_out = static_cast<double>(maps * kernel_size * kernel_size);
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  CaeLayer layer;
  layer.filters = Tensor({in_channels, kernel_size, kernel_size, maps});
  for (auto& v : layer.filters.data()) v = dist(rng);
  layer.encoder_bias.assign(maps, 0.0);
  layer.decoder_bias.assign(in_channels, 0.0);
  return layer;
}

CaeModel make_model(std::array<std::size_t, 3> input_shape, std::size_t layer_count,
                    std::size_t kernel_size, std::size_t maps, double slope,
                    std::uint64_t seed) {
  CaeModel model;
  model.input_shape = input_shape;
  std::size_t channels = input_shape[0];
  std::seed_seq seq{seed, std::uint64_t{0x5eed}};
  std::vector<std::uint64_t> seeds(layer_count);
  seq.generate(seeds.begin(), seeds.end());
  for (std::size_t l = 0; l < layer_count; ++l) {
    CaeLayer layer = init_layer(channels, kernel_size, maps, seeds[l]);
    layer.slope = slope;
    // Only the first layer reconstructs signed amplitudes.
    layer.decoder_activation = l == 0 ? DecoderActivation::identity : DecoderActivation::leaky;
    model.layers.push_back(std::move(layer));
    channels = maps;
  }
  model.validate();
  return model;
}

std::size_t smallest_accepted_extent(std::size_t extent, std::size_t kernel_size,
                                     std::size_t layer_count) {
  for (std::size_t e = std::max(extent, kernel_size);; ++e) {
    std::size_t cur = e;
    bool ok = true;
    for (std::size_t l = 0; l < layer_count && ok; ++l) {
      cur = layer_output_extent(cur, kernel_size, true);
      ok = cur > 0;
    }
    if (ok) return e;
  }
}

LayerForward forward(const CaeLayer& layer, const Tensor& input, const PoolIndices* routing) {
  require_input(layer, input);
  LayerForward f;
  f.pre_pool = conv2d_valid(input, layer.filters);
  add_channel_bias(f.pre_pool, layer.encoder_bias);
  if (layer.pooled) {
    Pooled p = maxpool2x2(f.pre_pool);
    f.pre_activation = std::move(p.values);
    f.indices = std::move(p.indices);
    f.routing = routing != nullptr ? *routing : f.indices;
  } else {
    f.pre_activation = f.pre_pool;
  }
  f.features = leaky_relu(f.pre_activation, layer.slope);
  f.unpooled = layer.pooled ? unpool2x2(f.features, f.routing) : f.features;
  f.reconstruction = finish_decoder(layer, f.unpooled, &f.pre_output);
  return f;
}

Encoded encode(const CaeLayer& layer, const Tensor& input) {
  require_input(layer, input);
  Tensor a = conv2d_valid(input, layer.filters);
  add_channel_bias(a, layer.encoder_bias);
  if (!layer.pooled) return {leaky_relu(a, layer.slope), {}};
  Pooled p = maxpool2x2(a);
  return {leaky_relu(p.values, layer.slope), std::move(p.indices)};
}

Tensor decode(const CaeLayer& layer, const Tensor& features, const PoolIndices& indices,
              UnpoolMode mode, Rng& rng) {
  if (features.rank() != 3 || features.extent(0) != layer.maps())
    throw ShapeError("decode: features must be [" + std::to_string(layer.maps()) + ",h,w]");
  Tensor unpooled =
      layer.pooled ? unpool2x2(features, mode, mode == UnpoolMode::recorded ? &indices : nullptr, rng)
                   : features;
  return finish_decoder(layer, unpooled, nullptr);
}

Tensor corrupt(const Tensor& input, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw RangeError("corrupt: probability must lie in [0, 1)");
  Tensor out = input;
  if (p == 0.0) return out;
  std::bernoulli_distribution drop(p);
  for (auto& v : out.data())
    if (drop(rng)) v = 0.0;
  return out;
}

double mse_loss(const Tensor& clean, const Tensor& reconstruction) {
  if (clean.shape() != reconstruction.shape())
    throw ShapeError("mse_loss: shapes differ");
  const double n = clean.rank() == 4 ? static_cast<double>(clean.extent(0)) : 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = clean[i] - reconstruction[i];
    sum += d * d;
  }
  return sum / (2.0 * n);
}

double mse_loss(std::span<const Tensor> clean, std::span<const Tensor> reconstruction) {
  if (clean.size() != reconstruction.size() || clean.empty())
    throw ShapeError("mse_loss: batches must be nonempty and of equal length");
  double sum = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) sum += 2.0 * mse_loss(clean[i], reconstruction[i]);
  return sum / (2.0 * static_cast<double>(clean.size()));
}

LayerGradients backward(const CaeLayer& layer, const Tensor& clean, const Tensor& corrupted,
                        const PoolIndices* routing) {
  if (clean.shape() != corrupted.shape())
    throw ShapeError("backward: clean and corrupted inputs differ in shape");
  const LayerForward f = forward(layer, corrupted, routing);

  LayerGradients g;
  Tensor d_out = f.reconstruction;
  for (std::size_t i = 0; i < d_out.size(); ++i) {
    d_out[i] -= clean[i];
    g.loss += 0.5 * d_out[i] * d_out[i];
  }
  if (layer.decoder_activation == DecoderActivation::leaky)
    d_out = hadamard(std::move(d_out), leaky_relu_grad(f.pre_output, layer.slope));
  g.decoder_bias = channel_sums(d_out);

  // The decoder is the transpose of a valid correlation with W, so its input
  // gradient is a valid correlation of d_out with W again.
  Tensor d_unpooled = conv2d_valid(d_out, layer.filters);
  Tensor d_filters = conv2d_valid_kernel_grad(d_out, f.unpooled);

  Tensor d_features = layer.pooled ? gather2x2(d_unpooled, f.routing) : std::move(d_unpooled);
  Tensor d_pre_act = hadamard(std::move(d_features), leaky_relu_grad(f.pre_activation, layer.slope));
  Tensor d_pre_pool = layer.pooled ? unpool2x2(d_pre_act, f.indices) : std::move(d_pre_act);
  g.encoder_bias = channel_sums(d_pre_pool);

  Tensor d_enc = conv2d_valid_kernel_grad(corrupted, d_pre_pool);
  for (std::size_t i = 0; i < d_filters.size(); ++i) d_filters[i] += d_enc[i];
  g.filters = std::move(d_filters);
  return g;
}

TrainResult train_layerwise(CaeModel model, std::span<const Tensor> data,
                            const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw TrainingError("train_layerwise: empty dataset");
  for (auto& layer : model.layers) layer.slope = cfg.slope;
  model.validate();
  const auto& in = model.input_shape;
  for (const auto& x : data)
    if (x.shape() != Tensor::Shape{in[0], in[1], in[2]})
      throw ShapeError("train_layerwise: sample shape does not match the model input");

  TrainResult result;
  std::vector<Tensor> inputs(data.begin(), data.end());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    CaeLayer& layer = model.layers[l];
    std::seed_seq seq{cfg.seed, std::uint64_t{l}, std::uint64_t{0x7a1}};
    Rng rng(seq);
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> history;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double epoch_loss = 0.0;
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
        LayerGradients sum;
        for (std::size_t b = start; b < stop; ++b) {
          const Tensor& clean = inputs[order[b]];
          const Tensor noisy = corrupt(clean, cfg.corruption_prob, rng);
          PoolIndices routing;
          const PoolIndices* route = nullptr;
          if (layer.pooled && model.unpool_mode == UnpoolMode::random) {
            const std::size_t n = layer.kernel_size();
            routing = random_routing(
                {layer.maps(), (clean.extent(1) - n + 1) / 2, (clean.extent(2) - n + 1) / 2}, rng);
            route = &routing;
          }
          LayerGradients g = backward(layer, clean, noisy, route);
          if (b == start) {
            sum = std::move(g);
          } else {
            for (std::size_t i = 0; i < sum.filters.size(); ++i) sum.filters[i] += g.filters[i];
            for (std::size_t i = 0; i < sum.encoder_bias.size(); ++i)
              sum.encoder_bias[i] += g.encoder_bias[i];
            for (std::size_t i = 0; i < sum.decoder_bias.size(); ++i)
              sum.decoder_bias[i] += g.decoder_bias[i];
            sum.loss += g.loss;
          }
        }
        const double entries = cfg.per_entry_step ? static_cast<double>(inputs[0].size()) : 1.0;
        const double step = cfg.learning_rate / (static_cast<double>(stop - start) * entries);
        for (std::size_t i = 0; i < sum.filters.size(); ++i) layer.filters[i] -= step * sum.filters[i];
        for (std::size_t i = 0; i < sum.encoder_bias.size(); ++i)
          layer.encoder_bias[i] -= step * sum.encoder_bias[i];
        for (std::size_t i = 0; i < sum.decoder_bias.size(); ++i)
          layer.decoder_bias[i] -= step * sum.decoder_bias[i];
        epoch_loss += sum.loss;
      }
      epoch_loss /= static_cast<double>(inputs.size());
      if (!std::isfinite(epoch_loss) || !layer.filters.all_finite())
        throw TrainingError("training diverged at layer " + std::to_string(l) + ", epoch " +
                            std::to_string(epoch) + " (non-finite loss)");
      history.push_back(epoch_loss);
    }
    result.loss_history.push_back(std::move(history));

    if (l + 1 < model.layers.size())
      for (auto& x : inputs) x = encode(layer, x).features;
  }
  result.model = std::move(model);
  return result;
}

std::vector<double> extract_features(const CaeModel& model, const Tensor& input) {
  const auto& in = model.input_shape;
  if (input.shape() != Tensor::Shape{in[0], in[1], in[2]})
    throw ShapeError("extract_features: input shape does not match the model");
  Tensor x = input;
  for (const auto& layer : model.layers) x = encode(layer, x).features;
  return x.values();
}

}  // namespace facies
