#include "facies/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "facies/error.hpp"

namespace facies {
namespace {

double example_loss(const CaeLayer& layer, const Tensor& clean, const Tensor& corrupted) {
  const Tensor z = forward(layer, corrupted).reconstruction;
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = clean[i] - z[i];
    sum += d * d;
  }
  return 0.5 * sum;
}

void merge(GradCheckResult& into, const GradCheckResult& part) {
  into.components += part.components;
  into.failures += part.failures;
  if (part.max_relative_error >= into.max_relative_error) {
    into.max_relative_error = part.max_relative_error;
    into.worst = part.worst;
  }
}

}  // namespace

GradCheckResult check_layer_gradients(const CaeLayer& layer, const Tensor& clean,
                                      const Tensor& corrupted, double eps, double tolerance) {
  const LayerGradients analytic = backward(layer, clean, corrupted);
  CaeLayer probe = layer;
  GradCheckResult result;

  auto check = [&](double& param, double grad, const std::string& name) {
    const double saved = param;
    param = saved + eps;
    const double up = example_loss(probe, clean, corrupted);
    param = saved - eps;
    const double down = example_loss(probe, clean, corrupted);
    param = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double rel =
        std::abs(grad - numeric) / std::max({std::abs(grad), std::abs(numeric), 1e-8});
    ++result.components;
    if (!(rel < tolerance)) ++result.failures;
    if (rel >= result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst = name;
    }
  };

  for (std::size_t i = 0; i < probe.filters.size(); ++i)
    check(probe.filters[i], analytic.filters[i], "W[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < probe.encoder_bias.size(); ++i)
    check(probe.encoder_bias[i], analytic.encoder_bias[i], "b[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < probe.decoder_bias.size(); ++i)
    check(probe.decoder_bias[i], analytic.decoder_bias[i], "c[" + std::to_string(i) + "]");
  return result;
}

GradSuiteReport run_gradient_suite(const GradSuiteConfig& cfg) {
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  GradSuiteReport report;
  std::size_t built = 0;
  while (built < cfg.configurations) {
    const std::size_t channels = pick(1, 2);
    const std::size_t n = pick(0, 3) == 0 ? 1 : 3;
    const std::size_t layers = pick(1, cfg.max_layers);
    const std::size_t maps = pick(1, cfg.max_maps);
    std::vector<std::size_t> extents;
    for (std::size_t e = n; e <= cfg.max_extent; ++e)
      if (smallest_accepted_extent(e, n, layers) == e) extents.push_back(e);
    if (extents.empty()) continue;
    const std::size_t h = extents[pick(0, extents.size() - 1)];
    const std::size_t w = extents[pick(0, extents.size() - 1)];
    CaeModel model = make_model({channels, h, w}, layers, n, maps,
                                0.01 + 0.3 * static_cast<double>(pick(0, 3)) / 3.0, rng());
    for (auto& layer : model.layers) {
      for (auto& b : layer.encoder_bias) b = 0.1 * normal(rng);
      for (auto& c : layer.decoder_bias) c = 0.1 * normal(rng);
      if (pick(0, 1) == 1)
        layer.decoder_activation = layer.decoder_activation == DecoderActivation::leaky
                                       ? DecoderActivation::identity
                                       : DecoderActivation::leaky;
    }
    ++built;

    Tensor x({channels, h, w});
    for (auto& v : x.data()) v = normal(rng);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const CaeLayer& layer = model.layers[l];
      const Tensor noisy = corrupt(x, 0.1, rng);
      const GradCheckResult r = check_layer_gradients(layer, x, noisy, cfg.eps, cfg.tolerance);
      std::ostringstream desc;
      desc << "input " << x.extent(0) << "x" << x.extent(1) << "x" << x.extent(2) << " layer "
           << l + 1 << "/" << model.layers.size() << " n=" << n << " maps=" << maps
           << " decoder=" << (layer.decoder_activation == DecoderActivation::leaky ? "leaky" : "identity")
           << ": " << r.components << " components, max rel err " << r.max_relative_error;
      report.cases.push_back(desc.str());
      merge(report.total, r);
      x = encode(layer, x).features;
    }
  }
  return report;
}

}  // namespace facies
