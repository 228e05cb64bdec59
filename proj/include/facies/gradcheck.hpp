#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "facies/cae.hpp"

namespace facies {

struct GradCheckResult {
  std::size_t components = 0;
  std::size_t failures = 0;
  double max_relative_error = 0.0;
  std::string worst;  // parameter name of the worst component
};

/// Compares backward() against central finite differences of the per-example
/// loss 0.5 * ||clean - forward(corrupted).reconstruction||^2 for every
/// filter, encoder-bias and decoder-bias component, with recorded unpooling.
/// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
GradCheckResult check_layer_gradients(const CaeLayer& layer, const Tensor& clean,
                                      const Tensor& corrupted, double eps = 1e-5,
                                      double tolerance = 1e-4);

struct GradSuiteConfig {
  std::size_t configurations = 20;
  std::size_t max_extent = 12;
  std::size_t max_layers = 2;
  std::size_t max_maps = 4;
  double eps = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
};

struct GradSuiteReport {
  std::vector<std::string> cases;  // one description per checked layer
  GradCheckResult total;
  bool passed() const { return total.failures == 0 && total.components > 0; }
};

/// Random small models (input <= max_extent square-or-not, <= max_layers,
/// <= max_maps). Every layer of every model is checked on the clean encoder
/// output of the layers below it, as in layer-wise training.
GradSuiteReport run_gradient_suite(const GradSuiteConfig& cfg);

}  // namespace facies
