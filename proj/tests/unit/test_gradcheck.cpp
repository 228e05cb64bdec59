#include <gtest/gtest.h>

#include "facies/gradcheck.hpp"
#include "oracles.hpp"

namespace {

TEST(GradCheck, DetectsAWrongGradient) {
  // With a huge step the differences straddle activation and pooling kinks,
  // so the checker has to report mismatches.
  facies::Rng rng(1);
  facies::CaeLayer layer = facies::init_layer(1, 3, 2, 4);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto& b : layer.encoder_bias) b = u(rng);
  for (auto& b : layer.decoder_bias) b = u(rng);
  layer.decoder_activation = facies::DecoderActivation::leaky;
  const auto x = oracle::random_tensor({1, 6, 6}, rng);
  const auto coarse = facies::check_layer_gradients(layer, x, x, 5.0, 1e-4);
  EXPECT_GT(coarse.failures, 0u);
  const auto fine = facies::check_layer_gradients(layer, x, x);
  EXPECT_EQ(fine.failures, 0u);
}

TEST(GradCheck, SuiteIsDeterministicAndPasses) {
  facies::GradSuiteConfig cfg;
  cfg.configurations = 5;
  cfg.seed = 3;
  const auto a = facies::run_gradient_suite(cfg);
  const auto b = facies::run_gradient_suite(cfg);
  EXPECT_TRUE(a.passed()) << a.total.worst << " " << a.total.max_relative_error;
  EXPECT_EQ(a.cases, b.cases);
  EXPECT_EQ(a.total.components, b.total.components);
  EXPECT_EQ(a.total.max_relative_error, b.total.max_relative_error);
}

}  // namespace
