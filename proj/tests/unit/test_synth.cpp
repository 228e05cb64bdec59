#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "facies/baselines.hpp"
#include "facies/error.hpp"
#include "facies/synth.hpp"

namespace {

using facies::LabelGrid;
using facies::ModelLayout;

ModelLayout quiet_layout() {
  ModelLayout layout = facies::default_layout(0, 20, 20, 12);
  layout.noise_sigma = 0.0;
  return layout;
}

TEST(Ricker, PeakAndZeroCrossing) {
  EXPECT_EQ(facies::ricker(0.0, 30.0), 1.0);
  const double zero = 1.0 / (std::numbers::pi * 30.0 * std::sqrt(2.0));
  EXPECT_NEAR(facies::ricker(zero, 30.0), 0.0, 1e-14);
  EXPECT_EQ(facies::ricker(0.01, 25.0), facies::ricker(-0.01, 25.0));
  EXPECT_LT(facies::ricker(0.02, 30.0), 0.0);
}

TEST(OffsetAngle, LinearToMaximum) {
  EXPECT_EQ(facies::offset_angle_rad(0, 24, 40.0), 0.0);
  EXPECT_NEAR(facies::offset_angle_rad(23, 24, 40.0), 40.0 * std::numbers::pi / 180.0, 1e-15);
  EXPECT_NEAR(facies::offset_angle_rad(1, 3, 40.0), 20.0 * std::numbers::pi / 180.0, 1e-15);
}

TEST(ClassGather, ZeroGradientGivesIdenticalTraces) {
  const ModelLayout layout = quiet_layout();
  ASSERT_EQ(layout.classes[0].avo_gradient, 0.0);
  const auto g = facies::class_gather(layout, 0, 40, 12, 2.0);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t o = 1; o < 12; ++o) EXPECT_EQ(g.at(0, i, o), g.at(0, i, 0));
}

TEST(ClassGather, StacksMatchButPrestackDiffers) {
  const ModelLayout layout = quiet_layout();
  std::vector<facies::Tensor> gathers;
  for (std::size_t c = 0; c < 3; ++c) gathers.push_back(facies::class_gather(layout, c, 40, 12, 2.0));
  for (std::size_t c = 1; c < 3; ++c) {
    double stack_gap = 0.0, prestack_gap = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
      double s0 = 0.0, sc = 0.0;
      for (std::size_t o = 0; o < 12; ++o) {
        s0 += gathers[0].at(0, i, o) / 12.0;
        sc += gathers[c].at(0, i, o) / 12.0;
        prestack_gap = std::max(prestack_gap, std::abs(gathers[0].at(0, i, o) - gathers[c].at(0, i, o)));
      }
      stack_gap = std::max(stack_gap, std::abs(s0 - sc));
    }
    EXPECT_LT(stack_gap, 1e-12);
    EXPECT_GT(prestack_gap, 0.1);
  }
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) EXPECT_NE(gathers[a], gathers[b]);
}

TEST(Rasterize, DiscAreaNearPiRSquared) {
  ModelLayout layout;
  layout.inlines = 60;
  layout.crosslines = 60;
  layout.classes = {facies::ClassParams{}, facies::ClassParams{}};
  for (double r : {2.0, 4.5, 10.0, 17.0}) {
    layout.discs = {facies::Disc{30.0, 30.0, r, 1}};
    const LabelGrid grid = facies::rasterize(layout);
    const auto cells = static_cast<double>(std::count(grid.labels.begin(), grid.labels.end(), 1u));
    const double area = std::numbers::pi * r * r;
    EXPECT_LE(std::abs(cells - area), 2.0 * std::numbers::pi * r * std::sqrt(2.0)) << "r=" << r;
  }
}

TEST(Rasterize, RiverOverCavesOverBackground) {
  ModelLayout layout;
  layout.inlines = 10;
  layout.crosslines = 10;
  layout.classes = {facies::ClassParams{}, facies::ClassParams{}, facies::ClassParams{}};
  layout.discs = {facies::Disc{5.0, 5.0, 3.0, 1}};
  facies::Strip strip;
  strip.vertices = {{0.0, 5.0}, {9.0, 5.0}};
  strip.width = 2.0;
  layout.strips = {strip};
  const LabelGrid grid = facies::rasterize(layout);
  EXPECT_EQ(grid.at(5, 5), 2u);
  EXPECT_EQ(grid.at(5, 7), 1u);
  EXPECT_EQ(grid.at(0, 0), 0u);
  EXPECT_EQ(grid.at(0, 5), 2u);
}

TEST(Layout, DefaultHasThreeClassesAndFeatures) {
  const ModelLayout layout = facies::default_layout();
  EXPECT_EQ(layout.classes.size(), 3u);
  EXPECT_GE(layout.discs.size(), 5u + 3u);
  EXPECT_EQ(layout.strips.size(), 1u);
  EXPECT_EQ(layout.strips[0].width, 2.0);
  const LabelGrid grid = facies::rasterize(layout);
  std::vector<std::size_t> counts(3, 0);
  for (auto l : grid.labels) ++counts[l];
  for (auto c : counts) EXPECT_GT(c, 40u);
}

TEST(Layout, ValidateRejectsBadLayouts) {
  ModelLayout layout = facies::default_layout();
  layout.discs.push_back(facies::Disc{100.0, 0.0, 2.0, 1});
  EXPECT_THROW(layout.validate(), facies::RangeError);
  layout = facies::default_layout();
  layout.discs[0].class_id = 7;
  EXPECT_THROW(layout.validate(), facies::RangeError);
  layout = facies::default_layout();
  layout.noise_sigma = -1.0;
  EXPECT_THROW(layout.validate(), facies::RangeError);
}

TEST(NoiseForSnr, MeanTraceRmsOverSnr) {
  const ModelLayout layout = quiet_layout();
  double rms = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto g = facies::class_gather(layout, c, 24, 12, 2.0);
    double ss = 0.0;
    for (double v : g.data()) ss += v * v;
    rms += std::sqrt(ss / g.size()) / 3.0;
  }
  EXPECT_NEAR(facies::noise_for_snr(layout, 2.0, 48.0, 12, 10.0), rms / 10.0, 1e-15);
}

TEST(GenerateSurvey, NoiseFreeCellsOfOneClassAreIdentical) {
  const auto s = facies::generate_survey(quiet_layout(), 2.0, 48.0, 12);
  EXPECT_EQ(s.cube.samples, 24u + 16u);
  EXPECT_EQ(s.grid.windows.size(), 400u);
  std::vector<const facies::Tensor*> first(3, nullptr);
  for (std::size_t il = 0; il < 20; ++il)
    for (std::size_t xl = 0; xl < 20; ++xl) {
      const auto cls = s.labels.at(il, xl);
      const auto& w = s.grid.at(il, xl).samples;
      if (!first[cls]) first[cls] = &w;
      else EXPECT_EQ(w, *first[cls]);
    }
  // Windows are centred on the wavelet peak.
  EXPECT_EQ(s.grid.at(0, 0).samples.extent(1), 24u);
  const auto& w = *first[0];
  EXPECT_NEAR(w.at(0, 12, 0), facies::default_layout(0, 20, 20, 12).classes[0].amplitude, 1e-12);
}

TEST(GenerateSurvey, DeterministicPerSeed) {
  const auto layout = facies::default_layout(5, 16, 16, 8);
  const auto a = facies::generate_survey(layout, 2.0, 48.0, 8);
  const auto b = facies::generate_survey(layout, 2.0, 48.0, 8);
  EXPECT_EQ(a.cube.data, b.cube.data);
  EXPECT_EQ(a.labels, b.labels);
  const auto c = facies::generate_survey(facies::default_layout(6, 16, 16, 8), 2.0, 48.0, 8);
  EXPECT_NE(a.cube.data, c.cube.data);
}

LabelGrid grid_of(std::size_t il, std::size_t xl, std::vector<std::size_t> labels) {
  return LabelGrid{il, xl, std::move(labels)};
}

TEST(ScoreMap, Examples) {
  const LabelGrid truth = grid_of(2, 3, {0, 0, 1, 1, 2, 2});
  EXPECT_EQ(facies::score_map(truth, truth).accuracy, 1.0);
  const LabelGrid permuted = grid_of(2, 3, {2, 2, 0, 0, 1, 1});
  const auto s = facies::score_map(permuted, truth);
  EXPECT_EQ(s.accuracy, 1.0);
  EXPECT_EQ(s.mapping, (std::vector<std::size_t>{1, 2, 0}));
  for (double r : s.class_recall) EXPECT_EQ(r, 1.0);
  EXPECT_THROW(facies::score_map(grid_of(3, 2, truth.labels), truth), facies::ShapeError);
}

TEST(ScoreMap, TwoClassRandomMapsAtLeastHalf) {
  facies::Rng rng(1);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 50; ++t) {
    LabelGrid a = grid_of(7, 9, std::vector<std::size_t>(63)), b = a;
    for (auto& l : a.labels) l = coin(rng);
    for (auto& l : b.labels) l = coin(rng);
    a.labels[0] = 1;
    b.labels[0] = 1;
    EXPECT_GE(facies::score_map(a, b).accuracy, 0.5);
  }
}

TEST(ScoreMap, HungarianMatchesExhaustivePermutations) {
  facies::Rng rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, 3);
  for (int t = 0; t < 40; ++t) {
    LabelGrid pred = grid_of(6, 6, std::vector<std::size_t>(36)), truth = pred;
    for (std::size_t i = 0; i < 36; ++i) {
      truth.labels[i] = pick(rng);
      pred.labels[i] = (truth.labels[i] + (pick(rng) == 0 ? pick(rng) : 1)) % 4;
    }
    pred.labels[0] = truth.labels[0] = 3;
    std::vector<std::size_t> perm = {0, 1, 2, 3};
    std::size_t best = 0;
    do {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < 36; ++i) hits += perm[pred.labels[i]] == truth.labels[i];
      best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_DOUBLE_EQ(facies::score_map(pred, truth).accuracy, best / 36.0);
  }
}

TEST(ScoreMap, InvariantUnderRelabelling) {
  facies::Rng rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, 2);
  LabelGrid pred = grid_of(8, 8, std::vector<std::size_t>(64)), truth = pred;
  for (auto& l : pred.labels) l = pick(rng);
  for (auto& l : truth.labels) l = pick(rng);
  pred.labels[0] = truth.labels[0] = 2;
  LabelGrid relabelled = pred;
  for (auto& l : relabelled.labels) l = (l + 1) % 3;
  EXPECT_EQ(facies::score_map(pred, truth).accuracy, facies::score_map(relabelled, truth).accuracy);
}

TEST(Assignment, RectangularProblems) {
  const std::vector<std::vector<double>> wide = {{1, 5, 2}, {4, 6, 0}};
  EXPECT_EQ(facies::max_weight_assignment(wide), (std::vector<std::size_t>{1, 0}));
  const std::vector<std::vector<double>> tall = {{3}, {7}, {1}};
  EXPECT_EQ(facies::max_weight_assignment(tall), (std::vector<std::size_t>{1, 0, 1}));
}

}  // namespace
