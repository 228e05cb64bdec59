#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "facies/baselines.hpp"
#include "facies/cae.hpp"
#include "facies/config.hpp"
#include "facies/features.hpp"
#include "facies/io.hpp"
#include "facies/synth.hpp"

namespace facies {

/// Synthetic survey for the configured grid, window and seed.
SyntheticSurvey synthesize(const RunConfig& cfg);

/// Model input extents for windows of `window_shape` ([1,h,w]): each
/// spatial extent is grown to the nearest size the layer stack accepts.
std::array<std::size_t, 3> model_input_shape(const Tensor::Shape& window_shape,
                                             const RunConfig& cfg);

/// Fresh, untrained model for the grid's window shape.
CaeModel build_model(const SurveyGrid& grid, const RunConfig& cfg);

/// Workflow steps 1-2: standardize and pad every window, then train.
TrainResult train_on_grid(const SurveyGrid& grid, const RunConfig& cfg);

/// Number of windows with at least one trace lacking a crest or trough.
std::size_t count_flagged_windows(const SurveyGrid& grid);

/// Step 4: clusters the rows and lays the labels out on the map grid.
LabelGrid cluster_to_map(const FeatureMatrix& features, const RunConfig& cfg,
                         std::size_t threads = 1);

/// Poststack baseline features: one standardized stacked trace per window.
FeatureMatrix poststack_features(const SurveyGrid& grid);

/// PCA baseline features: flattened standardized windows projected onto the
/// components that retain cfg.pca_threshold of the variance.
FeatureMatrix pca_features(const SurveyGrid& grid, const RunConfig& cfg,
                           PcaModel* fitted = nullptr);

/// Flattened standardized windows, one row per window.
FeatureMatrix flattened_windows(const SurveyGrid& grid);

}  // namespace facies
