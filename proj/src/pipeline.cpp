#include "facies/pipeline.hpp"

#include "facies/clustering.hpp"
#include "facies/error.hpp"

namespace facies {

SyntheticSurvey synthesize(const RunConfig& cfg) {
  cfg.validate();
  ModelLayout layout =
      default_layout(cfg.seed, cfg.inlines, cfg.crosslines, cfg.offsets, cfg.dt_ms, cfg.window_ms);
  layout.noise_sigma = noise_for_snr(layout, cfg.dt_ms, cfg.window_ms, cfg.offsets, cfg.snr);
  return generate_survey(layout, cfg.dt_ms, cfg.window_ms, cfg.offsets);
}

std::array<std::size_t, 3> model_input_shape(const Tensor::Shape& window_shape,
                                             const RunConfig& cfg) {
  if (window_shape.size() != 3) throw ShapeError("window must be [c,h,w]");
  return {window_shape[0], smallest_accepted_extent(window_shape[1], cfg.filter_size, cfg.layers),
          smallest_accepted_extent(window_shape[2], cfg.filter_size, cfg.layers)};
}

CaeModel build_model(const SurveyGrid& grid, const RunConfig& cfg) {
  cfg.validate();
  grid.validate();
  CaeModel model = make_model(model_input_shape(grid.windows.front().samples.shape(), cfg),
                              cfg.layers, cfg.filter_size, cfg.maps, cfg.slope, cfg.seed);
  model.unpool_mode = cfg.unpool_mode;
  if (cfg.decoder_activation != DecoderActivationPolicy::automatic)
    for (auto& layer : model.layers)
      layer.decoder_activation = cfg.decoder_activation == DecoderActivationPolicy::leaky
                                     ? DecoderActivation::leaky
                                     : DecoderActivation::identity;
  return model;
}

TrainResult train_on_grid(const SurveyGrid& grid, const RunConfig& cfg) {
  CaeModel model = build_model(grid, cfg);
  std::vector<Tensor> inputs;
  inputs.reserve(grid.windows.size());
  for (const auto& w : grid.windows) inputs.push_back(model_input(w, model.input_shape));
  return train_layerwise(std::move(model), inputs, cfg.train_config());
}

std::size_t count_flagged_windows(const SurveyGrid& grid) {
  std::size_t flagged = 0;
  for (const auto& w : grid.windows)
    if (!validate_window(w).ok()) ++flagged;
  return flagged;
}

LabelGrid cluster_to_map(const FeatureMatrix& features, const RunConfig& cfg, std::size_t threads) {
  const ClusterResult result = cluster(features.values, cfg.cluster_config(), threads);
  return label_grid_from_keys(features.keys, result.labels);
}

FeatureMatrix poststack_features(const SurveyGrid& grid) {
  grid.validate();
  std::vector<std::vector<double>> rows;
  FeatureMatrix out;
  for (const auto& w : grid.windows) {
    rows.push_back(stack_poststack(w));
    out.keys.emplace_back(w.inline_index, w.crossline_index);
  }
  out.values = matrix_from_rows(rows);
  return out;
}

FeatureMatrix flattened_windows(const SurveyGrid& grid) {
  grid.validate();
  std::vector<std::vector<double>> rows;
  FeatureMatrix out;
  for (const auto& w : grid.windows) {
    rows.push_back(standardize(w.samples).values());
    out.keys.emplace_back(w.inline_index, w.crossline_index);
  }
  out.values = matrix_from_rows(rows);
  return out;
}

FeatureMatrix pca_features(const SurveyGrid& grid, const RunConfig& cfg, PcaModel* fitted) {
  FeatureMatrix flat = flattened_windows(grid);
  PcaModel model = pca_fit(flat.values, cfg.pca_threshold);
  FeatureMatrix out{pca_transform(model, flat.values), std::move(flat.keys)};
  if (fitted != nullptr) *fitted = std::move(model);
  return out;
}

}  // namespace facies
