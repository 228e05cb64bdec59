#include "facies/features.hpp"

#include <cmath>
#include <string>

#include "facies/error.hpp"

namespace facies {

void SurveyGrid::validate() const {
  if (inlines == 0 || crosslines == 0) throw ShapeError("survey grid is empty");
  if (windows.size() != inlines * crosslines)
    throw ShapeError("survey grid has " + std::to_string(windows.size()) + " windows for " +
                     std::to_string(inlines) + "x" + std::to_string(crosslines) + " cells");
  for (const auto& w : windows)
    if (w.samples.shape() != windows.front().samples.shape())
      throw ShapeError("survey grid windows differ in shape");
}

GatherWindow cut_window(const Tensor& gather, double horizon_time_ms, double window_ms,
                        double dt_ms, Alignment alignment) {
  if (gather.rank() != 3 || gather.extent(0) != 1)
    throw ShapeError("cut_window: gather must be [1, samples, offsets]");
  if (!(dt_ms > 0.0) || !(window_ms > 0.0))
    throw RangeError("cut_window: window and sampling interval must be positive");
  const double ratio = window_ms / dt_ms;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) || rounded < 1.0)
    throw RangeError("cut_window: window of " + std::to_string(window_ms) +
                     " ms is not a whole number of " + std::to_string(dt_ms) + " ms samples");
  const auto h = static_cast<long long>(rounded);
  const auto pick = static_cast<long long>(std::llround(horizon_time_ms / dt_ms));
  const long long start = alignment == Alignment::below ? pick : pick - h / 2;
  const auto total = static_cast<long long>(gather.extent(1));
  if (start < 0 || start + h > total)
    throw RangeError("cut_window: window [" + std::to_string(start) + ", " +
                     std::to_string(start + h) + ") leaves the trace of " +
                     std::to_string(total) + " samples");
  const std::size_t width = gather.extent(2) - gather.extent(2) % 2;
  if (width == 0) throw ShapeError("cut_window: gather needs at least two traces");

  GatherWindow out;
  out.dt_ms = dt_ms;
  out.horizon_time_ms = horizon_time_ms;
  out.samples = Tensor({1, static_cast<std::size_t>(h), width});
  for (long long i = 0; i < h; ++i)
    for (std::size_t j = 0; j < width; ++j)
      out.samples.at(0, static_cast<std::size_t>(i), j) =
          gather.at(0, static_cast<std::size_t>(start + i), j);
  return out;
}

WindowReport validate_window(const GatherWindow& window) {
  const Tensor& s = window.samples;
  WindowReport report;
  const std::size_t h = s.extent(1), w = s.extent(2);
  for (std::size_t j = 0; j < w; ++j) {
    bool crest = false, trough = false;
    for (std::size_t i = 1; i + 1 < h; ++i) {
      const double prev = s.at(0, i - 1, j), v = s.at(0, i, j), next = s.at(0, i + 1, j);
      if (v > 0.0 && v >= prev && v >= next) crest = true;
      if (v < 0.0 && v <= prev && v <= next) trough = true;
    }
    if (!(crest && trough)) report.flagged_traces.push_back(j);
  }
  return report;
}

Tensor standardize(const Tensor& samples, bool* degenerate) {
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples.data()) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : samples.data()) var += (v - mean) * (v - mean);
  var /= n;
  Tensor out(samples.shape());
  // Anything this flat relative to its own level is numerically constant.
  const bool flat = !(var > 1e-24 * std::max(1.0, mean * mean));
  if (degenerate != nullptr) *degenerate = flat;
  if (flat) return out;
  const double inv = 1.0 / std::sqrt(var);
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = (samples[i] - mean) * inv;
  return out;
}

GatherWindow standardize(const GatherWindow& window, bool* degenerate) {
  GatherWindow out = window;
  out.samples = standardize(window.samples, degenerate);
  return out;
}

Tensor pad_to(const Tensor& samples, std::size_t height, std::size_t width) {
  if (samples.rank() != 3) throw ShapeError("pad_to: expected a [c,h,w] tensor");
  const std::size_t c = samples.extent(0), h = samples.extent(1), w = samples.extent(2);
  if (height < h || width < w) throw ShapeError("pad_to: target is smaller than the input");
  if (height == h && width == w) return samples;
  const std::size_t top = (height - h) / 2, left = (width - w) / 2;
  Tensor out({c, height, width});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) out.at(ch, top + i, left + j) = samples.at(ch, i, j);
  return out;
}

Tensor model_input(const GatherWindow& window, const std::array<std::size_t, 3>& input_shape) {
  if (window.samples.extent(0) != input_shape[0])
    throw ShapeError("window channel count does not match the model");
  return pad_to(standardize(window.samples), input_shape[1], input_shape[2]);
}

FeatureMatrix assemble_feature_matrix(const std::vector<GatherWindow>& windows,
                                      const CaeModel& model, std::size_t threads) {
  model.validate();
  FeatureMatrix out;
  if (windows.empty()) return out;
  for (const auto& w : windows)
    if (w.samples.shape() != windows.front().samples.shape())
      throw ShapeError("assemble_feature_matrix: windows differ in shape");
  out.values = Matrix(windows.size(), model.feature_length());
  out.keys.reserve(windows.size());
  for (const auto& w : windows) out.keys.emplace_back(w.inline_index, w.crossline_index);
  parallel_chunks(windows.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto features = extract_features(model, model_input(windows[i], model.input_shape));
      std::copy(features.begin(), features.end(), out.values.row(i).begin());
    }
  });
  return out;
}

FeatureMatrix assemble_feature_matrix(const SurveyGrid& grid, const CaeModel& model,
                                      std::size_t threads) {
  grid.validate();
  return assemble_feature_matrix(grid.windows, model, threads);
}

}  // namespace facies
