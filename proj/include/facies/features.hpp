#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "facies/cae.hpp"
#include "facies/matrix.hpp"
#include "facies/parallel.hpp"
#include "facies/tensor.hpp"

namespace facies {

enum class Alignment { below, centered };

/// One time x offset window cut along a horizon; samples are [1, h, w].
struct GatherWindow {
  std::size_t inline_index = 0;
  std::size_t crossline_index = 0;
  Tensor samples;
  double dt_ms = 2.0;
  double horizon_time_ms = 0.0;
};

/// Dense inline x crossline grid of windows, stored inline-major.
struct SurveyGrid {
  std::size_t inlines = 0;
  std::size_t crosslines = 0;
  std::size_t offsets = 0;
  double dt_ms = 2.0;
  double window_ms = 48.0;
  std::vector<GatherWindow> windows;

  const GatherWindow& at(std::size_t il, std::size_t xl) const {
    return windows.at(il * crosslines + xl);
  }
  /// Throws ShapeError unless there is exactly one uniformly shaped window per cell.
  void validate() const;
};

struct WindowReport {
  std::vector<std::size_t> flagged_traces;  // traces lacking a crest or a trough
  bool ok() const { return flagged_traces.empty(); }
};

/// Cuts round(window_ms/dt_ms) samples from a [1, samples, offsets] gather,
/// starting at the horizon sample (`below`) or centred on it. An odd trace
/// count loses its last trace. Throws RangeError for a non-integral sample
/// count or a window that leaves the trace.
GatherWindow cut_window(const Tensor& gather, double horizon_time_ms, double window_ms,
                        double dt_ms, Alignment alignment);

/// Flags every trace without both a strictly positive local maximum and a
/// strictly negative local minimum. Advisory only.
WindowReport validate_window(const GatherWindow& window);

/// Zero mean, unit (population) variance over the whole tensor. A constant
/// tensor maps to zeros and sets *degenerate.
Tensor standardize(const Tensor& samples, bool* degenerate = nullptr);
GatherWindow standardize(const GatherWindow& window, bool* degenerate = nullptr);

/// Zero-pads a [c,h,w] tensor symmetrically (extra row/column at the end).
Tensor pad_to(const Tensor& samples, std::size_t height, std::size_t width);

/// Standardizes a window and pads it to the model's input extents.
Tensor model_input(const GatherWindow& window, const std::array<std::size_t, 3>& input_shape);

struct FeatureMatrix {
  Matrix values;
  std::vector<std::pair<std::size_t, std::size_t>> keys;  // (inline, crossline) per row
};

/// Row i holds extract_features(model, model_input(window i)); rows keep the
/// window order. Work is split across `threads` with identical output.
FeatureMatrix assemble_feature_matrix(const std::vector<GatherWindow>& windows,
                                      const CaeModel& model, std::size_t threads = 1);
FeatureMatrix assemble_feature_matrix(const SurveyGrid& grid, const CaeModel& model,
                                      std::size_t threads = 1);

}  // namespace facies
