#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "facies/features.hpp"
#include "facies/io.hpp"

namespace facies {

/// Reflection response of one facies class.
struct ClassParams {
  double amplitude = 1.0;     // A
  double avo_gradient = 0.0;  // G in A * (1 + G sin^2 theta)
  double peak_hz = 30.0;      // Ricker peak frequency
};

struct Disc {
  double inline_center = 0.0;
  double crossline_center = 0.0;
  double radius = 1.0;
  std::size_t class_id = 1;
};

/// Strip of constant width along a polyline of (inline, crossline) vertices.
struct Strip {
  std::vector<std::pair<double, double>> vertices;
  double width = 2.0;
  std::size_t class_id = 2;
};

/// Map-view layout of a labelled synthetic survey. A cell takes the class of
/// the topmost feature covering it: strips over discs (later discs over
/// earlier ones) over the background.
struct ModelLayout {
  std::size_t inlines = 40;
  std::size_t crosslines = 40;
  std::size_t background_class = 0;
  std::vector<Disc> discs;
  std::vector<Strip> strips;
  std::vector<ClassParams> classes;
  double noise_sigma = 0.0;
  double max_angle_deg = 40.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticSurvey {
  GatherCube cube;   // full traces, flat horizon at the central sample
  SurveyGrid grid;   // centred windows cut from the cube
  LabelGrid labels;
};

/// Ricker wavelet (1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2) at time t (s).
double ricker(double t_seconds, double peak_hz);

/// Incidence angle of offset index o: linear from 0 to max_angle_deg.
double offset_angle_rad(std::size_t offset, std::size_t offsets, double max_angle_deg);

/// Class of every map cell.
LabelGrid rasterize(const ModelLayout& layout);

/// Noise-free gather of one class as [1, samples, offsets], wavelet centred
/// on sample samples/2.
Tensor class_gather(const ModelLayout& layout, std::size_t class_id, std::size_t samples,
                    std::size_t offsets, double dt_ms);

/// Noise sigma giving the requested amplitude SNR: mean RMS of the noise-free
/// class traces inside the window divided by `snr`.
double noise_for_snr(const ModelLayout& layout, double dt_ms, double window_ms,
                     std::size_t offsets, double snr);

/// Three classes with matched stacks: background (G=0), caves (G>0) and river
/// (G<0), amplitudes scaled so the offset-averaged response is identical and
/// only the prestack offset trend separates them. Three large tank-like discs,
/// six small caves and one two-cell-wide river; noise at SNR 10.
ModelLayout default_layout(std::uint64_t seed = 0, std::size_t inlines = 40,
                           std::size_t crosslines = 40, std::size_t offsets = 24,
                           double dt_ms = 2.0, double window_ms = 48.0);

/// Generates traces of window + 16 samples with a flat horizon at the
/// central sample, seeded Gaussian noise per cell.
SyntheticSurvey generate_survey(const ModelLayout& layout, double dt_ms, double window_ms,
                                std::size_t offsets);

struct MapScore {
  double accuracy = 0.0;
  std::vector<double> class_recall;       // per true class
  std::vector<std::size_t> mapping;       // predicted label -> true class
};

/// Accuracy under the best one-to-one relabelling of predicted clusters
/// (Hungarian assignment on the confusion matrix).
MapScore score_map(const LabelGrid& predicted, const LabelGrid& truth);

/// Maximum-weight one-to-one assignment of rows to columns. Returns the
/// column chosen for every row (rows > cols leave some rows at `cols`).
std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& weight);

}  // namespace facies
