#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "facies/features.hpp"
#include "facies/matrix.hpp"

namespace facies {

/// Prestack gathers for a whole survey, stored as in the file payload:
/// inline-major, then crossline, offset, sample.
struct GatherCube {
  std::size_t inlines = 0;
  std::size_t crosslines = 0;
  std::size_t offsets = 0;
  std::size_t samples = 0;
  double dt_ms = 2.0;
  double window_ms = 48.0;
  std::vector<double> data;

  /// [1, samples, offsets] view of one cell, copied.
  Tensor gather(std::size_t il, std::size_t xl) const;
  void set_gather(std::size_t il, std::size_t xl, const Tensor& gather);
  void validate() const;
};

/// Cuts a window around a flat horizon at `horizon_ms` from every gather
/// (negative: the central sample of the trace).
SurveyGrid cut_survey(const GatherCube& cube, Alignment alignment, double horizon_ms = -1.0);

/// Gather-cube file:
///   one ASCII header line "GCUBE1 <inlines> <crosslines> <offsets> <samples> <dt_ms> <window_ms>\n"
///   then inlines*crosslines*offsets*samples little-endian f64 values.
void write_gather_cube(std::ostream& os, const GatherCube& cube);
GatherCube read_gather_cube(std::istream& is);
void save_gather_cube(const std::filesystem::path& path, const GatherCube& cube);
GatherCube load_gather_cube(const std::filesystem::path& path);

struct LabelGrid {
  std::size_t inlines = 0;
  std::size_t crosslines = 0;
  std::vector<std::size_t> labels;  // inline-major

  std::size_t at(std::size_t il, std::size_t xl) const { return labels.at(il * crosslines + xl); }
  std::size_t& at(std::size_t il, std::size_t xl) { return labels.at(il * crosslines + xl); }
  std::size_t class_count() const;
  LabelGrid transposed() const;
  friend bool operator==(const LabelGrid&, const LabelGrid&) = default;
};

/// Builds a grid from (inline, crossline) keys; every cell must appear once.
LabelGrid label_grid_from_keys(const std::vector<std::pair<std::size_t, std::size_t>>& keys,
                               const std::vector<std::size_t>& labels);

/// "inline,crossline,label" CSV with a header row, inline-major order.
void write_label_csv(std::ostream& os, const LabelGrid& grid);
LabelGrid read_label_csv(std::istream& is);
void save_label_csv(const std::filesystem::path& path, const LabelGrid& grid);
LabelGrid load_label_csv(const std::filesystem::path& path);

/// "inline,crossline,f0,f1,..." CSV; values use the shortest representation
/// that parses back to the same double.
void write_feature_csv(std::ostream& os, const FeatureMatrix& features);
FeatureMatrix read_feature_csv(std::istream& is);
void save_feature_csv(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix load_feature_csv(const std::filesystem::path& path);

using Rgb = std::array<std::uint8_t, 3>;

/// Deterministic palette of `count` distinct colours.
std::vector<Rgb> default_palette(std::size_t count);

/// Binary P6 pixmap, one pixel per cell: rows are inlines, columns crosslines.
std::string render_map(const LabelGrid& grid, const std::vector<Rgb>& palette);

struct Pixmap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;  // row-major
};
Pixmap parse_ppm(const std::string& bytes);

/// Inverse of render_map for an injective palette.
LabelGrid labels_from_pixmap(const Pixmap& image, const std::vector<Rgb>& palette);

void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace facies
