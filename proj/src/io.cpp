#include "facies/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "facies/error.hpp"

namespace facies {
namespace {

constexpr std::string_view kCubeMagic = "GCUBE1";

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(std::string_view text, const std::string& what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw FormatError(what + ": cannot parse '" + std::string(text) + "' as a number");
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

// ---------------------------------------------------------------- gather cube

Tensor GatherCube::gather(std::size_t il, std::size_t xl) const {
  if (il >= inlines || xl >= crosslines) throw RangeError("gather index outside the cube");
  Tensor g({1, samples, offsets});
  const std::size_t base = (il * crosslines + xl) * offsets * samples;
  for (std::size_t o = 0; o < offsets; ++o)
    for (std::size_t s = 0; s < samples; ++s) g.at(0, s, o) = data[base + o * samples + s];
  return g;
}

void GatherCube::set_gather(std::size_t il, std::size_t xl, const Tensor& g) {
  if (il >= inlines || xl >= crosslines) throw RangeError("gather index outside the cube");
  if (g.shape() != Tensor::Shape{1, samples, offsets})
    throw ShapeError("gather shape does not match the cube");
  const std::size_t base = (il * crosslines + xl) * offsets * samples;
  for (std::size_t o = 0; o < offsets; ++o)
    for (std::size_t s = 0; s < samples; ++s) data[base + o * samples + s] = g.at(0, s, o);
}

void GatherCube::validate() const {
  if (inlines == 0 || crosslines == 0 || offsets == 0 || samples == 0)
    throw FormatError("gather cube: extents must be positive");
  if (!(dt_ms > 0.0) || !(window_ms > 0.0))
    throw FormatError("gather cube: dt and window must be positive");
  if (data.size() != inlines * crosslines * offsets * samples)
    throw FormatError("gather cube: payload length does not match the header");
}

SurveyGrid cut_survey(const GatherCube& cube, Alignment alignment, double horizon_ms) {
  cube.validate();
  SurveyGrid grid;
  grid.inlines = cube.inlines;
  grid.crosslines = cube.crosslines;
  grid.dt_ms = cube.dt_ms;
  grid.window_ms = cube.window_ms;
  const double horizon =
      horizon_ms >= 0.0 ? horizon_ms : static_cast<double>(cube.samples / 2) * cube.dt_ms;
  grid.windows.reserve(cube.inlines * cube.crosslines);
  for (std::size_t il = 0; il < cube.inlines; ++il)
    for (std::size_t xl = 0; xl < cube.crosslines; ++xl) {
      GatherWindow w = cut_window(cube.gather(il, xl), horizon, cube.window_ms, cube.dt_ms, alignment);
      w.inline_index = il;
      w.crossline_index = xl;
      grid.windows.push_back(std::move(w));
    }
  grid.offsets = grid.windows.front().samples.extent(2);
  return grid;
}

void write_gather_cube(std::ostream& os, const GatherCube& cube) {
  cube.validate();
  os << kCubeMagic << ' ' << cube.inlines << ' ' << cube.crosslines << ' ' << cube.offsets << ' '
     << cube.samples << ' ' << format_double(cube.dt_ms) << ' ' << format_double(cube.window_ms)
     << '\n';
  for (double v : cube.data) detail::write_f64(os, v);
  if (!os) throw FormatError("gather cube: write failed");
}

GatherCube read_gather_cube(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw FormatError("gather cube: missing header line");
  std::istringstream hs(header);
  std::string magic, tok[6];
  hs >> magic;
  if (magic != kCubeMagic) throw FormatError("gather cube: bad magic (expected GCUBE1)");
  for (auto& t : tok)
    if (!(hs >> t)) throw FormatError("gather cube: header needs 6 fields after the magic");
  std::string extra;
  if (hs >> extra) throw FormatError("gather cube: unexpected header field '" + extra + "'");
  const std::string what = "gather cube header";
  GatherCube cube;
  cube.inlines = parse_number<std::size_t>(tok[0], what);
  cube.crosslines = parse_number<std::size_t>(tok[1], what);
  cube.offsets = parse_number<std::size_t>(tok[2], what);
  cube.samples = parse_number<std::size_t>(tok[3], what);
  cube.dt_ms = parse_number<double>(tok[4], what);
  cube.window_ms = parse_number<double>(tok[5], what);
  const std::size_t count = cube.inlines * cube.crosslines * cube.offsets * cube.samples;
  if (count == 0) throw FormatError("gather cube: extents must be positive");
  if (count > (std::size_t{1} << 32)) throw FormatError("gather cube: implausibly large payload");
  cube.data.resize(count);
  for (auto& v : cube.data) {
    v = detail::read_f64(is, "gather cube");
    if (!std::isfinite(v)) throw FormatError("gather cube: non-finite amplitude");
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("gather cube: trailing bytes");
  cube.validate();
  return cube;
}

void save_gather_cube(const std::filesystem::path& path, const GatherCube& cube) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_gather_cube(os, cube);
}

GatherCube load_gather_cube(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_gather_cube(is);
}

// ----------------------------------------------------------------- label grid

std::size_t LabelGrid::class_count() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

LabelGrid LabelGrid::transposed() const {
  LabelGrid t{crosslines, inlines, std::vector<std::size_t>(labels.size())};
  for (std::size_t il = 0; il < inlines; ++il)
    for (std::size_t xl = 0; xl < crosslines; ++xl) t.at(xl, il) = at(il, xl);
  return t;
}

LabelGrid label_grid_from_keys(const std::vector<std::pair<std::size_t, std::size_t>>& keys,
                               const std::vector<std::size_t>& labels) {
  if (keys.size() != labels.size() || keys.empty())
    throw ShapeError("label grid: keys and labels must be nonempty and equally long");
  std::size_t inlines = 0, crosslines = 0;
  for (const auto& [il, xl] : keys) {
    inlines = std::max(inlines, il + 1);
    crosslines = std::max(crosslines, xl + 1);
  }
  if (inlines * crosslines != keys.size())
    throw ShapeError("label grid: keys do not cover a dense grid");
  LabelGrid grid{inlines, crosslines, std::vector<std::size_t>(keys.size())};
  std::vector<bool> seen(keys.size(), false);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::size_t cell = keys[i].first * crosslines + keys[i].second;
    if (seen[cell]) throw ShapeError("label grid: duplicate cell in keys");
    seen[cell] = true;
    grid.labels[cell] = labels[i];
  }
  return grid;
}

void write_label_csv(std::ostream& os, const LabelGrid& grid) {
  os << "inline,crossline,label\n";
  for (std::size_t il = 0; il < grid.inlines; ++il)
    for (std::size_t xl = 0; xl < grid.crosslines; ++xl)
      os << il << ',' << xl << ',' << grid.at(il, xl) << '\n';
}

LabelGrid read_label_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim_cr(line) != "inline,crossline,label")
    throw FormatError("label csv: expected header 'inline,crossline,label'");
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  std::vector<std::size_t> labels;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto fields = split_csv(text);
    const std::string what = "label csv line " + std::to_string(line_no);
    if (fields.size() != 3) throw FormatError(what + ": expected 3 fields");
    keys.emplace_back(parse_number<std::size_t>(fields[0], what),
                      parse_number<std::size_t>(fields[1], what));
    labels.push_back(parse_number<std::size_t>(fields[2], what));
  }
  if (keys.empty()) throw FormatError("label csv: no rows");
  try {
    return label_grid_from_keys(keys, labels);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("label csv: ") + e.what());
  }
}

void save_label_csv(const std::filesystem::path& path, const LabelGrid& grid) {
  std::ostringstream os;
  write_label_csv(os, grid);
  write_file(path, os.str());
}

LabelGrid load_label_csv(const std::filesystem::path& path) {
  std::istringstream is(read_file(path));
  return read_label_csv(is);
}

// ------------------------------------------------------------ feature matrix

void write_feature_csv(std::ostream& os, const FeatureMatrix& features) {
  const Matrix& m = features.values;
  if (features.keys.size() != m.rows()) throw ShapeError("feature csv: keys and rows differ");
  os << "inline,crossline";
  for (std::size_t j = 0; j < m.cols(); ++j) os << ",f" << j;
  os << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << features.keys[i].first << ',' << features.keys[i].second;
    for (double v : m.row(i)) os << ',' << format_double(v);
    os << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("feature csv: empty file");
  const auto header = split_csv(trim_cr(line));
  if (header.size() < 3 || header[0] != "inline" || header[1] != "crossline")
    throw FormatError("feature csv: expected header 'inline,crossline,f0,...'");
  const std::size_t cols = header.size() - 2;
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto fields = split_csv(text);
    const std::string what = "feature csv line " + std::to_string(line_no);
    if (fields.size() != cols + 2)
      throw FormatError(what + ": expected " + std::to_string(cols + 2) + " fields");
    keys.emplace_back(parse_number<std::size_t>(fields[0], what),
                      parse_number<std::size_t>(fields[1], what));
    std::vector<double> row(cols);
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = parse_number<double>(fields[j + 2], what);
      if (!std::isfinite(row[j])) throw FormatError(what + ": non-finite value");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("feature csv: no rows");
  return {matrix_from_rows(rows), std::move(keys)};
}

void save_feature_csv(const std::filesystem::path& path, const FeatureMatrix& features) {
  std::ostringstream os;
  write_feature_csv(os, features);
  write_file(path, os.str());
}

FeatureMatrix load_feature_csv(const std::filesystem::path& path) {
  std::istringstream is(read_file(path));
  return read_feature_csv(is);
}

// ------------------------------------------------------------------ pixmaps

std::vector<Rgb> default_palette(std::size_t count) {
  static const std::vector<Rgb> base = {
      {230, 25, 75},  {60, 180, 75},  {0, 130, 200},  {255, 225, 25}, {245, 130, 48},
      {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {128, 128, 0},  {0, 128, 128},
      {170, 110, 40}, {128, 0, 0},    {0, 0, 128},    {128, 128, 128}, {255, 255, 255},
      {0, 0, 0}};
  std::vector<Rgb> palette(base.begin(), base.begin() + static_cast<std::ptrdiff_t>(
                                                            std::min(count, base.size())));
  std::set<Rgb> used(palette.begin(), palette.end());
  // Beyond the base list walk the RGB cube with a fixed odd stride.
  std::uint32_t code = 0x123456;
  while (palette.size() < count) {
    code = (code + 0x9e3779u) & 0xffffffu;
    const Rgb c{static_cast<std::uint8_t>(code >> 16), static_cast<std::uint8_t>(code >> 8),
                static_cast<std::uint8_t>(code)};
    if (used.insert(c).second) palette.push_back(c);
  }
  return palette;
}

std::string render_map(const LabelGrid& grid, const std::vector<Rgb>& palette) {
  if (grid.labels.size() != grid.inlines * grid.crosslines || grid.labels.empty())
    throw ShapeError("render_map: label grid is malformed");
  std::string out = "P6\n" + std::to_string(grid.crosslines) + " " +
                    std::to_string(grid.inlines) + "\n255\n";
  out.reserve(out.size() + grid.labels.size() * 3);
  for (std::size_t label : grid.labels) {
    if (label >= palette.size())
      throw RangeError("render_map: label " + std::to_string(label) + " exceeds the palette of " +
                       std::to_string(palette.size()) + " colours");
    for (auto channel : palette[label]) out.push_back(static_cast<char>(channel));
  }
  return out;
}

Pixmap parse_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw FormatError("ppm: truncated header");
    return std::string_view(bytes).substr(start, pos - start);
  };
  if (next_token() != "P6") throw FormatError("ppm: expected P6 magic");
  Pixmap img;
  img.width = parse_number<std::size_t>(next_token(), "ppm width");
  img.height = parse_number<std::size_t>(next_token(), "ppm height");
  if (parse_number<unsigned>(next_token(), "ppm maxval") != 255)
    throw FormatError("ppm: only maxval 255 is supported");
  ++pos;  // single whitespace byte before the raster
  const std::size_t need = img.width * img.height * 3;
  if (bytes.size() - std::min(pos, bytes.size()) != need)
    throw FormatError("ppm: raster has the wrong length");
  img.pixels.resize(img.width * img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c)
      img.pixels[i][c] = static_cast<std::uint8_t>(bytes[pos + 3 * i + c]);
  return img;
}

LabelGrid labels_from_pixmap(const Pixmap& image, const std::vector<Rgb>& palette) {
  LabelGrid grid{image.height, image.width, std::vector<std::size_t>(image.pixels.size())};
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const auto it = std::find(palette.begin(), palette.end(), image.pixels[i]);
    if (it == palette.end()) throw FormatError("ppm: pixel colour not in palette");
    grid.labels[i] = static_cast<std::size_t>(it - palette.begin());
  }
  return grid;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("write to " + path.string() + " failed");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace facies
