#include "facies/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "facies/error.hpp"

namespace facies {
namespace {

constexpr std::size_t kTraceMargin = 16;

double segment_distance(double px, double py, std::pair<double, double> a,
                        std::pair<double, double> b) {
  const double dx = b.first - a.first, dy = b.second - a.second;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - a.first) * dx + (py - a.second) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.first + t * dx - px, ey = a.second + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

bool on_strip(const Strip& strip, double il, double xl) {
  if (strip.vertices.size() == 1)
    return segment_distance(il, xl, strip.vertices[0], strip.vertices[0]) <= strip.width / 2.0;
  for (std::size_t s = 0; s + 1 < strip.vertices.size(); ++s)
    if (segment_distance(il, xl, strip.vertices[s], strip.vertices[s + 1]) <= strip.width / 2.0)
      return true;
  return false;
}

std::size_t window_samples(double dt_ms, double window_ms) {
  if (!(dt_ms > 0.0) || !(window_ms > 0.0))
    throw RangeError("synth: dt and window must be positive");
  const double ratio = window_ms / dt_ms;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw RangeError("synth: window is not a whole number of samples");
  return static_cast<std::size_t>(std::llround(ratio));
}

}  // namespace

void ModelLayout::validate() const {
  if (inlines == 0 || crosslines == 0) throw RangeError("layout: grid extents must be positive");
  if (classes.empty()) throw RangeError("layout: no class parameters");
  const std::size_t c = classes.size();
  if (background_class >= c) throw RangeError("layout: background class out of range");
  if (!(noise_sigma >= 0.0)) throw RangeError("layout: noise sigma must be >= 0");
  if (!(max_angle_deg >= 0.0 && max_angle_deg < 90.0))
    throw RangeError("layout: max angle must lie in [0, 90)");
  auto inside = [&](double il, double xl) {
    return il >= 0.0 && xl >= 0.0 && il <= static_cast<double>(inlines - 1) &&
           xl <= static_cast<double>(crosslines - 1);
  };
  for (const auto& d : discs) {
    if (d.class_id >= c) throw RangeError("layout: disc class out of range");
    if (!(d.radius > 0.0)) throw RangeError("layout: disc radius must be positive");
    if (!inside(d.inline_center, d.crossline_center))
      throw RangeError("layout: disc centre lies outside the grid");
  }
  for (const auto& s : strips) {
    if (s.class_id >= c) throw RangeError("layout: strip class out of range");
    if (s.vertices.empty() || !(s.width > 0.0)) throw RangeError("layout: empty strip");
    for (const auto& v : s.vertices)
      if (!inside(v.first, v.second)) throw RangeError("layout: strip vertex outside the grid");
  }
  for (const auto& p : classes)
    if (!(p.peak_hz > 0.0) || !std::isfinite(p.amplitude) || !std::isfinite(p.avo_gradient))
      throw RangeError("layout: invalid class parameters");
}

double ricker(double t_seconds, double peak_hz) {
  const double a = std::numbers::pi * peak_hz * t_seconds;
  const double a2 = a * a;
  return (1.0 - 2.0 * a2) * std::exp(-a2);
}

double offset_angle_rad(std::size_t offset, std::size_t offsets, double max_angle_deg) {
  if (offsets < 2) return 0.0;
  const double frac = static_cast<double>(offset) / static_cast<double>(offsets - 1);
  return frac * max_angle_deg * std::numbers::pi / 180.0;
}

LabelGrid rasterize(const ModelLayout& layout) {
  layout.validate();
  LabelGrid grid{layout.inlines, layout.crosslines,
                 std::vector<std::size_t>(layout.inlines * layout.crosslines,
                                          layout.background_class)};
  for (std::size_t il = 0; il < layout.inlines; ++il)
    for (std::size_t xl = 0; xl < layout.crosslines; ++xl) {
      const double x = static_cast<double>(il), y = static_cast<double>(xl);
      std::size_t cls = layout.background_class;
      for (const auto& d : layout.discs) {
        const double dx = x - d.inline_center, dy = y - d.crossline_center;
        if (dx * dx + dy * dy <= d.radius * d.radius) cls = d.class_id;
      }
      for (const auto& s : layout.strips)
        if (on_strip(s, x, y)) cls = s.class_id;
      grid.at(il, xl) = cls;
    }
  return grid;
}

Tensor class_gather(const ModelLayout& layout, std::size_t class_id, std::size_t samples,
                    std::size_t offsets, double dt_ms) {
  const ClassParams& p = layout.classes.at(class_id);
  Tensor g({1, samples, offsets});
  const std::size_t centre = samples / 2;
  for (std::size_t o = 0; o < offsets; ++o) {
    const double s = std::sin(offset_angle_rad(o, offsets, layout.max_angle_deg));
    const double amp = p.amplitude * (1.0 + p.avo_gradient * s * s);
    for (std::size_t i = 0; i < samples; ++i) {
      const double t = (static_cast<double>(i) - static_cast<double>(centre)) * dt_ms * 1e-3;
      g.at(0, i, o) = amp * ricker(t, p.peak_hz);
    }
  }
  return g;
}

double noise_for_snr(const ModelLayout& layout, double dt_ms, double window_ms,
                     std::size_t offsets, double snr) {
  if (!(snr > 0.0)) throw RangeError("noise_for_snr: snr must be positive");
  const std::size_t h = window_samples(dt_ms, window_ms);
  double rms_sum = 0.0;
  for (std::size_t c = 0; c < layout.classes.size(); ++c) {
    const Tensor g = class_gather(layout, c, h, offsets, dt_ms);
    double ss = 0.0;
    for (double v : g.data()) ss += v * v;
    rms_sum += std::sqrt(ss / static_cast<double>(g.size()));
  }
  return rms_sum / static_cast<double>(layout.classes.size()) / snr;
}

ModelLayout default_layout(std::uint64_t seed, std::size_t inlines, std::size_t crosslines,
                           std::size_t offsets, double dt_ms, double window_ms) {
  ModelLayout layout;
  layout.inlines = inlines;
  layout.crosslines = crosslines;
  layout.seed = seed;
  layout.max_angle_deg = 40.0;

  double mean_s2 = 0.0;
  for (std::size_t o = 0; o < offsets; ++o) {
    const double s = std::sin(offset_angle_rad(o, offsets, layout.max_angle_deg));
    mean_s2 += s * s;
  }
  mean_s2 /= static_cast<double>(std::max<std::size_t>(offsets, 1));
  // A * (1 + G * mean sin^2) == 1 for every class: identical stacks.
  auto matched = [&](double gradient) {
    return ClassParams{1.0 / (1.0 + gradient * mean_s2), gradient, 30.0};
  };
  layout.classes = {matched(0.0), matched(2.0), matched(-1.5)};

  const double si = static_cast<double>(inlines) / 40.0;
  const double sx = static_cast<double>(crosslines) / 40.0;
  const double sr = std::min(si, sx);
  auto disc = [&](double il, double xl, double r) {
    return Disc{il * si, xl * sx, std::max(1.0, r * sr), 1};
  };
  layout.discs = {
      disc(9, 9, 6),   disc(9, 30, 6),  disc(30, 28, 6),             // tanks
      disc(3, 20, 2),  disc(20, 4, 3),  disc(21, 35, 2),
      disc(34, 6, 3),  disc(36, 18, 2), disc(17, 17, 2.5),           // caves
  };
  Strip river;
  river.class_id = 2;
  river.width = 2.0;
  river.vertices = {{0.0, 24.0 * sx}, {13.0 * si, 20.0 * sx}, {24.0 * si, 14.0 * sx},
                    {39.0 * si, 11.0 * sx}};
  for (auto& v : river.vertices) {
    v.first = std::min(v.first, static_cast<double>(inlines - 1));
    v.second = std::min(v.second, static_cast<double>(crosslines - 1));
  }
  layout.strips = {river};
  layout.noise_sigma = noise_for_snr(layout, dt_ms, window_ms, offsets, 10.0);
  return layout;
}

SyntheticSurvey generate_survey(const ModelLayout& layout, double dt_ms, double window_ms,
                                std::size_t offsets) {
  layout.validate();
  if (offsets < 2) throw RangeError("synth: need at least two offsets");
  const std::size_t h = window_samples(dt_ms, window_ms);
  const std::size_t samples = h + kTraceMargin;

  SyntheticSurvey out;
  out.labels = rasterize(layout);
  GatherCube& cube = out.cube;
  cube.inlines = layout.inlines;
  cube.crosslines = layout.crosslines;
  cube.offsets = offsets;
  cube.samples = samples;
  cube.dt_ms = dt_ms;
  cube.window_ms = window_ms;
  cube.data.assign(cube.inlines * cube.crosslines * offsets * samples, 0.0);

  std::vector<Tensor> clean;
  for (std::size_t c = 0; c < layout.classes.size(); ++c)
    clean.push_back(class_gather(layout, c, samples, offsets, dt_ms));

  for (std::size_t il = 0; il < layout.inlines; ++il)
    for (std::size_t xl = 0; xl < layout.crosslines; ++xl) {
      Tensor g = clean[out.labels.at(il, xl)];
      if (layout.noise_sigma > 0.0) {
        std::seed_seq seq{layout.seed, std::uint64_t{il}, std::uint64_t{xl}};
        Rng rng(seq);
        std::normal_distribution<double> noise(0.0, layout.noise_sigma);
        for (auto& v : g.data()) v += noise(rng);
      }
      cube.set_gather(il, xl, g);
    }
  out.grid = cut_survey(cube, Alignment::centered);
  return out;
}

std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  const std::size_t rows = weight.size();
  const std::size_t cols = rows == 0 ? 0 : weight.front().size();
  const std::size_t n = std::max(rows, cols);
  if (n == 0) return {};
  double top = 0.0;
  for (const auto& r : weight)
    for (double w : r) top = std::max(top, w);
  // Square minimisation problem on cost = top - weight; padding costs `top`.
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols) ? top - weight[i][j] : top;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(rows, cols);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] - 1 < rows && j - 1 < cols) assignment[p[j] - 1] = j - 1;
  return assignment;
}

MapScore score_map(const LabelGrid& predicted, const LabelGrid& truth) {
  if (predicted.inlines != truth.inlines || predicted.crosslines != truth.crosslines ||
      predicted.labels.size() != truth.labels.size())
    throw ShapeError("score_map: predicted and true maps differ in shape");
  if (truth.labels.empty()) throw ShapeError("score_map: empty map");
  const std::size_t kp = predicted.class_count(), kt = truth.class_count();
  std::vector<std::vector<double>> confusion(kp, std::vector<double>(kt, 0.0));
  std::vector<double> class_total(kt, 0.0);
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    confusion[predicted.labels[i]][truth.labels[i]] += 1.0;
    class_total[truth.labels[i]] += 1.0;
  }
  MapScore score;
  score.mapping = max_weight_assignment(confusion);
  double hits = 0.0;
  score.class_recall.assign(kt, 0.0);
  for (std::size_t p = 0; p < kp; ++p) {
    const std::size_t t = score.mapping[p];
    if (t >= kt) continue;
    hits += confusion[p][t];
    if (class_total[t] > 0.0) score.class_recall[t] = confusion[p][t] / class_total[t];
  }
  score.accuracy = hits / static_cast<double>(truth.labels.size());
  return score;
}

}  // namespace facies
