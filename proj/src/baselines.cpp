#include "facies/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "facies/error.hpp"

namespace facies {

double PcaModel::cumulative_ratio(std::size_t r) const {
  const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
  if (total <= 0.0) return 1.0;
  const double head = std::accumulate(eigenvalues.begin(),
                                      eigenvalues.begin() + static_cast<std::ptrdiff_t>(r), 0.0);
  return head / total;
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric, std::size_t max_sweeps) {
  const std::size_t d = symmetric.rows();
  if (symmetric.cols() != d) throw ShapeError("jacobi_eigen: matrix must be square");
  Matrix a = symmetric;
  Matrix v(d, d);
  for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

  double scale = 0.0;
  for (double x : a.data()) scale += x * x;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-30 * scale || off == 0.0) break;

    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Skip rotations that cannot change either diagonal entry.
        if (sweep > 3 && std::abs(apq) < 1e-18 * (std::abs(a(p, p)) + std::abs(a(q, q)))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{std::vector<double>(d), Matrix(d, d)};
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a(src, src);
    std::size_t lead = 0;
    for (std::size_t k = 1; k < d; ++k)
      if (std::abs(v(k, src)) > std::abs(v(lead, src))) lead = k;
    const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < d; ++k) out.vectors(k, j) = sign * v(k, src);
  }
  return out;
}

Matrix sample_covariance(const Matrix& x, const std::vector<double>& mean) {
  const std::size_t n = x.rows(), d = x.cols();
  Matrix cov(d, d);
  std::vector<double> centred(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    for (std::size_t a = 0; a < d; ++a) centred[a] = row[a] - mean[a];
    for (std::size_t a = 0; a < d; ++a) {
      const double ca = centred[a];
      auto dst = cov.row(a);
      for (std::size_t b = a; b < d; ++b) dst[b] += ca * centred[b];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      cov(a, b) /= denom;
      cov(b, a) = cov(a, b);
    }
  return cov;
}

PcaModel pca_fit(const Matrix& x, double variance_threshold) {
  if (x.rows() < 2) throw RangeError("pca_fit: need at least two samples");
  if (x.cols() == 0) throw ShapeError("pca_fit: samples have no features");
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw RangeError("pca_fit: variance threshold must lie in (0, 1]");
  PcaModel model;
  model.threshold = variance_threshold;
  const std::size_t d = x.cols();
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t a = 0; a < d; ++a) model.mean[a] += x(i, a);
  for (auto& m : model.mean) m /= static_cast<double>(x.rows());

  SymmetricEigen eig = jacobi_eigen(sample_covariance(x, model.mean));
  for (auto& value : eig.values) value = std::max(value, 0.0);
  model.eigenvalues = std::move(eig.values);
  model.eigenvectors = std::move(eig.vectors);

  const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
  model.retained = 1;
  if (total > 0.0) {
    // Relative slack keeps threshold 1.0 from chasing rounding noise.
    const double target = variance_threshold * total * (1.0 - 1e-12);
    double running = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      running += model.eigenvalues[r];
      if (running >= target) {
        model.retained = r + 1;
        break;
      }
    }
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x, std::size_t components) {
  const std::size_t d = model.dimension();
  if (x.cols() != d)
    throw ShapeError("pca_transform: data has " + std::to_string(x.cols()) +
                     " columns, model expects " + std::to_string(d));
  const std::size_t r = components == 0 ? model.retained : std::min(components, d);
  Matrix out(x.rows(), r);
  std::vector<double> centred(d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t a = 0; a < d; ++a) centred[a] = x(i, a) - model.mean[a];
    for (std::size_t j = 0; j < r; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < d; ++a) acc += centred[a] * model.eigenvectors(a, j);
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& projected) {
  const std::size_t d = model.dimension();
  if (projected.cols() > d) throw ShapeError("pca_inverse_transform: too many components");
  Matrix out(projected.rows(), d);
  for (std::size_t i = 0; i < projected.rows(); ++i)
    for (std::size_t a = 0; a < d; ++a) {
      double acc = model.mean[a];
      for (std::size_t j = 0; j < projected.cols(); ++j)
        acc += projected(i, j) * model.eigenvectors(a, j);
      out(i, a) = acc;
    }
  return out;
}

std::vector<double> stack_poststack(const GatherWindow& window, bool* degenerate) {
  const Tensor& s = window.samples;
  const std::size_t h = s.extent(1), w = s.extent(2);
  Tensor trace({1, h, 1});
  for (std::size_t i = 0; i < h; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < w; ++j) sum += s.at(0, i, j);
    trace[i] = sum / static_cast<double>(w);
  }
  return standardize(trace, degenerate).values();
}

}  // namespace facies
