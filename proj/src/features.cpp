#include "veinforge/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "veinforge/parallel.hpp"

namespace veinforge {
namespace {

int reflect(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

int quantize(double v, int levels) {
  const double c = std::clamp(v, 0.0, 1.0);
  return std::min(levels - 1, static_cast<int>(std::floor(c * levels)));
}

constexpr Offset kGlcmOffsets[] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
constexpr int kBlocks = 8;
constexpr int kGradientBins = 16;
constexpr double kGradientRange = 0.25;

}  // namespace

std::vector<double> glcm_matrix(const GrayImage& image, Offset offset, int levels) {
  if (levels < 2) throw std::invalid_argument("glcm: levels must be at least 2");
  const auto n = static_cast<std::size_t>(levels);
  std::vector<double> p(n * n, 0.0);
  double total = 0.0;
  for (int y = 0; y < image.height(); ++y) {
    const int y2 = y + offset.dy;
    if (y2 < 0 || y2 >= image.height()) continue;
    for (int x = 0; x < image.width(); ++x) {
      const int x2 = x + offset.dx;
      if (x2 < 0 || x2 >= image.width()) continue;
      const auto i = static_cast<std::size_t>(quantize(image.at(x, y), levels));
      const auto j = static_cast<std::size_t>(quantize(image.at(x2, y2), levels));
      p[i * n + j] += 1.0;
      p[j * n + i] += 1.0;
      total += 2.0;
    }
  }
  if (total > 0.0) {
    for (auto& v : p) v /= total;
  }
  return p;
}

GlcmFeatures glcm_features(const GrayImage& image, Offset offset, int levels) {
  const auto p = glcm_matrix(image, offset, levels);
  const auto n = static_cast<std::size_t>(levels);
  GlcmFeatures f;
  std::vector<double> marginal(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) marginal[i] += p[i * n + j];
  }
  double mu = 0.0;
  for (std::size_t i = 0; i < n; ++i) mu += static_cast<double>(i) * marginal[i];
  for (std::size_t i = 0; i < n; ++i) {
    f.variance += (static_cast<double>(i) - mu) * (static_cast<double>(i) - mu) * marginal[i];
  }
  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p[i * n + j];
      const double d = static_cast<double>(i) - static_cast<double>(j);
      f.contrast += d * d * v;
      f.energy += v * v;
      f.homogeneity += v / (1.0 + d * d);
      cov += (static_cast<double>(i) - mu) * (static_cast<double>(j) - mu) * v;
    }
  }
  f.correlation = f.variance > 0.0 ? cov / f.variance : 0.0;
  return f;
}

double brightness_uniformity(const GrayImage& image, int grid_x, int grid_y) {
  if (grid_x < 1 || grid_y < 1) throw std::invalid_argument("brightness_uniformity: bad grid");
  if (image.empty()) throw std::invalid_argument("brightness_uniformity: empty image");
  const int pw = (image.width() + grid_x - 1) / grid_x;
  const int ph = (image.height() + grid_y - 1) / grid_y;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int gy = 0; gy < grid_y; ++gy) {
    for (int gx = 0; gx < grid_x; ++gx) {
      double sum = 0.0;
      for (int y = gy * ph; y < (gy + 1) * ph; ++y) {
        for (int x = gx * pw; x < (gx + 1) * pw; ++x) {
          sum += image.at(reflect(x, image.width()), reflect(y, image.height()));
        }
      }
      const double m = sum / (static_cast<double>(pw) * ph);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  return 1.0 - (hi - lo);
}

Eigen::VectorXd extract_features(const GrayImage& input) {
  const GrayImage img =
      (input.width() == 128 && input.height() == 128) ? input : resample(input, 128, 128);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kFeatureLength);
  int k = 0;

  const int block = 128 / kBlocks;
  for (int by = 0; by < kBlocks; ++by) {
    for (int bx = 0; bx < kBlocks; ++bx) {
      double sum = 0.0;
      for (int y = by * block; y < (by + 1) * block; ++y) {
        for (int x = bx * block; x < (bx + 1) * block; ++x) sum += img.at(x, y);
      }
      f[k++] = sum / (block * block);
    }
  }

  for (const Offset off : kGlcmOffsets) {
    const GlcmFeatures g = glcm_features(img, off);
    f[k++] = g.contrast;
    f[k++] = g.variance;
    f[k++] = g.correlation;
    f[k++] = g.energy;
    f[k++] = g.homogeneity;
  }

  const int w = img.width(), h = img.height();
  double count = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (img.at(std::min(x + 1, w - 1), y) - img.at(std::max(x - 1, 0), y));
      const double gy = 0.5 * (img.at(x, std::min(y + 1, h - 1)) - img.at(x, std::max(y - 1, 0)));
      const double mag = std::hypot(gx, gy);
      const int bin = std::min(kGradientBins - 1, static_cast<int>(mag / kGradientRange * kGradientBins));
      f[k + bin] += 1.0;
      count += 1.0;
    }
  }
  f.segment(k, kGradientBins) /= count;
  return f;
}

Eigen::MatrixXd feature_matrix(std::span<const GrayImage> images, int threads) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(images.size()), kFeatureLength);
  parallel_for(images.size(), threads, [&](std::size_t i) {
    rows.row(static_cast<Eigen::Index>(i)) = extract_features(images[i]).transpose();
  });
  return rows;
}

double nn_loo_accuracy(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b) {
  if (set_a.rows() == 0 || set_b.rows() == 0) {
    throw std::invalid_argument("nn_loo_accuracy: both sets must be non-empty");
  }
  if (set_a.cols() != set_b.cols()) throw std::invalid_argument("nn_loo_accuracy: dimension mismatch");
  const Eigen::Index na = set_a.rows();
  const Eigen::Index n = na + set_b.rows();
  Eigen::MatrixXd all(n, set_a.cols());
  all << set_a, set_b;
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (all.row(i) - all.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best >= 0 && (best < na) == (i < na)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

double nn_loo_accuracy(std::span<const GrayImage> set_a, std::span<const GrayImage> set_b,
                       int threads) {
  return nn_loo_accuracy(feature_matrix(set_a, threads), feature_matrix(set_b, threads));
}

FeatureStats FeatureStats::from_samples(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw std::invalid_argument("FeatureStats: need at least two samples");
  FeatureStats s;
  s.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - s.mean.transpose();
  s.covariance = (centered.transpose() * centered) / static_cast<double>(rows.rows() - 1);
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
  return s;
}

void FeatureStats::validate() const {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw std::invalid_argument("FeatureStats: covariance shape does not match mean");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("FeatureStats: covariance is not symmetric");
  }
}

namespace {

constexpr double kNegativeEigenTolerance = 1e-10;

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd values = eig.eigenvalues();
  if (values.size() > 0 && values.minCoeff() < -kNegativeEigenTolerance) {
    throw std::domain_error("fid: covariance is indefinite beyond tolerance");
  }
  values = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double fid(const FeatureStats& real, const FeatureStats& synth) {
  real.validate();
  synth.validate();
  if (real.mean.size() != synth.mean.size()) throw std::invalid_argument("fid: dimension mismatch");
  const Eigen::MatrixXd root = psd_sqrt(real.covariance);
  Eigen::MatrixXd inner = root * synth.covariance * root;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd values = eig.eigenvalues();
  if (values.size() > 0 && values.minCoeff() < -kNegativeEigenTolerance) {
    throw std::domain_error("fid: product covariance is indefinite beyond tolerance");
  }
  const double trace_sqrt = values.cwiseMax(0.0).cwiseSqrt().sum();
  const double value = (real.mean - synth.mean).squaredNorm() + real.covariance.trace() +
                       synth.covariance.trace() - 2.0 * trace_sqrt;
  return std::max(0.0, value);
}

}  // namespace veinforge
