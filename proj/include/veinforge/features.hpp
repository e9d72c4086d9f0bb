#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "veinforge/image.hpp"

namespace veinforge {

struct GlcmFeatures {
  double contrast = 0.0;
  double variance = 0.0;
  double correlation = 0.0;
  double energy = 0.0;
  double homogeneity = 0.0;
};

struct Offset {
  int dx = 1;
  int dy = 0;
};

/// Normalised symmetric co-occurrence matrix, levels x levels, row-major.
/// Pixels are quantised as min(levels - 1, floor(v * levels)) after clamping to [0, 1].
std::vector<double> glcm_matrix(const GrayImage& image, Offset offset, int levels = 8);
GlcmFeatures glcm_features(const GrayImage& image, Offset offset, int levels = 8);

/// 1 - (max - min) of the patch means on a grid; images that do not divide
/// evenly are padded by half-sample reflection.
double brightness_uniformity(const GrayImage& image, int grid_x = 4, int grid_y = 4);

inline constexpr int kFeatureLength = 100;

/// 64 block means, 4 x 5 GLCM values, 16 gradient-magnitude bins. The image
/// is resampled to 128 x 128 first.
Eigen::VectorXd extract_features(const GrayImage& image);

/// Leave-one-out 1-NN accuracy of telling set A from set B. Rows are feature vectors.
double nn_loo_accuracy(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b);
double nn_loo_accuracy(std::span<const GrayImage> set_a, std::span<const GrayImage> set_b,
                       int threads = 1);

struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  /// Mean and unbiased covariance of the rows. Needs at least two rows.
  static FeatureStats from_samples(const Eigen::MatrixXd& rows);
  void validate() const;
};

/// |mu_x - mu_g|^2 + tr(S_x + S_g - 2 (S_x^1/2 S_g S_x^1/2)^1/2).
/// Eigenvalues below -1e-10 throw std::domain_error; smaller negatives are clamped.
double fid(const FeatureStats& real, const FeatureStats& synth);

/// Feature rows for a batch of images, computed in parallel.
Eigen::MatrixXd feature_matrix(std::span<const GrayImage> images, int threads = 1);

}  // namespace veinforge
