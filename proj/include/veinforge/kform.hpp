#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "veinforge/image.hpp"

namespace veinforge {

/// Radial log-Gabor band-pass. Transfer exp(-ln(f/f0)^2 / (2 ln(sigma)^2)) with
/// zero gain at DC; returns the real part of the inverse transform.
/// Requires at least 16x16 pixels.
GrayImage log_gabor_filter(const GrayImage& image, double center_frequency = 0.1,
                           double sigma_ratio = 0.55);

/// Bessel K-form density parameters: shape p and scale c.
struct KFormParams {
  double p = 1.0;
  double c = 1.0;

  void validate() const;
  bool operator==(const KFormParams&) const = default;
};

class NonLeptokurticError : public std::runtime_error {
 public:
  explicit NonLeptokurticError(double kurtosis);
  double kurtosis() const { return kurtosis_; }

 private:
  double kurtosis_;
};

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // population (divide by n)
  double kurtosis = 0.0;  // m4 / m2^2, 3 for a Gaussian
};

SampleMoments sample_moments(std::span<const double> data);

/// p = 3 / (SK - 3), c = SV / p. Throws NonLeptokurticError when SK <= 3.
KFormParams kform_from_moments(double kurtosis, double variance);
KFormParams estimate_kform(std::span<const double> data);
KFormParams estimate_kform(const GrayImage& filtered);

/// Normalising constant. Integrates the density to one.
double kform_normalizer(const KFormParams& params);

/// Density value. At x = 0 the limit is returned, which is +inf when p <= 0.5.
double kform_pdf(double x, const KFormParams& params);
double kform_log_pdf(double x, const KFormParams& params);

/// Symmetric integration bound 50 * sqrt(p * c).
double kform_support(const KFormParams& params);

enum class KFormDistance { KL, L2 };

/// The L2 norm of a K-form is infinite for p <= 1/4 (f^2 ~ |x|^(4p-2) at 0).
inline constexpr double kMinL2Shape = 0.25;

/// Below this shape the L2 distance is evaluated from inner products rather
/// than by integrating the squared difference directly.
inline constexpr double kDirectL2Shape = 0.3;

class DivergentDistance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

KFormDistance parse_kform_distance(const std::string& name);

/// Integral of f1 * f2 over the real line. Finite iff p1 + p2 > 1/2;
/// throws DivergentDistance otherwise.
double kform_inner_product(const KFormParams& f1, const KFormParams& f2);

/// KL divergence of f2 from f1, or the L2 distance between the densities.
/// Throws QuadratureError if the integral does not converge, and
/// DivergentDistance for L2 when either shape is at most kMinL2Shape.
double kform_distance(const KFormParams& f1, const KFormParams& f2, KFormDistance kind);

/// Draws via the Gaussian scale mixture X = sqrt(c G) N, G ~ Gamma(p, 1).
std::vector<double> sample_kform(const KFormParams& params, std::size_t n, std::uint64_t seed);

}  // namespace veinforge
