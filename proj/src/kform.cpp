#include "veinforge/kform.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>

#include "veinforge/random.hpp"
#include "veinforge/special.hpp"

namespace veinforge {
namespace {

// FFTW planning touches global state; execution with new-array calls does not.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

void fft2d(std::vector<std::complex<double>>& data, int width, int height, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_plan_mutex());
    plan = fftw_plan_dft_2d(height, width, buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute_dft(plan, buf, buf);
  std::lock_guard lock(fftw_plan_mutex());
  fftw_destroy_plan(plan);
}

double frequency(int k, int n) {
  return static_cast<double>(k < (n + 1) / 2 ? k : k - n) / n;
}

// log K_nu(z), falling back to the small-argument form when K overflows.
double log_bessel_k(double nu, double z) {
  const double ks = bessel_k_scaled(nu, z);
  if (std::isfinite(ks) && ks > 0.0) return std::log(ks) - z;
  return std::lgamma(nu) + (nu - 1.0) * std::numbers::ln2 - nu * std::log(z);
}

}  // namespace

GrayImage log_gabor_filter(const GrayImage& image, double center_frequency, double sigma_ratio) {
  if (image.width() < 16 || image.height() < 16) {
    throw std::invalid_argument("log_gabor_filter: image must be at least 16x16");
  }
  if (!(center_frequency > 0.0) || !(sigma_ratio > 0.0 && sigma_ratio < 1.0)) {
    throw std::invalid_argument("log_gabor_filter: bad filter parameters");
  }
  const int w = image.width(), h = image.height();
  std::vector<std::complex<double>> spec(image.size());
  const auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) spec[i] = px[i];
  fft2d(spec, w, h, FFTW_FORWARD);

  const double denom = 2.0 * std::pow(std::log(sigma_ratio), 2);
  for (int ky = 0; ky < h; ++ky) {
    const double fy = frequency(ky, h);
    for (int kx = 0; kx < w; ++kx) {
      const double fx = frequency(kx, w);
      const double f = std::hypot(fx, fy);
      const double gain = f == 0.0 ? 0.0 : std::exp(-std::pow(std::log(f / center_frequency), 2) / denom);
      spec[static_cast<std::size_t>(ky) * w + kx] *= gain;
    }
  }
  fft2d(spec, w, h, FFTW_BACKWARD);

  GrayImage out(w, h);
  const double norm = 1.0 / static_cast<double>(image.size());
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = spec[i].real() * norm;
  return out;
}

void KFormParams::validate() const {
  if (!(p > 0.0) || !(c > 0.0) || !std::isfinite(p) || !std::isfinite(c)) {
    throw std::invalid_argument("K-form parameters must be finite and positive");
  }
}

NonLeptokurticError::NonLeptokurticError(double kurtosis)
    : std::runtime_error("non-leptokurtic data: kurtosis " + std::to_string(kurtosis) +
                         " <= 3"),
      kurtosis_(kurtosis) {}

SampleMoments sample_moments(std::span<const double> data) {
  if (data.empty()) throw std::invalid_argument("sample_moments: empty data");
  SampleMoments m;
  const double n = static_cast<double>(data.size());
  for (double v : data) m.mean += v;
  m.mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : data) {
    const double d = (v - m.mean) * (v - m.mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  m.variance = m2;
  m.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  return m;
}

KFormParams kform_from_moments(double kurtosis, double variance) {
  if (!(kurtosis > 3.0)) throw NonLeptokurticError(kurtosis);
  if (!(variance > 0.0)) throw std::invalid_argument("kform_from_moments: variance must be positive");
  KFormParams k;
  k.p = 3.0 / (kurtosis - 3.0);
  k.c = variance / k.p;
  return k;
}

KFormParams estimate_kform(std::span<const double> data) {
  const SampleMoments m = sample_moments(data);
  return kform_from_moments(m.kurtosis, m.variance);
}

KFormParams estimate_kform(const GrayImage& filtered) { return estimate_kform(filtered.pixels()); }

double kform_normalizer(const KFormParams& k) {
  k.validate();
  return 0.5 * std::sqrt(std::numbers::pi) * std::tgamma(k.p) * std::pow(2.0 * k.c, 0.5 * k.p + 0.25);
}

double kform_log_pdf(double x, const KFormParams& k) {
  k.validate();
  const double nu = k.p - 0.5;
  const double a = std::sqrt(2.0 / k.c);
  const double log_z = std::log(0.5 * std::sqrt(std::numbers::pi)) + std::lgamma(k.p) +
                       (0.5 * k.p + 0.25) * std::log(2.0 * k.c);
  const double ax = std::abs(x);
  if (ax == 0.0) {
    if (nu <= 0.0) return std::numeric_limits<double>::infinity();
    // |x|^nu K_nu(a|x|) -> Gamma(nu) 2^(nu-1) a^-nu
    return std::lgamma(nu) + (nu - 1.0) * std::numbers::ln2 - nu * std::log(a) - log_z;
  }
  return nu * std::log(ax) + log_bessel_k(nu, a * ax) - log_z;
}

double kform_pdf(double x, const KFormParams& k) { return std::exp(kform_log_pdf(x, k)); }

double kform_support(const KFormParams& k) { return 50.0 * std::sqrt(k.p * k.c); }

KFormDistance parse_kform_distance(const std::string& name) {
  if (name == "kl") return KFormDistance::KL;
  if (name == "l2") return KFormDistance::L2;
  throw std::invalid_argument("unknown distance '" + name + "' (expected kl or l2)");
}

double kform_inner_product(const KFormParams& f1, const KFormParams& f2) {
  f1.validate();
  f2.validate();
  if (f1.p + f2.p <= 0.5) {
    throw DivergentDistance("K-form inner product diverges: p1 + p2 <= 1/2");
  }
  // Canonical argument order keeps the result exactly symmetric.
  const bool swap = f2.p < f1.p || (f2.p == f1.p && f2.c < f1.c);
  const KFormParams& a = swap ? f2 : f1;
  const KFormParams& b = swap ? f1 : f2;
  // Both densities are Gaussian scale mixtures over Gamma(p) variances, so
  // <f1, f2> = E[N(0; 0, c1 G1 + c2 G2)]. Writing G1 = r s, G2 = r (1 - s)
  // integrates r in closed form and leaves a Beta-type integral over s.
  const double log_front = std::lgamma(a.p + b.p - 0.5) - std::lgamma(a.p) - std::lgamma(b.p) -
                           0.5 * std::log(2.0 * std::numbers::pi);
  auto g = [&](double s) { return 1.0 / std::sqrt(a.c * s + b.c * (1.0 - s)); };
  // s = u^(1/p1) on the left half and 1 - s = w^(1/p2) on the right absorb
  // the endpoint powers.
  auto left = [&](double u) {
    const double s = std::pow(u, 1.0 / a.p);
    return std::pow(1.0 - s, b.p - 1.0) * g(s) / a.p;
  };
  auto right = [&](double w) {
    const double t = std::pow(w, 1.0 / b.p);
    return std::pow(1.0 - t, a.p - 1.0) * g(1.0 - t) / b.p;
  };
  const double beta = integrate(left, 0.0, std::pow(0.5, a.p), 1e-300, 1e-12).value +
                      integrate(right, 0.0, std::pow(0.5, b.p), 1e-300, 1e-12).value;
  return std::exp(log_front) * beta;
}

double kform_distance(const KFormParams& f1, const KFormParams& f2, KFormDistance kind) {
  f1.validate();
  f2.validate();
  if (f1 == f2) return 0.0;
  if (kind == KFormDistance::L2 && std::min(f1.p, f2.p) <= kMinL2Shape) {
    throw DivergentDistance("d_I diverges: K-form shape p <= 0.25 has no finite L2 norm");
  }
  if (kind == KFormDistance::L2 && std::min(f1.p, f2.p) < kDirectL2Shape) {
    // Near the divergence most of the squared mass lies far below any
    // representable |x|, so expand the square into inner products instead.
    const double d2 = kform_inner_product(f1, f1) + kform_inner_product(f2, f2) -
                      2.0 * kform_inner_product(f1, f2);
    return std::sqrt(std::max(0.0, d2));
  }
  const double limit = std::max(kform_support(f1), kform_support(f2));
  std::function<double(double)> integrand;
  if (kind == KFormDistance::KL) {
    integrand = [&](double x) {
      const double l1 = kform_log_pdf(x, f1);
      if (l1 == -std::numeric_limits<double>::infinity()) return 0.0;
      return std::exp(l1) * (l1 - kform_log_pdf(x, f2));
    };
  } else {
    integrand = [&](double x) {
      const double d = kform_pdf(x, f1) - kform_pdf(x, f2);
      return d * d;
    };
  }
  // The mass sits near zero; split there and at a few scales so the
  // adaptive rule sees the peak and the tail separately.
  const double s = std::min(std::sqrt(f1.p * f1.c), std::sqrt(f2.p * f2.c));
  const double cuts[] = {0.0, 0.1 * s, s, 5.0 * s, limit};
  double total = 0.0;
  for (int i = 0; i + 1 < 5; ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += integrate(integrand, cuts[i], cuts[i + 1], 1e-13, 1e-10).value;
  }
  total *= 2.0;  // both densities are even
  if (kind == KFormDistance::KL) return std::max(0.0, total);
  return std::sqrt(std::max(0.0, total));
}

namespace {

// Marsaglia-Tsang, with the boost for shapes below one.
double gamma_draw(double shape, Rng& rng) {
  if (shape < 1.0) {
    double u;
    do {
      u = rng.uniform();
    } while (u <= 0.0);
    return gamma_draw(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

std::vector<double> sample_kform(const KFormParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = std::sqrt(params.c * gamma_draw(params.p, rng)) * rng.normal();
  return out;
}

}  // namespace veinforge
