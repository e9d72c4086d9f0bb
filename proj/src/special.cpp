#include "veinforge/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace veinforge {
namespace {

constexpr double kEps = 1e-16;
constexpr double kEuler = 0.57721566490153286061;

// Gamma-function combinations needed by Temme's series for |mu| <= 1/2:
//   gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu),  gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2.
// Near mu = 0 the difference cancels, so use the Taylor series of 1/G(1+z).
struct TemmeGammas {
  double gam1, gam2, gampl, gammi;
};

TemmeGammas temme_gammas(double mu) {
  TemmeGammas g{};
  g.gampl = 1.0 / std::tgamma(1.0 + mu);
  g.gammi = 1.0 / std::tgamma(1.0 - mu);
  if (std::abs(mu) < 1e-3) {
    // 1/G(1+z) = 1 + c2 z + c3 z^2 + ... with the classic coefficients.
    constexpr double c3 = -0.6558780715202538;
    constexpr double c4 = -0.0420026350340952;
    constexpr double c5 = 0.1665386113822915;
    constexpr double c6 = -0.0421977345555443;
    constexpr double c7 = -0.0096219715278770;
    constexpr double c8 = 0.0072189432466630;
    const double m2 = mu * mu;
    g.gam1 = -(kEuler + m2 * (c4 + m2 * (c6 + m2 * c8)));
    g.gam2 = 1.0 + m2 * (c3 + m2 * (c5 + m2 * c7));
  } else {
    g.gam1 = (g.gammi - g.gampl) / (2.0 * mu);
    g.gam2 = (g.gammi + g.gampl) / 2.0;
  }
  return g;
}

// Returns (K_mu, K_{mu+1}) for |mu| <= 1/2, both multiplied by exp(x) when scaled.
std::array<double, 2> k_pair(double mu, double x, bool scaled) {
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double mu2 = mu * mu;
  if (x < 2.0) {
    // Temme's series.
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i < 10000; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      c *= d / i;
      p /= i - mu;
      q /= i + mu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    const double s = scaled ? std::exp(x) : 1.0;
    return {sum * s, sum1 * xi2 * s};
  }
  // Steed's continued fraction (Temme's variant).
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i < 100000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h = a1 * h;
  double kmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  if (!scaled) kmu *= std::exp(-x);
  const double k1 = kmu * (mu + x + 0.5 - h) * xi;
  return {kmu, k1};
}

double bessel_k_impl(double nu, double x, bool scaled) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be positive");
  if (!std::isfinite(nu)) throw std::domain_error("bessel_k: order must be finite");
  if (std::isinf(x)) return 0.0;
  nu = std::abs(nu);
  const int n = static_cast<int>(nu + 0.5);
  const double mu = nu - n;
  auto [k0, k1] = k_pair(mu, x, scaled);
  const double xi2 = 2.0 / x;
  for (int i = 1; i <= n; ++i) {
    const double next = (mu + i) * xi2 * k1 + k0;
    k0 = k1;
    k1 = next;
  }
  return k0;
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

double bessel_k(double nu, double x) { return bessel_k_impl(nu, x, false); }

double bessel_k_scaled(double nu, double x) { return bessel_k_impl(nu, x, true); }

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int max_intervals) {
  QuadratureResult out;
  if (a == b) return out;
  std::priority_queue<Panel> panels;
  Panel first = gauss_kronrod(f, a, b);
  out.evaluations = 15;
  double value = first.value, error = first.error;
  panels.push(first);
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (static_cast<int>(panels.size()) >= max_intervals) {
      throw QuadratureError("quadrature did not converge, achieved error " +
                                std::to_string(error),
                            error);
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("quadrature interval underflow, achieved error " +
                                std::to_string(error),
                            error);
    }
    const Panel left = gauss_kronrod(f, worst.a, mid);
    const Panel right = gauss_kronrod(f, mid, worst.b);
    out.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  value = 0.0;
  error = 0.0;
  while (!panels.empty()) {
    value += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  if (!std::isfinite(value)) throw QuadratureError("quadrature produced a non-finite value", error);
  out.value = value;
  out.error = error;
  return out;
}

}  // namespace veinforge
