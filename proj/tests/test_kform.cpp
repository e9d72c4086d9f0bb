#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "veinforge/kform.hpp"
#include "veinforge/random.hpp"
#include "veinforge/special.hpp"

using namespace veinforge;

namespace {

// Independent density: p, c straight from the defining formula with
// std::cyl_bessel_k, normalised by Simpson over a wide window.
double raw_density(double x, double p, double c) {
  const double ax = std::abs(x);
  return std::pow(ax, p - 0.5) * std::cyl_bessel_k(std::abs(p - 0.5), std::sqrt(2.0 / c) * ax);
}

// Largest log(target / Laplace(b)) over a grid, plus a safety margin.
double laplace_log_bound(const KFormParams& f, double b) {
  double best = -1e300;
  const double span = kform_support(f);
  for (int i = 1; i <= 200000; ++i) {
    const double x = span * i / 200000.0;
    const double lq = -std::log(2.0 * b) - x / b;
    best = std::max(best, kform_log_pdf(x, f) - lq);
  }
  return best + 1e-3;
}

// Five-point symmetric data set with a prescribed kurtosis and variance:
// twelve zeros plus +-a, +-b, so n = 16.
std::vector<double> five_point(double sk, double sv) {
  const double s = 8.0 * sv;      // a^2 + b^2
  const double q = sk * s * s / 8.0;  // a^4 + b^4
  const double prod = (s * s - q) / 2.0;
  const double disc = std::sqrt(s * s - 4.0 * prod);
  const double a2 = (s + disc) / 2.0, b2 = (s - disc) / 2.0;
  std::vector<double> d(12, 0.0);
  for (double v : {std::sqrt(a2), -std::sqrt(a2), std::sqrt(b2), -std::sqrt(b2)}) d.push_back(v);
  return d;
}

}  // namespace

TEST_CASE("moment inversion") {
  const auto f = kform_from_moments(6.0, 10.0);
  CHECK(f.p == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.c == doctest::Approx(10.0).epsilon(1e-14));
  CHECK_THROWS_AS(kform_from_moments(3.0, 1.0), NonLeptokurticError);
  CHECK_THROWS_AS(kform_from_moments(2.5, 1.0), NonLeptokurticError);
  try {
    kform_from_moments(2.5, 1.0);
  } catch (const NonLeptokurticError& e) {
    CHECK(e.kurtosis() == 2.5);
  }
}

TEST_CASE("constructed data recovers a reference fit") {
  const double p = 0.6849, c = 24.5930;
  const auto data = five_point(3.0 + 3.0 / p, p * c);
  REQUIRE(data.size() == 16);
  const auto m = sample_moments(data);
  CHECK(std::abs(m.mean) < 1e-12);
  const auto f = estimate_kform(std::span<const double>(data));
  CHECK(std::abs(f.p - p) < 1e-6);
  CHECK(std::abs(f.c - c) < 1e-6);
}

TEST_CASE("sample moments are population moments") {
  const std::vector<double> d{1.0, 2.0, 3.0, 4.0};
  const auto m = sample_moments(d);
  CHECK(m.mean == 2.5);
  CHECK(m.variance == doctest::Approx(1.25));
  // m4 = (2 * 1.5^4 + 2 * 0.5^4) / 4
  CHECK(m.kurtosis == doctest::Approx((2 * 5.0625 + 2 * 0.0625) / 4 / (1.25 * 1.25)));
}

TEST_CASE("density matches the direct formula and integrates to one") {
  for (auto f : {KFormParams{1.0, 10.0}, KFormParams{0.3, 2.0}, KFormParams{0.6849, 24.593},
                 KFormParams{4.0, 0.2}}) {
    const double L = kform_support(f);
    const double raw_mass =
        2.0 * integrate([&](double x) { return raw_density(x, f.p, f.c); }, 0.0, L, 1e-13, 1e-11)
                  .value;
    for (double x : {0.05, 0.7, 2.0, 9.0}) {
      CHECK(kform_pdf(x, f) == doctest::Approx(raw_density(x, f.p, f.c) / raw_mass).epsilon(1e-8));
      CHECK(kform_pdf(-x, f) == kform_pdf(x, f));
      CHECK(kform_log_pdf(x, f) == doctest::Approx(std::log(kform_pdf(x, f))).epsilon(1e-12));
    }
    const double mass = 2.0 * integrate([&](double x) { return kform_pdf(x, f); }, 0.0, L).value;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("variance and kurtosis identities by quadrature") {
  for (auto f : {KFormParams{1.0, 10.0}, KFormParams{0.3, 2.0}, KFormParams{2.5, 0.7}}) {
    const double L = kform_support(f);
    auto moment = [&](int k) {
      return 2.0 * integrate([&](double x) { return std::pow(x, k) * kform_pdf(x, f); }, 0.0, L)
                       .value;
    };
    const double m2 = moment(2), m4 = moment(4);
    CHECK(std::abs(m2 / (f.p * f.c) - 1.0) < 1e-3);
    CHECK(std::abs(m4 / (m2 * m2) / (3.0 + 3.0 / f.p) - 1.0) < 1e-3);
  }
}

TEST_CASE("density at the origin") {
  CHECK(std::isinf(kform_pdf(0.0, {0.5, 1.0})));
  CHECK(std::isinf(kform_pdf(0.0, {0.3, 1.0})));
  const KFormParams f{1.0, 2.0};  // Laplace with scale 1
  CHECK(kform_pdf(0.0, f) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(kform_pdf(1e-9, f) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("accept-reject round trip recovers the parameters") {
  const KFormParams f{1.0, 10.0};
  const double b = 1.25 * std::sqrt(f.c / 2.0);
  oracle::KFormSampler draw([&](double x) { return kform_log_pdf(x, f); }, b,
                            laplace_log_bound(f, b), 2024);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = draw();
  const auto fit = estimate_kform(std::span<const double>(xs));
  CHECK(std::abs(fit.p - 1.0) < 0.1);
  CHECK(std::abs(fit.c / 10.0 - 1.0) < 0.1);
}

TEST_CASE("mixture sampler is consistent with the fit") {
  for (auto f : {KFormParams{0.7, 3.0}, KFormParams{2.0, 1.5}}) {
    const auto xs = sample_kform(f, 200000, 11);
    const auto fit = estimate_kform(std::span<const double>(xs));
    CHECK(std::abs(fit.p / f.p - 1.0) < 0.15);
    CHECK(std::abs(fit.c / f.c - 1.0) < 0.15);
    CHECK(sample_kform(f, 50, 3) == sample_kform(f, 50, 3));
  }
}

TEST_CASE("distance identity, sign and symmetry") {
  const KFormParams f{0.8, 4.0};
  CHECK(std::abs(kform_distance(f, f, KFormDistance::KL)) < 1e-8);
  CHECK(std::abs(kform_distance(f, f, KFormDistance::L2)) < 1e-8);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const KFormParams a{rng.uniform(0.3, 4.0), rng.uniform(0.1, 30.0)};
    const KFormParams b{rng.uniform(0.3, 4.0), rng.uniform(0.1, 30.0)};
    CHECK(kform_distance(a, b, KFormDistance::KL) >= 0.0);
    const double ab = kform_distance(a, b, KFormDistance::L2);
    const double ba = kform_distance(b, a, KFormDistance::L2);
    CHECK(std::abs(ab - ba) < 1e-10);
  }
}

TEST_CASE("L2 distance agrees with a Simpson oracle and obeys the triangle inequality") {
  const KFormParams a{1.0, 2.0}, b{1.5, 1.0}, c{3.0, 4.0};
  auto oracle_l2 = [](const KFormParams& f, const KFormParams& g) {
    const double L = std::max(kform_support(f), kform_support(g));
    auto sq = [&](double x) {
      const double d = kform_pdf(x, f) - kform_pdf(x, g);
      return d * d;
    };
    return std::sqrt(2.0 * (oracle::simpson(sq, 1e-12, 1.0, 200000) +
                            oracle::simpson(sq, 1.0, L, 200000)));
  };
  CHECK(kform_distance(a, b, KFormDistance::L2) ==
        doctest::Approx(oracle_l2(a, b)).epsilon(1e-6));
  const double ab = kform_distance(a, b, KFormDistance::L2);
  const double bc = kform_distance(b, c, KFormDistance::L2);
  const double ac = kform_distance(a, c, KFormDistance::L2);
  CHECK(ac <= ab + bc + 1e-12);
}

TEST_CASE("KL between Laplace laws has a closed form") {
  // p = 1 is Laplace with scale sqrt(c / 2); KL = ln(b2/b1) + b1/b2 - 1.
  const KFormParams f{1.0, 2.0}, g{1.0, 8.0};
  const double b1 = 1.0, b2 = 2.0;
  CHECK(kform_distance(f, g, KFormDistance::KL) ==
        doctest::Approx(std::log(b2 / b1) + b1 / b2 - 1.0).epsilon(1e-8));
}

TEST_CASE("L2 diverges for heavy shapes") {
  CHECK_THROWS_AS(kform_distance({0.2, 1.0}, {1.0, 1.0}, KFormDistance::L2), DivergentDistance);
  CHECK_THROWS_AS(kform_distance({1.0, 1.0}, {0.25, 1.0}, KFormDistance::L2), DivergentDistance);
  CHECK_NOTHROW(kform_distance({0.2, 1.0}, {1.0, 1.0}, KFormDistance::KL));
  CHECK(parse_kform_distance("kl") == KFormDistance::KL);
  CHECK(parse_kform_distance("l2") == KFormDistance::L2);
  CHECK_THROWS(parse_kform_distance("l1"));
  CHECK_THROWS(KFormParams{0.0, 1.0}.validate());
  CHECK_THROWS(KFormParams{1.0, -1.0}.validate());
}

TEST_CASE("log-Gabor filter") {
  const GrayImage flat(32, 32, 0.7);
  const auto out = log_gabor_filter(flat);
  for (double v : out.pixels()) CHECK(std::abs(v) < 1e-12);

  Rng rng(9);
  GrayImage a(40, 32), b(40, 32);
  for (double& v : a.pixels()) v = rng.uniform();
  for (double& v : b.pixels()) v = rng.uniform();
  GrayImage mix(40, 32);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.pixels()[i] = 2.0 * a.pixels()[i] - 0.5 * b.pixels()[i];
  const auto fa = log_gabor_filter(a), fb = log_gabor_filter(b), fm = log_gabor_filter(mix);
  double mean = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    CHECK(fm.pixels()[i] == doctest::Approx(2.0 * fa.pixels()[i] - 0.5 * fb.pixels()[i]).epsilon(1e-9));
    mean += fa.pixels()[i];
  }
  CHECK(std::abs(mean / a.size()) < 1e-12);

  // Impulse response energy equals the mean squared transfer (Parseval).
  GrayImage imp(32, 32, 0.0);
  imp.at(5, 7) = 1.0;
  const auto h = log_gabor_filter(imp);
  double energy = 0.0;
  for (double v : h.pixels()) energy += v * v;
  double transfer = 0.0;
  const double ls = std::log(0.55);
  for (int v = 0; v < 32; ++v) {
    for (int u = 0; u < 32; ++u) {
      const double fu = (u < 16 ? u : u - 32) / 32.0, fv = (v < 16 ? v : v - 32) / 32.0;
      const double r = std::hypot(fu, fv);
      if (r == 0.0) continue;
      const double g = std::exp(-std::pow(std::log(r / 0.1), 2) / (2.0 * ls * ls));
      transfer += g * g;
    }
  }
  CHECK(energy == doctest::Approx(transfer / (32.0 * 32.0)).epsilon(1e-9));
  CHECK(h.pixels()[7 * 32 + 5] > 0.0);
  CHECK_THROWS(log_gabor_filter(GrayImage(8, 32, 0.0)));
}

TEST_CASE("inner products") {
  // Self inner product from int_0^inf t^(2p-1) K_(p-1/2)(t)^2 dt
  //   = sqrt(pi) Gamma(2p - 1/2) Gamma(1/2) Gamma(p) / (4 Gamma(p + 1/2)),
  // with the density constant read off a single pdf value.
  for (auto f : {KFormParams{0.26, 1.5}, KFormParams{0.4, 0.01}, KFormParams{1.0, 2.0}, KFormParams{3.0, 7.0}}) {
    const double nu = std::abs(f.p - 0.5), b = std::sqrt(2.0 / f.c);
    const double k = kform_pdf(1.0, f) / std::cyl_bessel_k(nu, b);
    const double pi = std::numbers::pi;
    const double t = std::sqrt(pi) * std::tgamma(2 * f.p - 0.5) * std::sqrt(pi) * std::tgamma(f.p) /
                     (4.0 * std::tgamma(f.p + 0.5));
    const double expected = 2.0 * k * k * std::pow(b, -2.0 * f.p) * t;
    CHECK(kform_inner_product(f, f) == doctest::Approx(expected).epsilon(1e-9));
  }
  // Cross terms against direct quadrature of the product.
  const KFormParams a{0.7, 2.0}, b{1.8, 0.5};
  const double direct =
      2.0 * integrate([&](double x) { return kform_pdf(x, a) * kform_pdf(x, b); }, 0.0,
                      std::max(kform_support(a), kform_support(b)))
                .value;
  CHECK(kform_inner_product(a, b) == doctest::Approx(direct).epsilon(1e-9));
  CHECK(kform_inner_product(a, b) == kform_inner_product(b, a));
  CHECK_THROWS_AS(kform_inner_product({0.2, 1.0}, {0.3, 1.0}), DivergentDistance);
}

TEST_CASE("L2 distance just above the divergence") {
  const KFormParams heavy{0.2508, 6.22e-4}, vein{0.6044, 2.48e-4}, flat{6.0, 2.8e-7};
  const double d1 = kform_distance(heavy, vein, KFormDistance::L2);
  const double d2 = kform_distance(heavy, flat, KFormDistance::L2);
  CHECK(std::isfinite(d1));
  CHECK(std::isfinite(d2));
  CHECK(d1 == kform_distance(vein, heavy, KFormDistance::L2));
  // The two evaluation routes agree where both apply.
  for (double p : {0.31, 0.4, 0.8}) {
    const KFormParams f{p, 0.002}, g{p + 0.2, 0.001};
    const double via_products = std::sqrt(kform_inner_product(f, f) + kform_inner_product(g, g) -
                                          2.0 * kform_inner_product(f, g));
    CHECK(kform_distance(f, g, KFormDistance::L2) == doctest::Approx(via_products).epsilon(1e-6));
  }
}
