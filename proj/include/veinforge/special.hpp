#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace veinforge {

/// Modified Bessel function of the second kind, K_nu(x), for real nu and x > 0.
/// K is even in nu, so negative orders are folded onto |nu|.
/// Throws std::domain_error when x <= 0.
double bessel_k(double nu, double x);

/// exp(x) * K_nu(x). Stays representable where K_nu itself underflows.
double bessel_k_scaled(double nu, double x);

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Adaptive 7/15-point Gauss-Kronrod. Nodes never touch the interval ends, so
/// integrable endpoint singularities are fine. Throws QuadratureError if the
/// estimated error stays above max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-12, double rel_tol = 1e-10,
                           int max_intervals = 4000);

}  // namespace veinforge
