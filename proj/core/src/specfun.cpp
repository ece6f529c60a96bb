#include "pflow/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pflow::specfun {
namespace {

void require_finite(double v, const char* fn) {
  if (!std::isfinite(v)) throw std::domain_error(std::string(fn) + ": non-finite argument");
}

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (0.949.., 0.741.., 0.405.., 0).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
  double value;
  double error;
};

template <typename F>
Estimate gauss_kronrod15(const F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <typename F>
double adaptive_integrate(const F& f, double lo, double hi, double tol, int depth) {
  const Estimate est = gauss_kronrod15(f, lo, hi);
  if (est.error <= tol || depth == 0) return est.value;
  const double mid = 0.5 * (lo + hi);
  return adaptive_integrate(f, lo, mid, 0.5 * tol, depth - 1) +
         adaptive_integrate(f, mid, hi, 0.5 * tol, depth - 1);
}

}  // namespace

double erf_sigmoid(double z) {
  require_finite(z, "erf_sigmoid");
  return 0.5 * (1.0 + std::erf(std::sqrt(std::numbers::pi) * z / 4.0));
}

double erf_sigmoid_derivative(double z) {
  require_finite(z, "erf_sigmoid_derivative");
  return 0.25 * std::exp(-std::numbers::pi * z * z / 16.0);
}

double logistic(double z) {
  require_finite(z, "logistic");
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double normal_cdf(double z) {
  require_finite(z, "normal_cdf");
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double erfc(double z) {
  require_finite(z, "erfc");
  return std::erfc(z);
}

double owens_t(double h, double a) {
  require_finite(h, "owens_t");
  require_finite(a, "owens_t");
  if (a == 0.0) return 0.0;
  const double half_h2 = 0.5 * h * h;
  const auto integrand = [half_h2](double x) {
    const double q = 1.0 + x * x;
    return std::exp(-half_h2 * q) / q;
  };
  const double value =
      adaptive_integrate(integrand, 0.0, std::abs(a), 1e-12 * 2.0 * std::numbers::pi, 30) /
      (2.0 * std::numbers::pi);
  return a < 0.0 ? -value : value;
}

}  // namespace pflow::specfun
