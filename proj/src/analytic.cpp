#include "qaction/analytic.hpp"

#include <cmath>

namespace qaction {

namespace {

// Helpers in terms of q = exp(-s), finite for any s > 0:
//   log sinh s = s - log 2 + log1p(-q^2)
//   coth s     = (1 + q^2) / (1 - q^2)
//   1/sinh s   = 2q / (1 - q^2)
double log_sinh(double s) { return s - 0.6931471805599453 + std::log1p(-std::exp(-2.0 * s)); }
double coth(double s) {
  double q2 = std::exp(-2.0 * s);
  return (1.0 + q2) / (1.0 - q2);
}
double inv_sinh(double s) {
  double q = std::exp(-s);
  return 2.0 * q / (1.0 - q * q);
}

}  // namespace

double ho_kernel_log(double m, double omega, double hbar, double a, double b, double T) {
  constexpr double two_pi = 6.283185307179586;
  double s = omega * T;
  double pref = 0.5 * (std::log(m * omega / (two_pi * hbar)) - log_sinh(s));
  double expo = -(m * omega / (2.0 * hbar)) * ((a * a + b * b) * coth(s) - 2.0 * a * b * inv_sinh(s));
  return pref + expo;
}

double ho_kernel(double m, double omega, double hbar, double a, double b, double T) {
  return std::exp(ho_kernel_log(m, omega, hbar, a, b, T));
}

double ho_eta(double m, double omega, double hbar, double y, double x, double T, double G0) {
  return std::log(G0) - ho_kernel_log(m, omega, hbar, x, y, T);
}

double ho_deta_y(double m, double omega, double hbar, double y, double x, double T) {
  double s = omega * T;
  return (m * omega / hbar) * (y * coth(s) - x * inv_sinh(s));
}

double ho_classical_path(double a, double b, double T, double omega, double t) {
  double den = -std::expm1(-2.0 * omega * T);
  double r1 = std::exp(-omega * t) * -std::expm1(-2.0 * omega * (T - t)) / den;
  double r2 = std::exp(-omega * (T - t)) * -std::expm1(-2.0 * omega * t) / den;
  return a * r1 + b * r2;
}

double ho_sigma(double m, double omega, double a, double b, double T) {
  double s = omega * T;
  return 0.5 * m * omega * ((a * a + b * b) * coth(s) - 2.0 * a * b * inv_sinh(s));
}

}  // namespace qaction
