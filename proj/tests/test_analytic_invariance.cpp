#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <tuple>

#include "qaction/analytic.hpp"
#include "qaction/invariance.hpp"
#include "qaction/quantum_action.hpp"
#include "qaction/spectrum.hpp"

using namespace qaction;

TEST_CASE("oscillator kernel agrees with the textbook expression") {
  double m = 1.3, w = 0.7, hbar = 1.1;
  const double two_pi = 6.283185307179586;
  for (auto [a, b, T] : {std::tuple{-0.4, 0.9, 1.7}, {0.0, 0.0, 0.3}, {2.1, -1.8, 4.0}}) {
    double s = std::sinh(w * T), c = std::cosh(w * T);
    double naive = std::sqrt(m * w / (two_pi * hbar * s)) *
                   std::exp(-(m * w / (2.0 * hbar * s)) * ((a * a + b * b) * c - 2 * a * b));
    CHECK(ho_kernel(m, w, hbar, a, b, T) == doctest::Approx(naive).epsilon(1e-13));
    CHECK(ho_kernel_log(m, w, hbar, a, b, T) ==
          doctest::Approx(std::log(naive)).epsilon(1e-12));
  }
}

TEST_CASE("kernel log stays finite and asymptotic deep in the decay regime") {
  double m = 1.0, w = 1.0, hbar = 1.0, a = 0.3, b = -0.2, T = 2000.0;
  double pi = std::acos(-1.0);
  double got = ho_kernel_log(m, w, hbar, a, b, T);
  CHECK(std::isfinite(got));
  // sinh -> e^{wT}/2 and the cross term dies: the ground state dominates.
  double want = 0.5 * std::log(m * w / (pi * hbar)) - 0.5 * w * T -
                (m * w / (2.0 * hbar)) * (a * a + b * b);
  CHECK(std::fabs(got - want) <= 1e-9);
  CHECK(ho_kernel(m, w, hbar, a, b, T) == 0.0);  // graceful underflow
}

TEST_CASE("eta closed form and its derivative are mutually consistent") {
  double m = 1.2, w = 0.9, hbar = 1.0;
  for (auto [y, x, T] : {std::tuple{1.1, -0.7, 0.8}, {0.0, 1.9, 2.2}}) {
    CHECK(ho_eta(m, w, hbar, y, x, T, std::exp(1.0)) ==
          doctest::Approx(ho_eta(m, w, hbar, y, x, T) + 1.0).epsilon(1e-12));
    double h = 1e-5;
    double fd = (ho_eta(m, w, hbar, y + h, x, T) - ho_eta(m, w, hbar, y - h, x, T)) / (2 * h);
    CHECK(ho_deta_y(m, w, hbar, y, x, T) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("closed-form path solves the Euclidean equation of motion") {
  double a = -1.4, b = 0.8, T = 3.0, w = 1.3;
  CHECK(ho_classical_path(a, b, T, w, 0.0) == doctest::Approx(a).epsilon(1e-14));
  CHECK(ho_classical_path(a, b, T, w, T) == doctest::Approx(b).epsilon(1e-14));
  double h = 1e-4;
  for (double t : {0.4, 1.5, 2.7}) {
    double xm = ho_classical_path(a, b, T, w, t - h);
    double x0 = ho_classical_path(a, b, T, w, t);
    double xp = ho_classical_path(a, b, T, w, t + h);
    CHECK((xp - 2 * x0 + xm) / (h * h) == doctest::Approx(w * w * x0).epsilon(1e-5));
  }
  // Deep-decay horizon: the stable form neither overflows nor rings.
  double far = ho_classical_path(1.0, 1.0, 600.0, 1.0, 300.0);
  CHECK(std::isfinite(far));
  CHECK(std::fabs(far) <= 1.0);

  // Action along the path by Simpson against the closed form.
  double m = 1.1;
  int n = 2001;
  double step = T / (n - 1), acc = 0.0;
  for (int k = 0; k < n; ++k) {
    double t = k * step;
    double v = (ho_classical_path(a, b, T, w, t + 1e-6) -
                ho_classical_path(a, b, T, w, t - 1e-6)) /
               2e-6;
    double x = ho_classical_path(a, b, T, w, t);
    double f = 0.5 * m * v * v + 0.5 * m * w * w * x * x;
    double wt = (k == 0 || k == n - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += wt * f;
  }
  acc *= step / 3.0;
  CHECK(acc == doctest::Approx(ho_sigma(m, w, a, b, T)).epsilon(1e-6));
}

TEST_CASE("scale maps act exactly on coefficients") {
  ClassicalSystem sys;
  sys.mass = 2.0;
  sys.hbar = 1.0;
  sys.potential.coeffs = {1.0, 0.0, 0.5, 0.0, 0.1};
  auto [sys2, T2] = apply_scale_classical(sys, 3.0, {2.0});
  CHECK(sys2.mass == 1.0);
  CHECK(T2 == 1.5);
  CHECK(sys2.hbar == sys.hbar);
  REQUIRE(sys2.potential.coeffs.size() == 5);
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(sys2.potential.coeffs[k] == 2.0 * sys.potential.coeffs[k]);
  auto [back, T3] = apply_scale_classical(sys2, T2, {0.5});
  CHECK(back.mass == sys.mass);
  CHECK(T3 == 3.0);
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(back.potential.coeffs[k] == sys.potential.coeffs[k]);

  QuantumAction act;
  act.m_tilde = 1.0;
  act.potential_tilde.coeffs = {0.0, 0.0, 0.5};
  act.V0 = 0.25;
  act.Z_tilde = 0.7;
  act.T = 4.0;
  QuantumAction act2 = apply_scale_quantum(act, {2.0});
  CHECK(act2.m_tilde == 0.5);
  CHECK(act2.potential_tilde.coeffs[2] == 1.0);
  CHECK(act2.V0 == 0.5);
  CHECK(act2.T == 2.0);
  CHECK(act2.Z_tilde == act.Z_tilde);
  CHECK(act2.gauge_tag.find("alpha") != std::string::npos);
  // The gauge-invariant content is untouched: m_tilde (V - V0) pointwise.
  for (double x : {-1.0, 0.3, 2.0})
    CHECK(act2.m_tilde * (act2.potential_tilde(x) - act2.V0) ==
          doctest::Approx(act.m_tilde * (act.potential_tilde(x) - act.V0)).epsilon(1e-15));

  CHECK_THROWS_AS(apply_scale_quantum(act, {0.0}), config_error);
  CHECK_THROWS_AS(apply_scale_classical(sys, 1.0, {-1.0}), config_error);
}

TEST_CASE("measured amplitudes and actions are invariant under the scale family") {
  ClassicalSystem sys;
  sys.potential.coeffs = {0.0, 0.0, 0.0, 0.0, 1.0};
  Grid g{-4.0, 4.0, 8001};
  auto spec = std::make_shared<SpectralDecomposition>(solve_spectrum(sys, g, 48));
  Window w{-1.0, 1.0, 81};
  auto tab = build_propagator_table(spec, w, 4.0);
  auto eta = build_eta_field(tab);
  auto [act, rep] = fit_finite_T(eta, 1.0, {2, 4, 6, 8});

  InvarianceOptions opts;
  opts.n_t = 801;
  for (double alpha : {0.5, 2.0}) {
    InvarianceReport r = invariance_report(sys, act, {alpha}, w, opts);
    CHECK(r.alpha == alpha);
    CHECK(r.T == 4.0);
    CHECK(r.n_pairs > 0);
    CHECK(r.dG_rel_max <= 1e-5);
    CHECK(r.dSigma_max <= 1e-9 * std::max(1.0, r.sigma_scale));
    CHECK(r.dProduct_rel <= 1e-5);
  }

  QuantumAction fk;
  fk.T = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(invariance_report(sys, fk, {2.0}, w, opts), config_error);
}
