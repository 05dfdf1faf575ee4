#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <string>

#include "qaction/analytic.hpp"
#include "qaction/propagator.hpp"
#include "qaction/spectrum.hpp"
#include "qaction/trajectory.hpp"

using namespace qaction;

namespace {

QuantumAction ho_action() {
  QuantumAction act;
  act.m_tilde = 1.0;
  act.potential_tilde.coeffs = {0.0, 0.0, 0.5};
  act.V0 = 0.0;
  return act;
}

// Infinite-T potential of the pure quartic (pinned elsewhere); leading
// coefficient is negative, so it only makes sense inside the window.
QuantumAction quartic_action() {
  QuantumAction act;
  act.m_tilde = 1.0;
  act.potential_tilde.coeffs = {0.0,
                                0.0,
                                0.8922043528607086,
                                0.0,
                                0.7970847262379324,
                                0.0,
                                0.05944100645933782,
                                0.0,
                                -0.01137825872010726};
  act.V0 = 0.0;
  return act;
}

}  // namespace

TEST_CASE("oscillator boundary value problem lands on the closed-form path") {
  auto act = ho_action();
  double a = -1.2, b = 0.7, T = 2.0;
  Trajectory tr = solve_trajectory(act, a, b, T);

  CHECK(tr.x.front() == doctest::Approx(a).epsilon(1e-13));
  CHECK(tr.x.back() == doctest::Approx(b).epsilon(1e-13));
  CHECK(tr.t.back() == T);

  double worst_x = 0.0, worst_v = 0.0;
  double s = std::sinh(T);
  for (int k = 0; k < tr.size(); k += 10) {
    double t = tr.t[k];
    worst_x = std::max(worst_x, std::fabs(tr.x[k] - ho_classical_path(a, b, T, 1.0, t)));
    double v_ref = (-a * std::cosh(T - t) + b * std::cosh(t)) / s;
    worst_v = std::max(worst_v, std::fabs(tr.v[k] - v_ref));
  }
  CHECK(worst_x <= 1e-9);
  CHECK(worst_v <= 1e-9);

  CHECK(std::fabs(tr.sigma - ho_sigma(1.0, 1.0, a, b, T)) <= 1e-10);
  CHECK(std::fabs(action_along(act, tr) - tr.sigma) <= 1e-12);

  auto [p_in, p_fi] = boundary_momenta(act, tr);
  CHECK(p_in == doctest::Approx((b - a * std::cosh(T)) / s).epsilon(1e-9));
  CHECK(p_fi == doctest::Approx((b * std::cosh(T) - a) / s).epsilon(1e-9));

  CHECK(tr.energy_drift <= 1e-9);
  CHECK(tr.boundary_miss <= 1e-10);
  CHECK(tr.jacobi_min > 0.0);

  // Same endpoints swapped: the Euclidean action is time-reversal even.
  Trajectory rev = solve_trajectory(act, b, a, T);
  CHECK(std::fabs(rev.sigma - tr.sigma) <= 1e-10);
}

TEST_CASE("long-time runs split into segments and stay accurate") {
  auto act = ho_action();
  double a = -1.0, b = 1.4, T = 12.0;
  Trajectory tr = solve_trajectory(act, a, b, T);
  CHECK(tr.k_segments >= 6);
  CHECK(tr.boundary_miss <= 1e-10);
  double worst = 0.0;
  for (int k = 0; k < tr.size(); k += 25)
    worst = std::max(worst, std::fabs(tr.x[k] - ho_classical_path(a, b, T, 1.0, tr.t[k])));
  CHECK(worst <= 1e-8);

  Trajectory sh = solve_trajectory(act, a, b, 0.5);
  CHECK(sh.k_segments == 1);
}

TEST_CASE("time grid is rounded to Simpson-ready segment counts") {
  auto act = ho_action();
  Trajectory tr = solve_trajectory(act, -0.5, 0.9, 7.0, 1000);
  int n = tr.size();
  CHECK(n >= 1000);
  CHECK(n % 2 == 1);
  CHECK((n - 1) % tr.k_segments == 0);
  CHECK(((n - 1) / tr.k_segments) % 2 == 0);
  double h0 = tr.t[1] - tr.t[0];
  for (int k = 1; k + 1 < n; k += 97)
    CHECK(tr.t[k + 1] - tr.t[k] == doctest::Approx(h0).epsilon(1e-12));
}

TEST_CASE("work integral closes both thermodynamic identities") {
  auto act = quartic_action();
  double a = -0.8, b = 0.6, T = 6.0;
  Trajectory tr = solve_trajectory(act, a, b, T);
  double W = work_integral(act, tr);
  double dV = act.potential_tilde(b) - act.potential_tilde(a);
  auto [p_in, p_fi] = boundary_momenta(act, tr);
  double dK = (p_fi * p_fi - p_in * p_in) / (2.0 * act.m_tilde);
  double scale = std::max(1.0, std::fabs(W));
  CHECK(std::fabs(W - dV) <= 1e-8 * scale);
  CHECK(std::fabs(W - dK) <= 1e-8 * scale);
  CHECK(tr.energy_drift <= 1e-9);
}

TEST_CASE("conjugate points are detected and refused") {
  // An inverted quadratic makes the Euclidean flow oscillatory: the Jacobi
  // field ~ sin(t) crosses zero at pi, inside any horizon beyond that.
  QuantumAction act;
  act.m_tilde = 1.0;
  act.potential_tilde.coeffs = {0.0, 0.0, -0.5};
  bool threw = false;
  try {
    solve_trajectory(act, 0.3, 0.2, 3.5);
  } catch (const domain_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("conjugate") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("out-of-assumption double-well pairs fail loudly, not silently") {
  // Sitting on the barrier top of the symmetric double well: x(t) = 0 solves
  // the flow exactly, but V'' < 0 there makes the stability field oscillate
  // and cross zero near t = pi / sqrt(|V''|) = 1.48, well inside T = 6. The
  // contract is a diagnosable error, never a quietly wrong path.
  QuantumAction act;
  act.m_tilde = 1.0;
  act.potential_tilde.coeffs = {2.53125, 0.0, -2.25, 0.0, 0.5};
  act.V0 = 0.0;
  CHECK_THROWS_AS(solve_trajectory(act, 0.0, 0.0, 6.0), qaction::error);

  CHECK_THROWS_AS(solve_trajectory(ho_action(), 0.0, 1.0, -1.0), domain_error);
}

TEST_CASE("boundary momenta agree with the eta field derivatives") {
  ClassicalSystem sys;
  sys.potential.coeffs = {0.0, 0.0, 0.5};
  Grid g{-10.0, 10.0, 20001};
  auto spec = std::make_shared<SpectralDecomposition>(solve_spectrum(sys, g, 48));
  auto tab = build_propagator_table(spec, {-2.0, 2.0, 81}, 1.0);
  auto eta = build_eta_field(tab);

  auto act = ho_action();
  double worst = 0.0;
  for (int i = 0; i < 81; i += 16) {
    for (int j = i; j < 81; j += 16) {
      Trajectory tr = solve_trajectory(act, eta.positions[i], eta.positions[j], 1.0);
      auto [r_in, r_fi] = check_momentum_condition(act, tr, eta);
      worst = std::max({worst, r_in, r_fi});
    }
  }
  CHECK(worst <= 1e-5);

  Trajectory off = solve_trajectory(act, 0.1234, 0.5, 1.0);
  CHECK_THROWS_AS(check_momentum_condition(act, off, eta), config_error);
}
