#pragma once

#include <vector>

#include "qaction/errors.hpp"

namespace qaction {

// Uniform spatial grid with hard-wall endpoints (wavefunctions vanish at both
// edges). Node i sits at x_min + i*dx.
struct Grid {
  double x_min = 0.0;
  double x_max = 0.0;
  int n_points = 0;

  double dx() const { return (x_max - x_min) / (n_points - 1); }
  double node(int i) const { return x_min + i * dx(); }
  int nearest_node(double x) const;
  void validate() const;
};

// V(x) = sum_k coeffs[k] x^k, evaluated by Horner.
struct PolynomialPotential {
  std::vector<double> coeffs;

  double operator()(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;
  int degree() const;
  // Confining on the line: even leading degree with a positive coefficient.
  bool confining() const;
  PolynomialPotential shifted(double c) const;  // V + c
  PolynomialPotential scaled(double s) const;   // s * V
  // Minimum over [lo, hi]: dense scan plus local parabolic refinement.
  double min_on(double lo, double hi) const;
  double argmin_on(double lo, double hi) const;
};

struct ClassicalSystem {
  double mass = 1.0;
  PolynomialPotential potential;
  double hbar = 1.0;
  // Accept a non-confining V as a hard-wall box problem instead of rejecting it.
  bool box_regularized = false;
};

// Observation window: closed interval [lo, hi] sampled on n_nodes points that
// are snapped to grid nodes.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
  int n_nodes = 0;
};

// Grid node indices backing the window samples. Rejects windows that reach
// into the wall margin, where the hard walls contaminate the eta field.
std::vector<int> window_node_indices(const Grid& grid, const Window& w,
                                     double wall_margin_fraction = 0.05);

// Box sized from the spectral content the run will actually retain: walls are
// placed where V exceeds the largest kept energy (set by the smallest T via
// the truncation rule) with margin, so high retained states are not distorted.
// Scale-covariant under m -> m/alpha, V -> alpha V, T -> T/alpha.
Grid auto_grid(const ClassicalSystem& sys, double T_min);

}  // namespace qaction
