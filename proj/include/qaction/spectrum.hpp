#pragma once

#include <vector>

#include "qaction/dd.hpp"
#include "qaction/exec.hpp"
#include "qaction/grid.hpp"

namespace qaction {

// Symmetric tridiagonal operator on the interior nodes of a Grid.
struct Tridiagonal {
  std::vector<double> diag;  // size m
  std::vector<double> off;   // size m-1, couples node i and i+1

  int size() const { return static_cast<int>(diag.size()); }
};

// Three-point kinetic stencil plus the potential on the diagonal; hard walls
// are implemented by restricting to the interior nodes.
Tridiagonal build_hamiltonian(const ClassicalSystem& sys, const Grid& grid);

// Lowest part of the spectrum of the discrete Hamiltonian.
//
// Eigenfunctions carry continuum normalization (dx * sum psi^2 = 1, so the
// trapezoid quadrature of psi^2 is exactly 1) and are stored split into
// hi/lo halves: eigenpairs are Newton-refined against a double-double
// residual, which removes the eps*||H||/gap error floor a plain solver
// leaves on the small-T propagator corners.
struct SpectralDecomposition {
  Grid grid;
  ClassicalSystem system;
  int n_states = 0;
  std::vector<dd> energies;     // ascending
  std::vector<double> psi_hi;   // [k * n_points + i], zero at the walls
  std::vector<double> psi_lo;

  double ortho_defect = 0.0;    // max |<k|l> - delta| recorded at solve time
  double refine_defect = 0.0;   // largest final eigenvalue update |dlam|

  dd psi(int k, int i) const {
    std::size_t idx = static_cast<std::size_t>(k) * grid.n_points + i;
    return {psi_hi[idx], psi_lo[idx]};
  }
  double psi_value(int k, int i) const {
    std::size_t idx = static_cast<std::size_t>(k) * grid.n_points + i;
    return psi_hi[idx] + psi_lo[idx];
  }
  const double* state_hi(int k) const {
    return psi_hi.data() + static_cast<std::size_t>(k) * grid.n_points;
  }
};

// Sturm bisection + inverse iteration + double-double Newton refinement.
// Throws config_error for impossible requests, numeric_error with iteration
// diagnostics if refinement fails to converge.
SpectralDecomposition solve_spectrum(const ClassicalSystem& sys, const Grid& grid,
                                     int n_states, Exec exec = Exec::parallel);

}  // namespace qaction
