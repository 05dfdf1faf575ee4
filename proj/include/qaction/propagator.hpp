#pragma once

#include <memory>
#include <vector>

#include "qaction/exec.hpp"
#include "qaction/spectrum.hpp"

namespace qaction {

// G(y,T;x,0) = sum_n psi_n(y) psi_n(x) e^{-E_n T / hbar} tabulated on a
// window^2 lattice. values holds the plain-double amplitudes; the raw dd sums
// (with the e^{-E_0 T/hbar} prefactor split off in log space) stay available
// for the eta builder.
struct PropagatorTable {
  std::shared_ptr<const SpectralDecomposition> spec;
  std::vector<int> nodes;         // window node indices into the grid
  std::vector<double> positions;  // grid positions of those nodes
  double T = 0.0;
  double hbar = 1.0;

  int n_states_used = 0;
  double truncation_tail = 0.0;   // relative weight of the last retained state
  bool truncation_warning = false;  // tail still above the cut when states ran out

  std::vector<double> values;     // G[i*w + j], i indexes y, j indexes x
  std::vector<double> raw_hi;     // dd sum without the ground-state prefactor
  std::vector<double> raw_lo;
  double log_prefactor = 0.0;     // -E_0 T / hbar

  int size() const { return static_cast<int>(positions.size()); }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * size() + j]; }
};

// eta = -log(G / G0) with its derivative fields on the same window lattice.
// deta_y(i,j) is d eta / dy at (y_i, x_j); deta_x is the x-derivative, equal
// to deta_y transposed because G is symmetric.
struct EtaField {
  std::vector<double> positions;
  double T = 0.0;
  double hbar = 1.0;
  double G0 = 1.0;

  std::vector<double> eta;
  std::vector<double> deta_y;
  std::vector<double> deta_x;

  int size() const { return static_cast<int>(positions.size()); }
  double eta_at(int i, int j) const { return eta[static_cast<std::size_t>(i) * size() + j]; }
  double dy_at(int i, int j) const { return deta_y[static_cast<std::size_t>(i) * size() + j]; }
  double dx_at(int i, int j) const { return deta_x[static_cast<std::size_t>(i) * size() + j]; }
  double log_G(int i, int j) const { return std::log(G0) - eta_at(i, j); }
};

// Single amplitude. Positions are evaluated at grid nodes when they match one
// (to dd accuracy) and by 4-point polynomial interpolation of the
// eigenfunctions otherwise. Truncation keeps states while
// e^{-(E_n - E_0) T / hbar} >= tail threshold (default well below the 1e-14
// contract so the alternating spectral tail cannot pollute small-T corners).
double euclidean_propagator(const SpectralDecomposition& spec, double x, double y, double T);

PropagatorTable build_propagator_table(std::shared_ptr<const SpectralDecomposition> spec,
                                       const Window& window, double T,
                                       Exec exec = Exec::parallel,
                                       double wall_margin_fraction = 0.05);

// Derivatives come from differentiating the spectral sum (exact in n,
// 4th-order in dx), never from differencing log G: the ratio (dG/dy)/G keeps
// relative accuracy even where G is tiny. All sums and the final division run
// in dd. Throws domain_error naming the entry if any G is nonpositive.
EtaField build_eta_field(const PropagatorTable& table, double G0 = 1.0,
                         Exec exec = Exec::parallel);

}  // namespace qaction
