#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qaction/exec.hpp"
#include "qaction/propagator.hpp"

namespace qaction {

// The reconstructed quantum action: mass gauge m_tilde, potential coefficients
// v_k (no constant term; only differences of V_tilde are observable), anchor
// V0 with min-on-window = 0 convention, and normalization Z_tilde. Only the
// product m_tilde * (V_tilde - V0) is gauge invariant; m_tilde itself is a
// convention recorded in gauge_tag.
struct QuantumAction {
  double m_tilde = 1.0;
  PolynomialPotential potential_tilde;
  double V0 = 0.0;
  double Z_tilde = 1.0;
  double T = 0.0;  // +inf marks the ground-state (infinite-time) limit
  double hbar = 1.0;
  std::string gauge_tag;
};

struct FitReport {
  double residual_rms = 0.0;  // dimensionless, normalized by max |rhs|
  double residual_max = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<int> basis_degrees;
  double condition_number = 0.0;
};

// Ground-state route: (2 m_tilde / hbar^2)(V_tilde(x) - V0) = (psi_0'/psi_0)^2
// tabulated pointwise over every grid node inside the window (or, with no
// window, wherever psi_0 is above 1e-12 of its max) and projected onto the
// polynomial basis. Throws domain_error if psi_0 dips below the floor inside
// a requested window.
QuantumAction reconstruct_fk(const SpectralDecomposition& spec, double m_tilde_gauge,
                             std::optional<Window> window = std::nullopt,
                             const std::vector<int>& basis_degrees = {2, 4, 6, 8});

// Finite-T route: least squares on
//   (2 m_tilde / hbar^2)[V_tilde(b) - V_tilde(a)] = (deta/dy)^2 - (deta/dx)^2
// over unordered window pairs (diagonal pairs are identically 0 = 0 and act
// as consistency checks, not constraints). Residuals are normalized by
// max |rhs|. Rank-deficient designs raise numeric_error naming the null
// direction. Windows above 101 nodes are pair-subsampled deterministically
// from the seed.
std::pair<QuantumAction, FitReport> fit_finite_T(const EtaField& eta, double m_tilde_gauge,
                                                 const std::vector<int>& basis_degrees,
                                                 Exec exec = Exec::parallel,
                                                 std::uint64_t seed = 12345,
                                                 int max_pairs = 6000);

// One trajectory-side action value Sigma_tilde(b, a) attached to a window pair.
struct SigmaSample {
  int i = 0;  // window index of a
  int j = 0;  // window index of b
  double sigma = 0.0;
};

struct ZEstimate {
  double log_Z = 0.0;
  double Z = 0.0;
  double max_dev = 0.0;  // the conjecture's residual
  int n_samples = 0;
};

// log Z = mean over samples of [-eta(b,a) + log G0 + Sigma/hbar]; the max
// deviation from that mean is exactly the residual of G = Z e^{-Sigma/hbar}.
ZEstimate estimate_Z(const QuantumAction& action, const EtaField& eta,
                     const std::vector<SigmaSample>& trajectories);

}  // namespace qaction
