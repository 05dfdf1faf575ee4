#pragma once

#include <string>

#include "qaction/exec.hpp"
#include "qaction/quantum_action.hpp"

namespace qaction {

// The scale family m -> m/alpha, V -> alpha V, T -> T/alpha, under which
// H -> alpha H and the transition amplitude is invariant.
struct ScaleTransform {
  double alpha = 1.0;
};

// Exact coefficient arithmetic on the polynomial; returns the transformed
// system and T' = T/alpha.
std::pair<ClassicalSystem, double> apply_scale_classical(const ClassicalSystem& sys, double T,
                                                         const ScaleTransform& tr);

// m_tilde -> m_tilde/alpha, V_tilde -> alpha V_tilde (V0 with it), T -> T/alpha;
// Z_tilde is untouched and gauge_tag records the transformation.
QuantumAction apply_scale_quantum(const QuantumAction& action, const ScaleTransform& tr);

struct InvarianceReport {
  double alpha = 1.0;
  double T = 0.0;

  double dG_rel_max = 0.0;      // max |G' - G| / G over the window lattice
  double dSigma_max = 0.0;      // max |Sigma'(b,a,T') - Sigma(b,a,T)| over sampled pairs
  double sigma_scale = 0.0;     // max |Sigma| over the same pairs
  double dProduct_rel = 0.0;    // max |Delta m_tilde (V_tilde - V0)| / scale on the window
  int n_pairs = 0;
};

struct InvarianceOptions {
  int n_states = 48;
  int sample_stride = 10;  // window decimation for the trajectory pairs
  int n_t = 2001;
  Exec exec = Exec::parallel;
  std::uint64_t seed = 12345;
};

// Solves the original and transformed systems on independently auto-sized
// grids (comparing on a shared grid would conflate discretization error with
// symmetry breaking), evaluates both amplitudes at the same window positions,
// and compares trajectory actions and the gauge-invariant product
// m_tilde (V_tilde - V0) from a refit on the transformed side.
InvarianceReport invariance_report(const ClassicalSystem& sys, const QuantumAction& action,
                                   const ScaleTransform& tr, const Window& window,
                                   const InvarianceOptions& opts = {});

}  // namespace qaction
