#pragma once

#include <utility>
#include <vector>

#include "qaction/quantum_action.hpp"

namespace qaction {

// Classical trajectory of the quantum action in imaginary time:
// m_tilde x'' = +V_tilde'(x) (the Euclidean equation of motion), solved as a
// two-point boundary value problem x(0) = a, x(T) = b.
struct Trajectory {
  std::vector<double> t;   // uniform time grid
  std::vector<double> x;
  std::vector<double> v;
  double a = 0.0, b = 0.0, T = 0.0;

  double sigma = 0.0;          // action along the path
  double eps = 0.0;            // conserved energy m v^2/2 - V_tilde(x)
  double energy_drift = 0.0;   // relative spread of eps over the path
  double boundary_miss = 0.0;  // worst segment-glue / endpoint defect
  double jacobi_min = 0.0;     // min |dx(t)/dv(0)| scale seen in (0, T)
  int k_segments = 1;
  int newton_iterations = 0;
  int branches = 1;            // distinct stationary paths found by the probe

  int size() const { return static_cast<int>(t.size()); }
};

// Multiple shooting with segments no longer than 2/omega_eff (single shooting
// is the k = 1 special case, so stiff large-T runs fall back automatically).
// The Jacobi field dx(t)/dv(0) is monitored along the converged path; a zero
// crossing inside (0, T) is a conjugate point and raises domain_error.
// Non-convergence of the damped Newton iteration raises numeric_error with
// iteration diagnostics. n_t is rounded up so every segment carries an even
// number of steps (Simpson-ready).
Trajectory solve_trajectory(const QuantumAction& action, double a, double b, double T,
                            int n_t = 2001);

// Simpson quadrature of m v^2/2 + V_tilde(x) over the stored path.
double action_along(const QuantumAction& action, const Trajectory& traj);

// (p_in, p_fi) = m_tilde * (v(0), v(T)).
std::pair<double, double> boundary_momenta(const QuantumAction& action, const Trajectory& traj);

// W = int v V_tilde'(x) dt along the path; equals both V_tilde(b) - V_tilde(a)
// and (p_fi^2 - p_in^2) / 2 m_tilde on the equation of motion.
double work_integral(const QuantumAction& action, const Trajectory& traj);

// Residuals of the boundary-momentum conditions
//   p_fi = +hbar * deta/dy (b, a)       p_in = -hbar * deta/dx (b, a)
// normalized by the largest momentum scale of the pair. The trajectory
// endpoints must sit on eta window nodes.
std::pair<double, double> check_momentum_condition(const QuantumAction& action,
                                                   const Trajectory& traj,
                                                   const EtaField& eta);

}  // namespace qaction
