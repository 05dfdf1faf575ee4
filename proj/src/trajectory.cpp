#include "qaction/trajectory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace qaction {

namespace {

// State of one shooting integration: phase point plus the 2x2 variational
// block P = d(x, v)/d(start state), advanced by the same RK4 stages.
struct FlowState {
  double x = 0.0, v = 0.0;
  double p11 = 1.0, p12 = 0.0, p21 = 0.0, p22 = 1.0;
};

struct Dynamics {
  const PolynomialPotential* V;
  double inv_m;

  void deriv(const FlowState& u, FlowState& d) const {
    double force = V->deriv(u.x) * inv_m;   // m x'' = +V'(x)
    double curv = V->deriv2(u.x) * inv_m;
    d.x = u.v;
    d.v = force;
    d.p11 = u.p21;
    d.p12 = u.p22;
    d.p21 = curv * u.p11;
    d.p22 = curv * u.p12;
  }

  void rk4(FlowState& s, double h) const {
    FlowState k1, k2, k3, k4, t;
    deriv(s, k1);
    t = s;
    t.x = s.x + 0.5 * h * k1.x;
    t.v = s.v + 0.5 * h * k1.v;
    t.p11 = s.p11 + 0.5 * h * k1.p11;
    t.p12 = s.p12 + 0.5 * h * k1.p12;
    t.p21 = s.p21 + 0.5 * h * k1.p21;
    t.p22 = s.p22 + 0.5 * h * k1.p22;
    deriv(t, k2);
    t.x = s.x + 0.5 * h * k2.x;
    t.v = s.v + 0.5 * h * k2.v;
    t.p11 = s.p11 + 0.5 * h * k2.p11;
    t.p12 = s.p12 + 0.5 * h * k2.p12;
    t.p21 = s.p21 + 0.5 * h * k2.p21;
    t.p22 = s.p22 + 0.5 * h * k2.p22;
    deriv(t, k3);
    t.x = s.x + h * k3.x;
    t.v = s.v + h * k3.v;
    t.p11 = s.p11 + h * k3.p11;
    t.p12 = s.p12 + h * k3.p12;
    t.p21 = s.p21 + h * k3.p21;
    t.p22 = s.p22 + h * k3.p22;
    deriv(t, k4);
    double c = h / 6.0;
    s.x += c * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.v += c * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    s.p11 += c * (k1.p11 + 2.0 * k2.p11 + 2.0 * k3.p11 + k4.p11);
    s.p12 += c * (k1.p12 + 2.0 * k2.p12 + 2.0 * k3.p12 + k4.p12);
    s.p21 += c * (k1.p21 + 2.0 * k2.p21 + 2.0 * k3.p21 + k4.p21);
    s.p22 += c * (k1.p22 + 2.0 * k2.p22 + 2.0 * k3.p22 + k4.p22);
  }
};

struct Discretization {
  int k = 1;        // shooting segments
  int m_per = 2;    // output steps per segment (even)
  int nsub = 1;     // RK4 substeps per output step
  double tau = 0.0; // segment length
  double h = 0.0;   // output step
  double omega = 0.0;

  int n_nodes() const { return k * m_per + 1; }
};

Discretization make_discretization(const QuantumAction& act, double a, double b, double T,
                                   int n_t) {
  double lo = std::min(a, b), hi = std::max(a, b);
  double pad = 0.2 * (hi - lo) + 1e-3;
  double xstar = act.potential_tilde.argmin_on(lo - pad, hi + pad);
  double curv = 0.0;
  for (double x : {a, b, xstar}) curv = std::max(curv, act.potential_tilde.deriv2(x));
  double omega = std::sqrt(std::max(curv / act.m_tilde, 1e-8));

  Discretization d;
  d.omega = omega;
  d.k = std::max(1, static_cast<int>(std::ceil(T * omega / 2.0)));
  int per = (n_t - 1 + d.k - 1) / d.k;
  if (per % 2) ++per;
  d.m_per = std::max(per, 2);
  d.tau = T / d.k;
  d.h = d.tau / d.m_per;
  d.nsub = std::max(1, static_cast<int>(std::ceil(d.h * omega / 0.005)));
  return d;
}

// Flow over one segment from a given start, variational block included.
FlowState flow_segment(const Dynamics& dyn, const Discretization& d, double x0, double v0) {
  FlowState s;
  s.x = x0;
  s.v = v0;
  double hs = d.h / d.nsub;
  for (int step = 0; step < d.m_per * d.nsub; ++step) dyn.rk4(s, hs);
  return s;
}

// Unknowns U = [v0, x1, v1, ..., x_{k-1}, v_{k-1}]; segment s starts at
// (a, U[0]) for s = 0 and (U[2s-1], U[2s]) otherwise.
void segment_start(const Eigen::VectorXd& U, double a, int s, double* x, double* v) {
  if (s == 0) {
    *x = a;
    *v = U(0);
  } else {
    *x = U(2 * s - 1);
    *v = U(2 * s);
  }
}

double residual(const Dynamics& dyn, const Discretization& d, const Eigen::VectorXd& U,
                double a, double b, Eigen::VectorXd* F, Eigen::MatrixXd* M) {
  int k = d.k;
  int n = 2 * k - 1;
  F->setZero(n);
  if (M) M->setZero(n, n);
  for (int s = 0; s < k; ++s) {
    double x0, v0;
    segment_start(U, a, s, &x0, &v0);
    FlowState e = flow_segment(dyn, d, x0, v0);
    int cx = 2 * s - 1, cv = 2 * s;  // cx = -1 marks the pinned left endpoint
    if (s < k - 1) {
      (*F)(2 * s) = e.x - U(2 * s + 1);
      (*F)(2 * s + 1) = e.v - U(2 * s + 2);
      if (M) {
        if (cx >= 0) {
          (*M)(2 * s, cx) = e.p11;
          (*M)(2 * s + 1, cx) = e.p21;
        }
        (*M)(2 * s, cv) = e.p12;
        (*M)(2 * s + 1, cv) = e.p22;
        (*M)(2 * s, 2 * s + 1) = -1.0;
        (*M)(2 * s + 1, 2 * s + 2) = -1.0;
      }
    } else {
      (*F)(n - 1) = e.x - b;
      if (M) {
        if (cx >= 0) (*M)(n - 1, cx) = e.p11;
        (*M)(n - 1, cv) = e.p12;
      }
    }
  }
  return F->lpNorm<Eigen::Infinity>();
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double final_norm = 0.0;
};

NewtonOutcome newton_solve(const Dynamics& dyn, const Discretization& d, Eigen::VectorXd& U,
                           double a, double b, double tol) {
  int n = 2 * d.k - 1;
  Eigen::VectorXd F(n), Ftry(n), dU(n), Utry(n);
  Eigen::MatrixXd M(n, n);
  NewtonOutcome out;
  double norm = residual(dyn, d, U, a, b, &F, &M);
  for (int it = 0; it < 60; ++it) {
    out.iterations = it;
    out.final_norm = norm;
    if (norm < tol) {
      out.converged = true;
      return out;
    }
    if (!F.allFinite() || !M.allFinite()) return out;
    dU = M.partialPivLu().solve(-F);
    if (!dU.allFinite()) return out;
    bool accepted = false;
    double lambda = 1.0;
    for (int trial = 0; trial < 22; ++trial, lambda *= 0.5) {
      Utry = U + lambda * dU;
      double ntry = residual(dyn, d, Utry, a, b, &Ftry, nullptr);
      if (ntry < tol || ntry < (1.0 - 0.25 * lambda) * norm) {
        U = Utry;
        norm = ntry;
        accepted = true;
        break;
      }
    }
    if (!accepted) return out;
    norm = residual(dyn, d, U, a, b, &F, &M);
  }
  out.final_norm = norm;
  out.converged = norm < tol;
  return out;
}

struct Candidate {
  Eigen::VectorXd U;
  Trajectory traj;
};

// Integrates the converged unknowns once more, storing the output path, the
// Jacobi field d x(t)/d v(0) chained across segments, energy statistics and
// the Simpson action.
Trajectory finalize(const QuantumAction& act, const Dynamics& dyn, const Discretization& d,
                    const Eigen::VectorXd& U, double a, double b, double T,
                    double final_norm, int iterations) {
  int n = d.n_nodes();
  Trajectory tr;
  tr.a = a;
  tr.b = b;
  tr.T = T;
  tr.k_segments = d.k;
  tr.newton_iterations = iterations;
  tr.boundary_miss = final_norm;
  tr.t.resize(n);
  tr.x.resize(n);
  tr.v.resize(n);
  std::vector<double> jac(n, 0.0);

  double hs = d.h / d.nsub;
  double djx = 0.0, djv = 1.0;  // Jacobi field: dx/dv0, dv/dv0 at t = 0
  int node = 0;
  for (int s = 0; s < d.k; ++s) {
    FlowState st;
    segment_start(U, a, s, &st.x, &st.v);
    double jx0 = djx, jv0 = djv;
    if (s == 0) {
      tr.t[0] = 0.0;
      tr.x[0] = st.x;
      tr.v[0] = st.v;
      jac[0] = 0.0;
    }
    for (int step = 0; step < d.m_per; ++step) {
      for (int sub = 0; sub < d.nsub; ++sub) dyn.rk4(st, hs);
      ++node;
      tr.t[node] = (s * static_cast<double>(d.m_per) + step + 1) * d.h;
      tr.x[node] = st.x;
      tr.v[node] = st.v;
      jac[node] = st.p11 * jx0 + st.p12 * jv0;
    }
    djx = st.p11 * jx0 + st.p12 * jv0;
    djv = st.p21 * jx0 + st.p22 * jv0;
  }
  tr.t[n - 1] = T;  // kill the accumulated rounding on the last node

  double jmax = 0.0;
  for (double j : jac) jmax = std::max(jmax, std::fabs(j));
  double jmin = jmax;
  for (int i = 1; i < n - 1; ++i) {
    jmin = std::min(jmin, std::fabs(jac[i]));
    if (jac[i] * jac[i + 1] < 0.0) {
      std::ostringstream os;
      os << "trajectory: conjugate point near t=" << tr.t[i] << " on (a=" << a << ", b=" << b
         << ", T=" << T << "); the boundary value problem is not locally unique there";
      throw domain_error(os.str());
    }
  }
  tr.jacobi_min = jmax > 0.0 ? jmin / jmax : 0.0;

  double emin = 0.0, emax = 0.0, emean = 0.0;
  for (int i = 0; i < n; ++i) {
    double eps = 0.5 * act.m_tilde * tr.v[i] * tr.v[i] - act.potential_tilde(tr.x[i]);
    if (i == 0) {
      emin = emax = eps;
    } else {
      emin = std::min(emin, eps);
      emax = std::max(emax, eps);
    }
    emean += eps;
  }
  emean /= n;
  tr.eps = emean;
  tr.energy_drift = (emax - emin) / std::max(1.0, std::fabs(emean));
  tr.sigma = action_along(act, tr);
  return tr;
}

double simpson(const std::vector<double>& f, double h) {
  int n = static_cast<int>(f.size());
  double s = f[0] + f[n - 1];
  for (int i = 1; i < n - 1; i += 2) s += 4.0 * f[i];
  for (int i = 2; i < n - 1; i += 2) s += 2.0 * f[i];
  return s * h / 3.0;
}

}  // namespace

Trajectory solve_trajectory(const QuantumAction& action, double a, double b, double T,
                            int n_t) {
  if (!(T > 0.0)) throw domain_error("trajectory: time must be positive");
  if (n_t < 5) throw config_error("trajectory: n_t must be at least 5");
  if (!(action.m_tilde > 0.0)) throw config_error("trajectory: mass must be positive");

  Dynamics dyn{&action.potential_tilde, 1.0 / action.m_tilde};
  Discretization d = make_discretization(action, a, b, T, n_t);
  double tol = 1e-12 * (std::fabs(a) + std::fabs(b) + 1.0);

  // Three initial guesses probe for distinct stationary paths: the
  // harmonic-shaped path decaying toward the origin, the straight line, and
  // the same shape centered on the local potential minimum nearest the pair
  // (off-center wells need the dip aimed at their own bottom). All are seeded
  // segment-wise, so stiff large-T problems start close.
  auto sinh_path = [&](double t, double center, double* x, double* v) {
    double w = std::max(d.omega, 1e-6);
    double ra = a - center, rb = b - center;
    double den = -std::expm1(-2.0 * w * T);
    double r1 = std::exp(-w * t) * -std::expm1(-2.0 * w * (T - t)) / den;
    double r2 = std::exp(-w * (T - t)) * -std::expm1(-2.0 * w * t) / den;
    double c1 = std::exp(-w * t) * (1.0 + std::exp(-2.0 * w * (T - t))) / den;
    double c2 = std::exp(-w * (T - t)) * (1.0 + std::exp(-2.0 * w * t)) / den;
    *x = center + ra * r1 + rb * r2;
    *v = w * (rb * c2 - ra * c1);
  };
  auto line_path = [&](double t, double* x, double* v) {
    *x = a + (b - a) * (t / T);
    *v = (b - a) / T;
  };
  double mid = 0.5 * (a + b);
  double reach = 0.75 * std::max(1.0, std::fabs(b - a));
  double xg = action.potential_tilde.argmin_on(mid - reach, mid + reach);

  int nunk = 2 * d.k - 1;
  std::vector<Candidate> found;
  NewtonOutcome last{};
  for (int guess = 0; guess < 3; ++guess) {
    Eigen::VectorXd U(nunk);
    for (int s = 0; s < d.k; ++s) {
      double x, v;
      double t = s * d.tau;
      if (guess == 0)
        sinh_path(t, 0.0, &x, &v);
      else if (guess == 1)
        line_path(t, &x, &v);
      else
        sinh_path(t, xg, &x, &v);
      if (s == 0) {
        U(0) = v;
      } else {
        U(2 * s - 1) = x;
        U(2 * s) = v;
      }
    }
    NewtonOutcome res = newton_solve(dyn, d, U, a, b, tol);
    last = res;
    if (!res.converged) continue;
    Trajectory tr = finalize(action, dyn, d, U, a, b, T, res.final_norm, res.iterations);
    bool duplicate = false;
    for (const Candidate& c : found) {
      double dev = 0.0, scale = 1.0;
      for (int i = 0; i < tr.size(); ++i) {
        dev = std::max(dev, std::fabs(tr.x[i] - c.traj.x[i]));
        scale = std::max(scale, std::fabs(tr.x[i]));
      }
      if (dev <= 1e-6 * scale) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) found.push_back({std::move(U), std::move(tr)});
  }
  if (found.empty()) {
    std::ostringstream os;
    os << "trajectory: Newton did not converge on (a=" << a << ", b=" << b << ", T=" << T
       << "); " << last.iterations << " iterations, residual " << last.final_norm
       << " against tolerance " << tol;
    throw numeric_error(os.str());
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < found.size(); ++c)
    if (found[c].traj.sigma < found[best].traj.sigma) best = c;
  Trajectory out = std::move(found[best].traj);
  out.branches = static_cast<int>(found.size());
  return out;
}

double action_along(const QuantumAction& action, const Trajectory& traj) {
  int n = traj.size();
  if (n < 3 || n % 2 == 0)
    throw config_error("trajectory: action quadrature needs an odd node count");
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i)
    f[i] = 0.5 * action.m_tilde * traj.v[i] * traj.v[i] + action.potential_tilde(traj.x[i]);
  return simpson(f, traj.T / (n - 1));
}

std::pair<double, double> boundary_momenta(const QuantumAction& action, const Trajectory& traj) {
  return {action.m_tilde * traj.v.front(), action.m_tilde * traj.v.back()};
}

double work_integral(const QuantumAction& action, const Trajectory& traj) {
  int n = traj.size();
  if (n < 3 || n % 2 == 0)
    throw config_error("trajectory: work quadrature needs an odd node count");
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = traj.v[i] * action.potential_tilde.deriv(traj.x[i]);
  return simpson(f, traj.T / (n - 1));
}

std::pair<double, double> check_momentum_condition(const QuantumAction& action,
                                                   const Trajectory& traj,
                                                   const EtaField& eta) {
  auto locate = [&](double x) {
    int best = 0;
    double dist = std::fabs(eta.positions[0] - x);
    for (int i = 1; i < eta.size(); ++i) {
      double di = std::fabs(eta.positions[i] - x);
      if (di < dist) {
        dist = di;
        best = i;
      }
    }
    if (dist > 1e-9 * (1.0 + std::fabs(x)))
      throw config_error("trajectory: endpoint does not sit on a window node");
    return best;
  };
  int ia = locate(traj.a);
  int jb = locate(traj.b);
  auto [p_in, p_fi] = boundary_momenta(action, traj);
  double p_fi_ref = eta.hbar * eta.dy_at(jb, ia);
  double p_in_ref = -eta.hbar * eta.dx_at(jb, ia);
  // Floor the normalization at the window's quantum momentum scale: a pair
  // resting at the potential minimum has all four momenta identically zero.
  double p_floor = eta.hbar / (eta.positions.back() - eta.positions.front());
  double scale = std::max({std::fabs(p_in), std::fabs(p_fi), std::fabs(p_in_ref),
                           std::fabs(p_fi_ref), p_floor});
  return {std::fabs(p_in - p_in_ref) / scale, std::fabs(p_fi - p_fi_ref) / scale};
}

}  // namespace qaction
