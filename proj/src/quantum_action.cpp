#include "qaction/quantum_action.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace qaction {

namespace {

std::string describe_direction(const Eigen::VectorXd& v, const std::vector<int>& degrees) {
  std::ostringstream os;
  os.precision(3);
  bool first = true;
  for (int c = 0; c < v.size(); ++c) {
    if (std::fabs(v(c)) < 1e-3) continue;
    if (!first) os << (v(c) >= 0 ? " + " : " - ");
    else if (v(c) < 0)
      os << "-";
    os << std::fabs(v(c)) << "*x^" << degrees[c];
    first = false;
  }
  return first ? std::string("0") : os.str();
}

struct LsqSolution {
  std::vector<double> coeffs;
  double cond = 0.0;
  double residual_rms = 0.0;  // normalized by max |rhs|
  double residual_max = 0.0;
};

LsqSolution solve_lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs,
                      const std::vector<int>& degrees, const char* what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int p = static_cast<int>(A.cols());
  if (!(sv(0) > 0.0) || sv(p - 1) < 1e-13 * sv(0)) {
    std::ostringstream os;
    os << what << ": basis is rank-deficient on this window; null direction "
       << describe_direction(svd.matrixV().col(p - 1), degrees);
    throw numeric_error(os.str());
  }
  double scale = rhs.cwiseAbs().maxCoeff();
  if (!(scale > 0.0))
    throw numeric_error(std::string(what) +
                        ": every right-hand side vanishes; nothing constrains the fit");
  LsqSolution out;
  Eigen::VectorXd c = svd.solve(rhs);
  Eigen::VectorXd r = A * c - rhs;
  out.coeffs.assign(c.data(), c.data() + p);
  out.cond = sv(0) / sv(p - 1);
  out.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(r.size())) / scale;
  out.residual_max = r.cwiseAbs().maxCoeff() / scale;
  return out;
}

}  // namespace

QuantumAction reconstruct_fk(const SpectralDecomposition& spec, double m_tilde_gauge,
                             std::optional<Window> window,
                             const std::vector<int>& basis_degrees) {
  if (!(m_tilde_gauge > 0.0)) throw config_error("fit: mass gauge must be positive");
  if (basis_degrees.empty()) throw config_error("fit: empty basis");
  const Grid& g = spec.grid;
  const double dx = g.dx();
  const double hbar = spec.system.hbar;

  double psimax = 0.0;
  const double* g0 = spec.state_hi(0);
  for (int i = 0; i < g.n_points; ++i) psimax = std::max(psimax, std::fabs(g0[i]));
  const double floor = 1e-12 * psimax;

  std::vector<int> nodes;
  double wlo, whi;
  if (window) {
    // Every grid node inside the window, not just the sampled lattice: the
    // pointwise identity holds at all of them and the projection should see
    // the full resolution. The 2-node call validates the interval itself.
    std::vector<int> ends = window_node_indices(g, {window->lo, window->hi, 2});
    for (int i = ends.front(); i <= ends.back(); ++i) nodes.push_back(i);
    wlo = window->lo;
    whi = window->hi;
    for (int idx : nodes)
      if (std::fabs(g0[idx]) < floor) {
        std::ostringstream os;
        os << "fit: ground state support does not cover the window (|psi_0("
           << g.node(idx) << ")| below 1e-12 of its peak)";
        throw domain_error(os.str());
      }
  } else {
    for (int i = 2; i <= g.n_points - 3; ++i)
      if (std::fabs(g0[i]) >= floor) nodes.push_back(i);
    if (nodes.size() < basis_degrees.size() + 1)
      throw domain_error("fit: ground state support is too narrow for the basis");
    wlo = g.node(nodes.front());
    whi = g.node(nodes.back());
  }

  const int n = static_cast<int>(nodes.size());
  const int p = static_cast<int>(basis_degrees.size());
  Eigen::MatrixXd A(n, p);
  Eigen::VectorXd rhs(n);
  const double k2 = 2.0 * m_tilde_gauge / (hbar * hbar);
  for (int r = 0; r < n; ++r) {
    int idx = nodes[r];
    // psi_0'/psi_0 from the 4th-order stencil, carried in dd until the square.
    dd num = spec.psi(0, idx - 2) - spec.psi(0, idx - 1) * 8.0 + spec.psi(0, idx + 1) * 8.0 -
             spec.psi(0, idx + 2);
    dd ratio = num * (1.0 / (12.0 * dx)) / spec.psi(0, idx);
    double rr = (ratio * ratio).value();
    rhs(r) = rr;
    double x = g.node(idx);
    for (int c = 0; c < p; ++c) A(r, c) = k2 * std::pow(x, basis_degrees[c]);
  }

  LsqSolution sol = solve_lsq(A, rhs, basis_degrees, "fit");

  QuantumAction act;
  act.m_tilde = m_tilde_gauge;
  int dmax = *std::max_element(basis_degrees.begin(), basis_degrees.end());
  act.potential_tilde.coeffs.assign(dmax + 1, 0.0);
  for (int c = 0; c < p; ++c) act.potential_tilde.coeffs[basis_degrees[c]] = sol.coeffs[c];
  act.V0 = act.potential_tilde.min_on(wlo, whi);
  act.Z_tilde = 1.0;
  act.T = std::numeric_limits<double>::infinity();
  act.hbar = hbar;
  act.gauge_tag = "m_tilde fixed by convention; V0 anchored to the window minimum";
  return act;
}

std::pair<QuantumAction, FitReport> fit_finite_T(const EtaField& eta, double m_tilde_gauge,
                                                 const std::vector<int>& basis_degrees,
                                                 Exec exec, std::uint64_t seed, int max_pairs) {
  (void)exec;
  if (!(m_tilde_gauge > 0.0)) throw config_error("fit: mass gauge must be positive");
  if (basis_degrees.empty()) throw config_error("fit: empty basis");
  if (max_pairs < static_cast<int>(basis_degrees.size()))
    throw config_error("fit: max_pairs smaller than the basis");
  const int w = eta.size();
  if (w < 2) throw config_error("fit: window has fewer than two nodes");

  // Unordered pairs i < j; the diagonal is identically 0 = 0. Above 101 nodes
  // the index set is decimated by a stride so the pair count stays bounded;
  // the seed only moves the stride offset, keeping runs reproducible.
  std::vector<int> idx;
  if (w <= 101) {
    idx.resize(w);
    for (int i = 0; i < w; ++i) idx[i] = i;
  } else {
    int cap = static_cast<int>((1.0 + std::sqrt(1.0 + 8.0 * max_pairs)) / 2.0);
    cap = std::max(cap, static_cast<int>(basis_degrees.size()) + 1);
    int stride = (w + cap - 1) / cap;
    int offset = static_cast<int>(seed % static_cast<std::uint64_t>(stride));
    for (int i = offset; i < w; i += stride) idx.push_back(i);
  }
  const int L = static_cast<int>(idx.size());
  const int n = L * (L - 1) / 2;
  const int p = static_cast<int>(basis_degrees.size());
  if (n < p) throw config_error("fit: not enough window pairs for the basis");

  Eigen::MatrixXd A(n, p);
  Eigen::VectorXd rhs(n);
  const double k2 = 2.0 * m_tilde_gauge / (eta.hbar * eta.hbar);
  int r = 0;
  for (int ii = 0; ii < L; ++ii) {
    for (int jj = ii + 1; jj < L; ++jj, ++r) {
      int i = idx[ii], j = idx[jj];
      double a = eta.positions[i], b = eta.positions[j];
      double gy = eta.dy_at(j, i);  // d eta/dy at (y=b, x=a)
      double gx = eta.dx_at(j, i);  // d eta/dx at (y=b, x=a)
      rhs(r) = gy * gy - gx * gx;
      for (int c = 0; c < p; ++c)
        A(r, c) = k2 * (std::pow(b, basis_degrees[c]) - std::pow(a, basis_degrees[c]));
    }
  }

  LsqSolution sol = solve_lsq(A, rhs, basis_degrees, "fit");

  QuantumAction act;
  act.m_tilde = m_tilde_gauge;
  int dmax = *std::max_element(basis_degrees.begin(), basis_degrees.end());
  act.potential_tilde.coeffs.assign(dmax + 1, 0.0);
  for (int c = 0; c < p; ++c) act.potential_tilde.coeffs[basis_degrees[c]] = sol.coeffs[c];
  act.V0 = act.potential_tilde.min_on(eta.positions.front(), eta.positions.back());
  act.Z_tilde = 1.0;
  act.T = eta.T;
  act.hbar = eta.hbar;
  act.gauge_tag = "m_tilde fixed by convention; V0 anchored to the window minimum";

  FitReport rep;
  rep.residual_rms = sol.residual_rms;
  rep.residual_max = sol.residual_max;
  rep.window_lo = eta.positions.front();
  rep.window_hi = eta.positions.back();
  rep.basis_degrees = basis_degrees;
  rep.condition_number = sol.cond;
  return {act, rep};
}

ZEstimate estimate_Z(const QuantumAction& action, const EtaField& eta,
                     const std::vector<SigmaSample>& trajectories) {
  if (trajectories.empty()) throw config_error("normalization: no trajectory samples");
  const double log_g0 = std::log(eta.G0);
  std::vector<double> logz(trajectories.size());
  for (std::size_t s = 0; s < trajectories.size(); ++s) {
    const SigmaSample& ts = trajectories[s];
    logz[s] = -eta.eta_at(ts.j, ts.i) + log_g0 + ts.sigma / action.hbar;
  }
  ZEstimate z;
  z.n_samples = static_cast<int>(logz.size());
  double mean = 0.0;
  for (double v : logz) mean += v;
  mean /= static_cast<double>(logz.size());
  double dev = 0.0;
  for (double v : logz) dev = std::max(dev, std::fabs(v - mean));
  z.log_Z = mean;
  z.Z = std::exp(mean);
  z.max_dev = dev;
  return z;
}

}  // namespace qaction
