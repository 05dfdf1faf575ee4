#include "qaction/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#ifdef QACTION_OPENMP
#include <omp.h>
#endif

namespace qaction {

namespace {

// Weight of state k relative to the ground state. States below kTailCut are
// dropped; an alternating tail of discarded terms this small cannot shift
// log G at the precision the derivative stencils need.
constexpr double kTailCut = 1e-17;

int truncation_depth(const SpectralDecomposition& spec, double T, double* tail) {
  double e0 = spec.energies[0].hi;
  int used = spec.n_states;
  *tail = 0.0;
  for (int k = 1; k < spec.n_states; ++k) {
    double w = std::exp(-(spec.energies[k].hi - e0) * T / spec.system.hbar);
    if (w < kTailCut) {
      used = k;
      *tail = w;
      break;
    }
    *tail = w;
  }
  return used;
}

// psi_k interpolated at an off-node position: cubic 4-point Lagrange on the
// enclosing nodes. Snaps to the node when x lands on one.
dd psi_interp(const SpectralDecomposition& spec, int k, double x) {
  const Grid& g = spec.grid;
  double dx = g.dx();
  if (x < g.x_min + dx || x > g.x_max - dx)
    throw domain_error("propagator: evaluation point outside the grid interior");
  double s = (x - g.x_min) / dx;
  int i0 = static_cast<int>(std::floor(s));
  double t = s - i0;
  if (std::fabs(t) < 1e-9) return spec.psi(k, i0);
  if (std::fabs(t - 1.0) < 1e-9) return spec.psi(k, i0 + 1);
  i0 = std::clamp(i0, 1, g.n_points - 3);
  t = (x - g.node(i0)) / dx;
  double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return spec.psi(k, i0 - 1) * w0 + spec.psi(k, i0) * w1 + spec.psi(k, i0 + 1) * w2 +
         spec.psi(k, i0 + 2) * w3;
}

}  // namespace

double euclidean_propagator(const SpectralDecomposition& spec, double x, double y, double T) {
  if (!(T > 0.0)) throw domain_error("propagator: time must be positive");
  double tail = 0.0;
  int used = truncation_depth(spec, T, &tail);
  double e0 = spec.energies[0].hi;
  dd acc(0.0);
  for (int k = 0; k < used; ++k) {
    dd w = dd_exp((spec.energies[0] - spec.energies[k]) * (T / spec.system.hbar));
    acc = acc + psi_interp(spec, k, y) * psi_interp(spec, k, x) * w;
  }
  return acc.value() * std::exp(-e0 * T / spec.system.hbar);
}

PropagatorTable build_propagator_table(std::shared_ptr<const SpectralDecomposition> spec,
                                       const Window& window, double T, Exec exec,
                                       double wall_margin_fraction) {
  if (!spec) throw config_error("propagator: missing spectral decomposition");
  if (!(T > 0.0)) throw domain_error("propagator: time must be positive");

  PropagatorTable tab;
  tab.spec = spec;
  tab.nodes = window_node_indices(spec->grid, window, wall_margin_fraction);
  tab.T = T;
  tab.hbar = spec->system.hbar;
  int w = static_cast<int>(tab.nodes.size());
  tab.positions.resize(w);
  for (int j = 0; j < w; ++j) tab.positions[j] = spec->grid.node(tab.nodes[j]);

  double tail = 0.0;
  tab.n_states_used = truncation_depth(*spec, T, &tail);
  tab.truncation_tail = tail;
  tab.truncation_warning = tab.n_states_used == spec->n_states && tail >= kTailCut;

  tab.log_prefactor = -spec->energies[0].hi * T / tab.hbar;
  tab.raw_hi.assign(static_cast<std::size_t>(w) * w, 0.0);
  tab.raw_lo.assign(static_cast<std::size_t>(w) * w, 0.0);
  tab.values.assign(static_cast<std::size_t>(w) * w, 0.0);

  // Gather psi_k at the window nodes once; the table is then a truncated
  // rank-M outer-product sum, symmetric in (i, j).
  int M = tab.n_states_used;
  std::vector<dd> pw(static_cast<std::size_t>(M) * w, dd(0.0));
  std::vector<dd> wk(M, dd(0.0));
  for (int k = 0; k < M; ++k) {
    wk[k] = dd_exp((spec->energies[0] - spec->energies[k]) * (T / tab.hbar));
    for (int j = 0; j < w; ++j) pw[static_cast<std::size_t>(k) * w + j] = spec->psi(k, tab.nodes[j]);
  }

  const bool par = exec == Exec::parallel;
  (void)par;
  double pref = std::exp(tab.log_prefactor);
#ifdef QACTION_OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
  for (int i = 0; i < w; ++i) {
    for (int j = 0; j <= i; ++j) {
      dd acc(0.0);
      for (int k = 0; k < M; ++k)
        acc = acc + pw[static_cast<std::size_t>(k) * w + i] *
                        pw[static_cast<std::size_t>(k) * w + j] * wk[k];
      std::size_t ij = static_cast<std::size_t>(i) * w + j;
      std::size_t ji = static_cast<std::size_t>(j) * w + i;
      tab.raw_hi[ij] = tab.raw_hi[ji] = acc.hi;
      tab.raw_lo[ij] = tab.raw_lo[ji] = acc.lo;
      tab.values[ij] = tab.values[ji] = acc.value() * pref;
    }
  }
  return tab;
}

EtaField build_eta_field(const PropagatorTable& tab, double G0, Exec exec) {
  if (!(G0 > 0.0)) throw config_error("propagator: reference normalization must be positive");
  const SpectralDecomposition& spec = *tab.spec;
  int w = tab.size();
  EtaField eta;
  eta.positions = tab.positions;
  eta.T = tab.T;
  eta.hbar = tab.hbar;
  eta.G0 = G0;
  eta.eta.assign(static_cast<std::size_t>(w) * w, 0.0);
  eta.deta_y.assign(static_cast<std::size_t>(w) * w, 0.0);
  eta.deta_x.assign(static_cast<std::size_t>(w) * w, 0.0);

  // Spectral derivative: differentiate the sum, never the log. psi' at each
  // window node comes from the 4th-order interior stencil on the fine grid.
  int M = tab.n_states_used;
  double dx = spec.grid.dx();
  std::vector<dd> pw(static_cast<std::size_t>(M) * w, dd(0.0));
  std::vector<dd> sw(static_cast<std::size_t>(M) * w, dd(0.0));
  std::vector<dd> wk(M, dd(0.0));
  for (int k = 0; k < M; ++k) {
    wk[k] = dd_exp((spec.energies[0] - spec.energies[k]) * (tab.T / tab.hbar));
    for (int j = 0; j < w; ++j) {
      int g = tab.nodes[j];
      pw[static_cast<std::size_t>(k) * w + j] = spec.psi(k, g);
      dd num = spec.psi(k, g - 2) - spec.psi(k, g - 1) * 8.0 + spec.psi(k, g + 1) * 8.0 -
               spec.psi(k, g + 2);
      sw[static_cast<std::size_t>(k) * w + j] = num * (1.0 / (12.0 * dx));
    }
  }

  for (int i = 0; i < w; ++i) {
    for (int j = 0; j < w; ++j) {
      if (tab.raw_hi[static_cast<std::size_t>(i) * w + j] > 0.0) continue;
      std::ostringstream os;
      os << "propagator: non-positive value at (y=" << tab.positions[i]
         << ", x=" << tab.positions[j] << ", T=" << tab.T
         << "); the window is boundary-dominated at this time";
      throw domain_error(os.str());
    }
  }

  const double log_g0 = std::log(G0);
  const bool par = exec == Exec::parallel;
  (void)par;
#ifdef QACTION_OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
  for (int i = 0; i < w; ++i) {
    for (int j = 0; j < w; ++j) {
      std::size_t ij = static_cast<std::size_t>(i) * w + j;
      dd raw(tab.raw_hi[ij], tab.raw_lo[ij]);
      dd acc(0.0);
      for (int k = 0; k < M; ++k)
        acc = acc + sw[static_cast<std::size_t>(k) * w + i] *
                        pw[static_cast<std::size_t>(k) * w + j] * wk[k];
      eta.eta[ij] = -(dd_log(raw) + dd(tab.log_prefactor - log_g0)).value();
      eta.deta_y[ij] = -(acc / raw).value();
    }
  }
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j)
      eta.deta_x[static_cast<std::size_t>(i) * w + j] =
          eta.deta_y[static_cast<std::size_t>(j) * w + i];
  return eta;
}

}  // namespace qaction
