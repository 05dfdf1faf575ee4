// Timings for the OpenMP kernels against the serial reference, plus a
// bitwise-equality check: both paths must produce identical artifacts.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include "qaction/errors.hpp"
#include "qaction/propagator.hpp"

using namespace qaction;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

}  // namespace

int run_bench(int n_points, int n_states);

int main(int argc, char** argv) {
  int n_points = argc > 1 ? std::atoi(argv[1]) : 40001;
  int n_states = argc > 2 ? std::atoi(argv[2]) : 48;
  if (n_points < 3 || n_states < 1) {
    std::fprintf(stderr, "usage: qaction-bench [n_points] [n_states]\n");
    return 2;
  }
  try {
    return run_bench(n_points, n_states);
  } catch (const error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

int run_bench(int n_points, int n_states) {
  ClassicalSystem sys;
  sys.mass = 1.0;
  sys.hbar = 1.0;
  sys.potential.coeffs = {0.0, 0.0, 0.5};
  Grid grid{-10.0, 10.0, n_points};
  Window window{-2.0, 2.0, 81};

  std::printf("eigensolver + field kernels, n_points=%d n_states=%d threads=%d\n", n_points,
              n_states, hardware_threads());

  auto t0 = clock_type::now();
  auto spec_s = std::make_shared<const SpectralDecomposition>(
      solve_spectrum(sys, grid, n_states, Exec::serial));
  double t_spec_s = seconds_since(t0);

  t0 = clock_type::now();
  auto spec_p = std::make_shared<const SpectralDecomposition>(
      solve_spectrum(sys, grid, n_states, Exec::parallel));
  double t_spec_p = seconds_since(t0);

  t0 = clock_type::now();
  PropagatorTable tab_s = build_propagator_table(spec_s, window, 1.0, Exec::serial);
  EtaField eta_s = build_eta_field(tab_s, 1.0, Exec::serial);
  double t_field_s = seconds_since(t0);

  t0 = clock_type::now();
  PropagatorTable tab_p = build_propagator_table(spec_p, window, 1.0, Exec::parallel);
  EtaField eta_p = build_eta_field(tab_p, 1.0, Exec::parallel);
  double t_field_p = seconds_since(t0);

  bool identical = true;
  for (int k = 0; k < n_states && identical; ++k)
    identical = spec_s->energies[k].hi == spec_p->energies[k].hi &&
                spec_s->energies[k].lo == spec_p->energies[k].lo;
  for (std::size_t i = 0; i < spec_s->psi_hi.size() && identical; i += 997)
    identical = spec_s->psi_hi[i] == spec_p->psi_hi[i];
  for (std::size_t i = 0; i < eta_s.eta.size() && identical; ++i)
    identical = eta_s.eta[i] == eta_p.eta[i] && eta_s.deta_y[i] == eta_p.deta_y[i];

  std::printf("  %-22s %10.3fs serial %10.3fs parallel  speedup %.2fx\n", "spectrum",
              t_spec_s, t_spec_p, t_spec_s / t_spec_p);
  std::printf("  %-22s %10.3fs serial %10.3fs parallel  speedup %.2fx\n", "table+eta",
              t_field_s, t_field_p, t_field_s / t_field_p);
  std::printf("  serial/parallel artifacts bitwise identical: %s\n",
              identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
