#include "qaction/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <sstream>
#include <vector>

#ifdef QACTION_OPENMP
#include <omp.h>
#endif

namespace qaction {

int hardware_threads() {
#ifdef QACTION_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Tridiagonal build_hamiltonian(const ClassicalSystem& sys, const Grid& grid) {
  grid.validate();
  if (!(sys.mass > 0.0)) throw config_error("system: mass must be positive");
  if (!(sys.hbar > 0.0)) throw config_error("system: hbar must be positive");
  if (!sys.potential.confining() && !sys.box_regularized)
    throw config_error(
        "system: potential is not confining; set box_regularized to treat it as a "
        "hard-wall box problem");

  int m = grid.n_points - 2;
  double dx = grid.dx();
  double t = sys.hbar * sys.hbar / (2.0 * sys.mass * dx * dx);
  Tridiagonal H;
  H.diag.resize(m);
  H.off.assign(m - 1, -t);
  for (int i = 0; i < m; ++i) H.diag[i] = 2.0 * t + sys.potential(grid.node(i + 1));
  return H;
}

namespace {

// ---- tridiagonal LU with partial pivoting (needed: the refinement solves
// against shifts sitting a few ulp away from an eigenvalue) ----------------

struct TriLU {
  int n = 0;
  std::vector<double> dl, d, du, du2;
  std::vector<unsigned char> swapped;
};

TriLU tri_factor(std::vector<double> diag, const std::vector<double>& off) {
  TriLU f;
  f.n = static_cast<int>(diag.size());
  f.d = std::move(diag);
  f.dl = off;
  f.du = off;
  f.du2.assign(std::max(0, f.n - 2), 0.0);
  f.swapped.assign(std::max(0, f.n - 1), 0);
  for (int i = 0; i < f.n - 1; ++i) {
    if (std::fabs(f.d[i]) >= std::fabs(f.dl[i])) {
      if (f.d[i] == 0.0) f.d[i] = 1e-300;
      double fact = f.dl[i] / f.d[i];
      f.dl[i] = fact;
      f.d[i + 1] -= fact * f.du[i];
      if (i < f.n - 2) f.du2[i] = 0.0;
    } else {
      double fact = f.d[i] / f.dl[i];
      f.d[i] = f.dl[i];
      f.dl[i] = fact;
      double tmp = f.du[i];
      f.du[i] = f.d[i + 1];
      f.d[i + 1] = tmp - fact * f.d[i + 1];
      if (i < f.n - 2) {
        f.du2[i] = f.du[i + 1];
        f.du[i + 1] = -fact * f.du[i + 1];
      }
      f.swapped[i] = 1;
    }
  }
  if (f.d[f.n - 1] == 0.0) f.d[f.n - 1] = 1e-300;
  return f;
}

void tri_solve(const TriLU& f, double* b) {
  int n = f.n;
  for (int i = 0; i < n - 1; ++i) {
    if (!f.swapped[i]) {
      b[i + 1] -= f.dl[i] * b[i];
    } else {
      double tmp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tmp - f.dl[i] * b[i];
    }
  }
  b[n - 1] /= f.d[n - 1];
  if (n >= 2) b[n - 2] = (b[n - 2] - f.du[n - 2] * b[n - 1]) / f.d[n - 2];
  for (int i = n - 3; i >= 0; --i)
    b[i] = (b[i] - f.du[i] * b[i + 1] - f.du2[i] * b[i + 2]) / f.d[i];
}

// ---- Sturm counts, batched over shifts so the division recurrence
// pipelines across independent chains ---------------------------------------

void sturm_counts(const std::vector<double>& d, const std::vector<double>& e2,
                  const double* shifts, int* counts, int nshift) {
  int m = static_cast<int>(d.size());
  std::vector<double> q(nshift);
  std::vector<int> cnt(nshift);
  for (int s = 0; s < nshift; ++s) {
    double v = d[0] - shifts[s];
    q[s] = v;
    cnt[s] = v < 0.0;
  }
  for (int i = 1; i < m; ++i) {
    double di = d[i];
    double ee = e2[i - 1];
    for (int s = 0; s < nshift; ++s) {
      double qq = q[s];
      double denom = std::copysign(std::max(std::fabs(qq), 1e-290), qq);
      double v = di - shifts[s] - ee / denom;
      q[s] = v;
      cnt[s] += v < 0.0;
    }
  }
  std::copy(cnt.begin(), cnt.end(), counts);
}

// Brackets the k lowest eigenvalues; every evaluated shift tightens every
// state's bracket, since count(shift) splits the whole spectrum.
std::vector<double> bisect_lowest(const std::vector<double>& d, const std::vector<double>& e,
                                  const std::vector<double>& e2, int k) {
  int m = static_cast<int>(d.size());
  double glo = d[0], ghi = d[0];
  for (int i = 0; i < m; ++i) {
    double r = (i > 0 ? std::fabs(e[i - 1]) : 0.0) + (i < m - 1 ? std::fabs(e[i]) : 0.0);
    glo = std::min(glo, d[i] - r);
    ghi = std::max(ghi, d[i] + r);
  }
  std::vector<double> lo(k, glo), hi(k, ghi);
  std::vector<double> shifts;
  std::vector<int> counts;
  for (int round = 0; round < 128; ++round) {
    shifts.clear();
    for (int s = 0; s < k; ++s) {
      double mid = 0.5 * (lo[s] + hi[s]);
      if (hi[s] - lo[s] > 1e-7 * std::max(1.0, std::fabs(mid))) shifts.push_back(mid);
    }
    if (shifts.empty()) break;
    counts.resize(shifts.size());
    sturm_counts(d, e2, shifts.data(), counts.data(), static_cast<int>(shifts.size()));
    for (std::size_t t = 0; t < shifts.size(); ++t) {
      double sft = shifts[t];
      int c = counts[t];
      for (int s = 0; s < k; ++s) {
        if (c > s) {
          if (sft < hi[s]) hi[s] = sft;
        } else {
          if (sft > lo[s]) lo[s] = sft;
        }
      }
    }
  }
  std::vector<double> out(k);
  for (int s = 0; s < k; ++s) out[s] = 0.5 * (lo[s] + hi[s]);
  return out;
}

inline std::uint64_t xorshift64(std::uint64_t& s) {
  s ^= s << 13;
  s ^= s >> 7;
  s ^= s << 17;
  return s;
}

struct RefineOutcome {
  dd lam;
  double final_dlam = 0.0;
  int steps = 0;
  bool ok = false;
};

// Newton refinement of one eigenpair against the double-double residual.
// The linearized system (H - lam) dv - dlam v = -r with v'dv = 0 is solved
// through a fixed detuned factorization A = H - mu I:
//   z1 = A^-1 r, z2 = A^-1 v, dlam = (v.z1)/(v.z2), dv = dlam z2 - z1.
RefineOutcome refine_state(const std::vector<double>& d, const std::vector<double>& e,
                           double lam0, int state, double* vh, double* vl) {
  int m = static_cast<int>(d.size());
  std::vector<double> b(m);
  std::uint64_t rng = 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(state + 1) + 1;
  for (int i = 0; i < m; ++i)
    b[i] = static_cast<double>(xorshift64(rng) >> 11) * 0x1.0p-53 - 0.5;

  double mu = lam0 + 3e-14 * std::max(1.0, std::fabs(lam0));
  std::vector<double> dsh(m);
  for (int i = 0; i < m; ++i) dsh[i] = d[i] - mu;
  TriLU f = tri_factor(std::move(dsh), e);

  auto normalize = [&](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = 1.0 / std::sqrt(s);
    for (double& x : v) x *= s;
  };
  normalize(b);
  for (int it = 0; it < 3; ++it) {
    tri_solve(f, b.data());
    normalize(b);
  }
  std::copy(b.begin(), b.end(), vh);
  std::fill(vl, vl + m, 0.0);

  RefineOutcome out;
  out.lam = dd(lam0);
  std::vector<double> r(m), z1(m), z2(m);
  constexpr int kMaxSteps = 10;
  for (int step = 0; step < kMaxSteps; ++step) {
    dd lam = out.lam;
    for (int i = 0; i < m; ++i) {
      dd acc = dd(vh[i], vl[i]) * (dd(d[i]) - lam);
      if (i > 0) acc = acc + dd(vh[i - 1], vl[i - 1]) * e[i - 1];
      if (i < m - 1) acc = acc + dd(vh[i + 1], vl[i + 1]) * e[i];
      r[i] = acc.value();
    }
    std::copy(r.begin(), r.end(), z1.begin());
    tri_solve(f, z1.data());
    std::copy(vh, vh + m, z2.begin());
    tri_solve(f, z2.data());
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m; ++i) {
      num += vh[i] * z1[i];
      den += vh[i] * z2[i];
    }
    if (den == 0.0) break;
    double dl = num / den;
    for (int i = 0; i < m; ++i) {
      dd nv = dd(vh[i], vl[i]) + (dl * z2[i] - z1[i]);
      vh[i] = nv.hi;
      vl[i] = nv.lo;
    }
    out.lam = out.lam + dl;
    out.final_dlam = std::fabs(dl);
    out.steps = step + 1;
    if (out.final_dlam <= 1e-22 * std::max(1.0, std::fabs(out.lam.hi))) {
      out.ok = true;
      break;
    }
  }
  if (!out.ok) out.ok = out.final_dlam <= 1e-12 * std::max(1.0, std::fabs(out.lam.hi));
  return out;
}

}  // namespace

SpectralDecomposition solve_spectrum(const ClassicalSystem& sys, const Grid& grid,
                                     int n_states, Exec exec) {
  Tridiagonal H = build_hamiltonian(sys, grid);
  int m = H.size();
  if (n_states < 1) throw config_error("n_states: must be at least 1");
  if (n_states > m)
    throw config_error("n_states: exceeds interior dimension n_points - 2");

  std::vector<double> e2(std::max(0, m - 1));
  for (int i = 0; i < m - 1; ++i) e2[i] = H.off[i] * H.off[i];
  std::vector<double> seeds = bisect_lowest(H.diag, H.off, e2, n_states);

  SpectralDecomposition spec;
  spec.grid = grid;
  spec.system = sys;
  spec.n_states = n_states;
  spec.energies.assign(n_states, dd(0.0));
  std::size_t np = static_cast<std::size_t>(grid.n_points);
  spec.psi_hi.assign(static_cast<std::size_t>(n_states) * np, 0.0);
  spec.psi_lo.assign(static_cast<std::size_t>(n_states) * np, 0.0);

  const double dx = grid.dx();
  const bool par = exec == Exec::parallel;
  (void)par;
  std::exception_ptr first_error;
  std::vector<double> defects(n_states, 0.0);

#ifdef QACTION_OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (par)
#endif
  for (int k = 0; k < n_states; ++k) {
    try {
      double* vh = spec.psi_hi.data() + static_cast<std::size_t>(k) * np + 1;
      double* vl = spec.psi_lo.data() + static_cast<std::size_t>(k) * np + 1;
      RefineOutcome res = refine_state(H.diag, H.off, seeds[k], k, vh, vl);
      if (!res.ok) {
        std::ostringstream os;
        os << "eigensolver: refinement of state " << k << " stalled after " << res.steps
           << " steps, last eigenvalue update " << res.final_dlam << " at seed " << seeds[k];
        throw numeric_error(os.str());
      }
      defects[k] = res.final_dlam;

      // Continuum normalization: psi = v / sqrt(dx * sum v^2), in dd.
      dd s(0.0);
      for (int i = 0; i < m; ++i) s = s + dd(vh[i], vl[i]) * dd(vh[i], vl[i]);
      dd scale = dd(1.0) / dd_sqrt(s * dd(dx));
      int imax = 0;
      double amax = 0.0;
      for (int i = 0; i < m; ++i) {
        dd nv = dd(vh[i], vl[i]) * scale;
        vh[i] = nv.hi;
        vl[i] = nv.lo;
        double a = std::fabs(nv.hi);
        if (a > amax) {
          amax = a;
          imax = i;
        }
      }
      if (vh[imax] < 0.0)
        for (int i = 0; i < m; ++i) {
          vh[i] = -vh[i];
          vl[i] = -vl[i];
        }
      spec.energies[k] = res.lam;
    } catch (...) {
#ifdef QACTION_OPENMP
#pragma omp critical
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  spec.refine_defect = *std::max_element(defects.begin(), defects.end());

  // Bisection brackets come out ordered; refinement can swap ties. Restore
  // ascending order, then re-orthogonalize near-degenerate neighbors (the
  // refinement converges into the shared eigenspace, not to a specific basis).
  for (int k = 1; k < n_states; ++k) {
    if (spec.energies[k] < spec.energies[k - 1]) {
      if (spec.energies[k - 1].hi - spec.energies[k].hi >
          1e-6 * std::max(1.0, std::fabs(spec.energies[k].hi)))
        throw numeric_error("eigensolver: states converged out of order");
      std::swap(spec.energies[k - 1], spec.energies[k]);
      std::swap_ranges(spec.psi_hi.begin() + (static_cast<std::size_t>(k) - 1) * np,
                       spec.psi_hi.begin() + static_cast<std::size_t>(k) * np,
                       spec.psi_hi.begin() + static_cast<std::size_t>(k) * np);
      std::swap_ranges(spec.psi_lo.begin() + (static_cast<std::size_t>(k) - 1) * np,
                       spec.psi_lo.begin() + static_cast<std::size_t>(k) * np,
                       spec.psi_lo.begin() + static_cast<std::size_t>(k) * np);
    }
  }
  for (int k = 1; k < n_states; ++k) {
    double gap = spec.energies[k].hi - spec.energies[k - 1].hi;
    if (gap < 1e-8 * std::max(1.0, std::fabs(spec.energies[k].hi))) {
      double* ah = spec.psi_hi.data() + (static_cast<std::size_t>(k) - 1) * np;
      double* al = spec.psi_lo.data() + (static_cast<std::size_t>(k) - 1) * np;
      double* bh = spec.psi_hi.data() + static_cast<std::size_t>(k) * np;
      double* bl = spec.psi_lo.data() + static_cast<std::size_t>(k) * np;
      dd ip(0.0), nb(0.0);
      for (std::size_t i = 0; i < np; ++i) ip = ip + dd(ah[i], al[i]) * dd(bh[i], bl[i]);
      ip = ip * dd(dx);
      for (std::size_t i = 0; i < np; ++i) {
        dd nv = dd(bh[i], bl[i]) - dd(ah[i], al[i]) * ip;
        bh[i] = nv.hi;
        bl[i] = nv.lo;
        nb = nb + nv * nv;
      }
      dd sc = dd(1.0) / dd_sqrt(nb * dd(dx));
      for (std::size_t i = 0; i < np; ++i) {
        dd nv = dd(bh[i], bl[i]) * sc;
        bh[i] = nv.hi;
        bl[i] = nv.lo;
      }
    }
  }

  // Ground state must be nodeless and positive.
  {
    const double* g = spec.state_hi(0);
    int flips = 0;
    double prev = 0.0;
    for (int i = 1; i <= m; ++i) {
      double v = g[i];
      if (std::fabs(v) < 1e-280) continue;
      if (prev != 0.0 && std::signbit(v) != std::signbit(prev)) ++flips;
      prev = v;
    }
    if (flips != 0) throw numeric_error("eigensolver: ground state is not nodeless");
  }

  // Orthonormality defect: full near-diagonal band plus a strided sample of
  // distant pairs (distant eigenvectors of a symmetric tridiagonal decouple
  // automatically; the band is where trouble would show).
  {
    double defect = 0.0;
#ifdef QACTION_OPENMP
#pragma omp parallel for schedule(dynamic) reduction(max : defect) if (par)
#endif
    for (int k = 0; k < n_states; ++k) {
      const double* a = spec.state_hi(k);
      for (int l = k; l < n_states; ++l) {
        if (l - k > 6 && (l - k) % 9 != 0) continue;
        const double* b = spec.state_hi(l);
        double s = 0.0;
        for (std::size_t i = 1; i <= static_cast<std::size_t>(m); ++i) s += a[i] * b[i];
        s *= dx;
        double d = std::fabs(s - (k == l ? 1.0 : 0.0));
        defect = std::max(defect, d);
      }
    }
    spec.ortho_defect = defect;
    if (defect > 1e-8) {
      std::ostringstream os;
      os << "eigensolver: orthonormality defect " << defect << " exceeds 1e-8";
      throw numeric_error(os.str());
    }
  }
  return spec;
}

}  // namespace qaction
