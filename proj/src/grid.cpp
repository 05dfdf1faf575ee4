#include "qaction/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qaction {

int Grid::nearest_node(double x) const {
  int i = static_cast<int>(std::lround((x - x_min) / dx()));
  return std::clamp(i, 0, n_points - 1);
}

void Grid::validate() const {
  if (n_points < 3) throw config_error("grid: n_points must be at least 3");
  if (!(x_max > x_min)) throw config_error("grid: x_max must exceed x_min");
  if (!std::isfinite(x_min) || !std::isfinite(x_max))
    throw config_error("grid: box bounds must be finite");
}

double PolynomialPotential::operator()(double x) const {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
  return v;
}

double PolynomialPotential::deriv(double x) const {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) v = v * x + k * coeffs[k];
  return v;
}

double PolynomialPotential::deriv2(double x) const {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 2;) v = v * x + k * (k - 1) * coeffs[k];
  return v;
}

int PolynomialPotential::degree() const {
  for (std::size_t k = coeffs.size(); k-- > 0;)
    if (coeffs[k] != 0.0) return static_cast<int>(k);
  return 0;
}

bool PolynomialPotential::confining() const {
  int d = degree();
  return d >= 2 && d % 2 == 0 && coeffs[d] > 0.0;
}

PolynomialPotential PolynomialPotential::shifted(double c) const {
  PolynomialPotential p = *this;
  if (p.coeffs.empty()) p.coeffs.push_back(0.0);
  p.coeffs[0] += c;
  return p;
}

PolynomialPotential PolynomialPotential::scaled(double s) const {
  PolynomialPotential p = *this;
  for (double& c : p.coeffs) c *= s;
  return p;
}

namespace {

// Dense scan + parabolic refinement; robust for the low-degree polynomials
// this library deals with.
std::pair<double, double> scan_min(const PolynomialPotential& p, double lo, double hi) {
  constexpr int kScan = 4096;
  double best_x = lo, best_v = p(lo);
  for (int i = 1; i <= kScan; ++i) {
    double x = lo + (hi - lo) * i / kScan;
    double v = p(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  double h = (hi - lo) / kScan;
  for (int it = 0; it < 60; ++it) {
    double d1 = p.deriv(best_x), d2 = p.deriv2(best_x);
    if (d2 <= 0.0) break;
    double step = -d1 / d2;
    step = std::clamp(step, -h, h);
    double xn = std::clamp(best_x + step, lo, hi);
    if (p(xn) <= best_v) {
      best_v = p(xn);
      best_x = xn;
    }
    if (std::fabs(step) < 1e-15 * (1.0 + std::fabs(best_x))) break;
  }
  return {best_x, best_v};
}

}  // namespace

double PolynomialPotential::min_on(double lo, double hi) const {
  return scan_min(*this, lo, hi).second;
}

double PolynomialPotential::argmin_on(double lo, double hi) const {
  return scan_min(*this, lo, hi).first;
}

std::vector<int> window_node_indices(const Grid& grid, const Window& w,
                                     double wall_margin_fraction) {
  grid.validate();
  if (w.n_nodes < 2) throw config_error("window: n_nodes must be at least 2");
  if (!(w.hi > w.lo)) throw config_error("window: hi must exceed lo");
  double margin = wall_margin_fraction * (grid.x_max - grid.x_min);
  if (w.lo < grid.x_min + margin || w.hi > grid.x_max - margin) {
    std::ostringstream os;
    os << "window [" << w.lo << ", " << w.hi << "] touches the wall margin of box ["
       << grid.x_min << ", " << grid.x_max << "]; eta is contaminated near the walls";
    throw config_error(os.str());
  }
  std::vector<int> idx(w.n_nodes);
  for (int i = 0; i < w.n_nodes; ++i) {
    double pos = w.lo + (w.hi - w.lo) * i / (w.n_nodes - 1);
    idx[i] = grid.nearest_node(pos);
    // The eta stencil reaches two nodes past the window.
    if (idx[i] < 2 || idx[i] > grid.n_points - 3)
      throw config_error("window: node too close to the grid edge");
    if (i > 0 && idx[i] <= idx[i - 1])
      throw config_error("window: n_nodes exceeds the grid resolution inside the window");
  }
  return idx;
}

Grid auto_grid(const ClassicalSystem& sys, double T_min) {
  if (!(T_min > 0.0)) throw domain_error("auto_grid: T must be positive");
  if (!sys.potential.confining() && !sys.box_regularized)
    throw config_error(
        "system: potential is not confining; set box_regularized to treat it as a "
        "hard-wall box problem");
  if (!(sys.mass > 0.0) || !(sys.hbar > 0.0))
    throw config_error("system: mass and hbar must be positive");

  // Root-magnitude bound for the scan range.
  const auto& c = sys.potential.coeffs;
  int deg = sys.potential.degree();
  double r = 1.0;
  for (int k = 0; k < deg; ++k) r = std::max(r, std::fabs(c[k] / c[deg]));
  double scan = 2.0 * (1.0 + r);

  double x_star = sys.potential.argmin_on(-scan, scan);
  double v_min = sys.potential(x_star);
  double curv = std::max(sys.potential.deriv2(x_star), 1e-8);
  double omega_eff = std::sqrt(curv / sys.mass);
  double E0_est = v_min + 0.5 * sys.hbar * omega_eff;

  // Retained states reach E0 + 17 ln(10) hbar / T (the truncation depth);
  // the walls must sit beyond their turning points or the kept states are
  // distorted. All terms scale linearly under the alpha family, so the
  // resulting box is scale-covariant.
  double depth = 17.0 * std::log(10.0) * sys.hbar / T_min;
  double E_cut = E0_est + std::max(25.0 * sys.hbar * omega_eff,
                                   depth + 5.0 * sys.hbar * omega_eff);
  double E_wall = v_min + 1.3 * (E_cut - v_min);

  auto wall = [&](double dir) {
    double step = std::max(1.0, std::fabs(x_star));
    double x = x_star;
    while (sys.potential(x + dir * step) < E_wall && step < 1e6) step *= 2.0;
    double lo = x, hi = x + dir * step;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      if (sys.potential(mid) < E_wall)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  double left = wall(-1.0), right = wall(+1.0);
  double x_min = x_star + 1.15 * (left - x_star);
  double x_max = x_star + 1.15 * (right - x_star);

  // Resolution follows the largest retained wavenumber.
  double k_max = std::sqrt(2.0 * sys.mass * std::max(E_cut - v_min, 1e-8)) / sys.hbar;
  double width = x_max - x_min;
  int n = static_cast<int>(std::ceil(width * k_max / 0.08)) + 1;
  n = std::clamp(n, 2001, 200001);
  if (n % 2 == 0) ++n;
  return Grid{x_min, x_max, n};
}

}  // namespace qaction
