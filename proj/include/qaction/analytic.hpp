#pragma once

namespace qaction {

// Closed-form harmonic-oscillator quantities used as oracles.

// log of the Euclidean kernel
//   sqrt(m w / (2 pi hbar sinh wT)) * exp(-(m w / 2 hbar sinh wT)[(a^2+b^2) cosh wT - 2ab])
// evaluated in log space throughout, so it stays finite for any wT (the value
// itself underflows to 0 beyond wT ~ 1400; the log is the quantity of interest
// in the FK regime anyway).
double ho_kernel_log(double m, double omega, double hbar, double a, double b, double T);

// exp of the above; underflows to 0 rather than trapping.
double ho_kernel(double m, double omega, double hbar, double a, double b, double T);

// eta = -log(G / G0) for the HO kernel.
double ho_eta(double m, double omega, double hbar, double y, double x, double T,
              double G0 = 1.0);

// d eta / dy = (m w / hbar) [y coth(wT) - x / sinh(wT)].
double ho_deta_y(double m, double omega, double hbar, double y, double x, double T);

// Euclidean classical path [a sinh(w(T-t)) + b sinh(wt)] / sinh(wT), evaluated
// with negative exponentials only (stable for any wT).
double ho_classical_path(double a, double b, double T, double omega, double t);

// Action along that path: (m w / 2 sinh wT) [(a^2+b^2) cosh wT - 2ab].
double ho_sigma(double m, double omega, double a, double b, double T);

}  // namespace qaction
