#pragma once

#include <cmath>

namespace qaction {

// Double-double value: an unevaluated sum hi + lo carrying ~32 significant
// digits. The propagator sums cancel down to ~1e-8 of their largest term at
// small T, where plain doubles leave a storage-noise floor far above the fit
// tolerances; eigenpairs and window kernels therefore run in dd.
//
// Do not compile this header with fast-math: every primitive relies on IEEE
// rounding of individual operations.
struct dd {
  double hi = 0.0;
  double lo = 0.0;

  constexpr dd() = default;
  constexpr dd(double h) : hi(h) {}
  constexpr dd(double h, double l) : hi(h), lo(l) {}

  double value() const { return hi + lo; }
};

namespace dd_detail {

// Knuth: a + b = s + err exactly, no magnitude assumption.
inline dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

// Requires |a| >= |b| or a == 0.
inline dd quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

// a * b = p + err exactly; fma produces the rounding error directly.
inline dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace dd_detail

inline dd operator+(dd a, dd b) {
  dd s = dd_detail::two_sum(a.hi, b.hi);
  dd t = dd_detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = dd_detail::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return dd_detail::quick_two_sum(s.hi, s.lo);
}

inline dd operator+(dd a, double b) {
  dd s = dd_detail::two_sum(a.hi, b);
  s.lo += a.lo;
  return dd_detail::quick_two_sum(s.hi, s.lo);
}

inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }
inline dd operator-(dd a, double b) { return a + (-b); }
inline dd operator-(double a, dd b) { return (-b) + a; }

inline dd operator*(dd a, dd b) {
  dd p = dd_detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return dd_detail::quick_two_sum(p.hi, p.lo);
}

inline dd operator*(dd a, double b) {
  dd p = dd_detail::two_prod(a.hi, b);
  p.lo += a.lo * b;
  return dd_detail::quick_two_sum(p.hi, p.lo);
}

inline dd operator/(dd a, dd b) {
  double q1 = a.hi / b.hi;
  dd r = a - b * q1;
  double q2 = r.hi / b.hi;
  r = r - b * q2;
  double q3 = r.hi / b.hi;
  dd q = dd_detail::quick_two_sum(q1, q2);
  return q + q3;
}

inline bool operator<(dd a, dd b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}

inline dd dd_sqrt(dd a) {
  if (a.hi == 0.0) return {0.0, 0.0};
  // One Newton step from the double estimate keeps full dd accuracy.
  double x = 1.0 / std::sqrt(a.hi);
  double ax = a.hi * x;
  return dd_detail::quick_two_sum(ax, (a - dd_detail::two_prod(ax, ax)).hi * (x * 0.5));
}

// exp of a dd whose lo part is far below 1; e^(hi+lo) = e^hi * (1 + lo + ...).
inline dd dd_exp(dd t) {
  double e = std::exp(t.hi);
  return dd(e) * dd(1.0, t.lo);
}

// log of a positive dd, returned as a plain double (enough for the eta field).
inline double dd_log(dd a) {
  return std::log(a.hi) + std::log1p(a.lo / a.hi);
}

}  // namespace qaction
