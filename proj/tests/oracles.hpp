#pragma once

// Reference computations written independently of the library: textbook
// Fresnel formulas, Rouard's recursion, the unscaled characteristic-matrix
// product, and literal transcriptions of the metric formulas.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

struct Film {
  cplx n;
  double d;
};

/// cos(theta) inside a medium of index n, from Snell's law, on the branch
/// with Im(n cos theta) >= 0.
inline cplx cos_in(cplx n, cplx n0_sin0) {
  const cplx s = n0_sin0 / n;
  cplx c = std::sqrt(1.0 - s * s);
  if ((n * c).imag() < 0.0 || ((n * c).imag() == 0.0 && (n * c).real() < 0.0)) c = -c;
  return c;
}

/// Single-interface amplitude reflection; p uses the tangential-field
/// convention r_p = (n1 cos t2 - n2 cos t1) / (n1 cos t2 + n2 cos t1).
inline cplx fresnel_r(cplx n1, cplx n2, bool p, cplx n0_sin0) {
  const cplx c1 = cos_in(n1, n0_sin0);
  const cplx c2 = cos_in(n2, n0_sin0);
  if (!p) return (n1 * c1 - n2 * c2) / (n1 * c1 + n2 * c2);
  return (n1 * c2 - n2 * c1) / (n1 * c2 + n2 * c1);
}

inline cplx interface_r(cplx n1, cplx n2, double angle_deg, bool p) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  return fresnel_r(n1, n2, p, n1 * std::sin(a));
}

/// Rouard's recursion, working back from the substrate.
inline cplx rouard_r(cplx n0, const std::vector<Film>& films, cplx ns, double wavelength, double angle_deg, bool p) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const cplx beta = n0 * std::sin(a);
  std::vector<cplx> n{n0};
  for (const auto& f : films) n.push_back(f.n);
  n.push_back(ns);
  cplx gamma = fresnel_r(n[n.size() - 2], n.back(), p, beta);
  for (std::size_t j = films.size(); j >= 1; --j) {
    const cplx phase = 2.0 * std::numbers::pi * n[j] * cos_in(n[j], beta) * films[j - 1].d / wavelength;
    const cplx e = std::exp(cplx{0.0, 2.0} * phase);
    const cplx r = fresnel_r(n[j - 1], n[j], p, beta);
    gamma = (r + gamma * e) / (1.0 + r * gamma * e);
  }
  return gamma;
}

struct Powers {
  double R;
  double T;
};

/// Normal-incidence R and T from the product of textbook characteristic
/// matrices, written for exp(-i w t) and n + i k:
/// [[cos d, -i sin d / n], [-i n sin d, cos d]].
inline Powers characteristic_rt(double n0, const std::vector<Film>& films, cplx ns, double wavelength) {
  cplx m11 = 1, m12 = 0, m21 = 0, m22 = 1;
  for (const auto& f : films) {
    const cplx d = 2.0 * std::numbers::pi * f.n * f.d / wavelength;
    const cplx a = std::cos(d), b = cplx{0, -1} * std::sin(d) / f.n, c = cplx{0, -1} * f.n * std::sin(d);
    const cplx t11 = m11 * a + m12 * c, t12 = m11 * b + m12 * a;
    const cplx t21 = m21 * a + m22 * c, t22 = m21 * b + m22 * a;
    m11 = t11, m12 = t12, m21 = t21, m22 = t22;
  }
  const cplx B = m11 + m12 * ns, C = m21 + m22 * ns;
  const cplx den = n0 * B + C;
  return {std::norm((n0 * B - C) / den), 4.0 * n0 * ns.real() / std::norm(den)};
}

/// Normal-incidence R and T by Rouard's recursion, which carries the
/// transmitted amplitude along and stays finite for thick absorbing films.
inline Powers rouard_rt(double n0, const std::vector<Film>& films, cplx ns, double wavelength) {
  std::vector<cplx> n{n0};
  for (const auto& f : films) n.push_back(f.n);
  n.push_back(ns);
  auto r_ab = [](cplx a, cplx b) { return (a - b) / (a + b); };
  auto t_ab = [](cplx a, cplx b) { return 2.0 * a / (a + b); };
  cplx gamma = r_ab(n[n.size() - 2], ns), tau = t_ab(n[n.size() - 2], ns);
  for (std::size_t j = films.size(); j >= 1; --j) {
    const cplx delta = 2.0 * std::numbers::pi * n[j] * films[j - 1].d / wavelength;
    const cplx e1 = std::exp(cplx{0.0, 1.0} * delta);
    const cplx r = r_ab(n[j - 1], n[j]), t = t_ab(n[j - 1], n[j]);
    const cplx den = 1.0 + r * gamma * e1 * e1;
    tau = t * tau * e1 / den;
    gamma = (r + gamma * e1 * e1) / den;
  }
  return {std::norm(gamma), ns.real() / n0 * std::norm(tau)};
}

/// Reflectance of one quarter-wave film of index n1 between n0 and ns.
inline double quarter_wave_R(double n0, double n1, double ns) {
  const double v = (n0 * ns - n1 * n1) / (n0 * ns + n1 * n1);
  return v * v;
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

/// Area over the convergence curve by direct summation.
inline double aocc(const std::vector<double>& best, double lb, double ub, std::size_t budget, bool log_scale) {
  double total = 0.0;
  for (std::size_t i = 0; i < budget; ++i) {
    double s = i < best.size() ? best[i] : best.back();
    s = std::min(std::max(s, lb), ub);
    double v = s, lo = lb, hi = ub;
    if (log_scale) v = std::log10(s), lo = std::log10(lb), hi = std::log10(ub);
    total += 1.0 - (v - lo) / (hi - lo);
  }
  return total / static_cast<double>(budget);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace oracle
