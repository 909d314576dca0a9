#include "photonbench/tmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace photonbench::tmm {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void check_wave(const PlaneWave& wave) {
  if (!(wave.wavelength_nm > 0.0) || !std::isfinite(wave.wavelength_nm))
    throw std::invalid_argument("wavelength must be positive, got " + std::to_string(wave.wavelength_nm));
  if (!(wave.angle_deg >= 0.0) || !(wave.angle_deg < 90.0))
    throw std::domain_error("incidence angle must lie in [0, 90) degrees, got " + std::to_string(wave.angle_deg));
}

// Tilted optical admittance in units of the free-space admittance.
complex admittance(complex n, complex q, Polarization pol) {
  return pol == Polarization::s ? q : n * n / q;
}

// Transverse invariant n0 sin(theta0). An exact zero keeps normal incidence
// free of rounding in sin().
complex transverse_invariant(complex n0, double angle_deg) {
  if (angle_deg == 0.0) return {0.0, 0.0};
  return n0 * std::sin(angle_deg * kDegToRad);
}

}  // namespace

ComplexIndex ComplexIndex::from_permittivity(complex eps) {
  const complex root = std::sqrt(eps);
  return {root.real(), std::max(0.0, root.imag())};
}

LayerStack LayerStack::reversed() const {
  LayerStack out{substrate, {layers.rbegin(), layers.rend()}, superstrate};
  return out;
}

void LayerStack::validate() const {
  auto check_index = [](const ComplexIndex& idx, const char* what) {
    if (!(idx.k >= 0.0)) throw std::invalid_argument(std::string(what) + ": extinction coefficient must be >= 0");
    if (!std::isfinite(idx.n) || !std::isfinite(idx.k)) throw std::invalid_argument(std::string(what) + ": non-finite index");
  };
  check_index(superstrate, "superstrate");
  check_index(substrate, "substrate");
  for (const auto& layer : layers) {
    check_index(layer.index, "layer");
    if (!(layer.thickness_nm >= 0.0) || !std::isfinite(layer.thickness_nm))
      throw std::invalid_argument("layer thickness must be >= 0, got " + std::to_string(layer.thickness_nm));
  }
}

complex normal_component(complex n, complex beta) {
  complex q = std::sqrt(n * n - beta * beta);
  if (q.imag() < 0.0 || (q.imag() == 0.0 && q.real() < 0.0)) q = -q;
  return q;
}

InterfaceCoefficients fresnel_interface(ComplexIndex n1, ComplexIndex n2, const PlaneWave& wave) {
  check_wave(wave);
  const complex beta = transverse_invariant(n1.value(), wave.angle_deg);
  const complex q1 = normal_component(n1.value(), beta);
  const complex q2 = normal_component(n2.value(), beta);
  const complex eta1 = admittance(n1.value(), q1, wave.polarization);
  const complex eta2 = admittance(n2.value(), q2, wave.polarization);
  return {(eta1 - eta2) / (eta1 + eta2), 2.0 * eta1 / (eta1 + eta2)};
}

StackResponse stack_response(const LayerStack& stack, const PlaneWave& wave) {
  check_wave(wave);
  stack.validate();
  if (!stack.superstrate.lossless())
    throw std::invalid_argument("superstrate must be lossless for power quantities");

  const complex n0 = stack.superstrate.value();
  const complex beta = transverse_invariant(n0, wave.angle_deg);
  const complex eta0 = admittance(n0, normal_component(n0, beta), wave.polarization);
  const complex ns = stack.substrate.value();
  const complex etas = admittance(ns, normal_component(ns, beta), wave.polarization);

  // Characteristic matrices, each multiplied by exp(i delta) so that entries
  // stay bounded inside thick absorbing layers; the factor is restored in t.
  complex m11{1.0, 0.0}, m12{0.0, 0.0}, m21{0.0, 0.0}, m22{1.0, 0.0};
  complex total_phase{0.0, 0.0};
  const double k0 = 2.0 * std::numbers::pi / wave.wavelength_nm;
  for (const auto& layer : stack.layers) {
    if (layer.thickness_nm == 0.0) continue;
    const complex n = layer.index.value();
    const complex q = normal_component(n, beta);
    const complex eta = admittance(n, q, wave.polarization);
    const complex delta = k0 * q * layer.thickness_nm;
    const complex e2 = std::exp(complex{0.0, 2.0} * delta);
    const complex a = 0.5 * (1.0 + e2);
    const complex b = 0.5 * (1.0 - e2) / eta;
    const complex c = 0.5 * (1.0 - e2) * eta;
    const complex n11 = m11 * a + m12 * c;
    const complex n12 = m11 * b + m12 * a;
    const complex n21 = m21 * a + m22 * c;
    const complex n22 = m21 * b + m22 * a;
    m11 = n11;
    m12 = n12;
    m21 = n21;
    m22 = n22;
    total_phase += delta;
  }

  const complex B = m11 + m12 * etas;
  const complex C = m21 + m22 * etas;
  const complex denom = eta0 * B + C;

  StackResponse out;
  out.r = (eta0 * B - C) / denom;
  out.t = 2.0 * eta0 * std::exp(complex{0.0, 1.0} * total_phase) / denom;
  out.R = std::norm(out.r);
  out.T = etas.real() / eta0.real() * std::norm(out.t);
  out.A = std::max(0.0, 1.0 - out.R - out.T);
  return out;
}

EllipsometricAngles ellipsometric_angles(const LayerStack& stack, double wavelength_nm, double angle_deg) {
  if (!(angle_deg > 0.0) || !(angle_deg < 90.0))
    throw std::domain_error("ellipsometry needs an oblique angle in (0, 90) degrees");
  const auto rs = stack_response(stack, {wavelength_nm, angle_deg, Polarization::s}).r;
  const auto rp = stack_response(stack, {wavelength_nm, angle_deg, Polarization::p}).r;
  if (std::abs(rs) == 0.0) throw std::domain_error("r_s vanishes; ellipsometric ratio undefined");
  const complex rho = rp / rs;
  EllipsometricAngles out;
  out.psi_deg = std::atan(std::abs(rho)) * kRadToDeg;
  out.delta_deg = std::arg(rho) * kRadToDeg;
  if (out.delta_deg <= -180.0) out.delta_deg += 360.0;
  return out;
}

}  // namespace photonbench::tmm
