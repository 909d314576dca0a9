#pragma once

// Coherent transfer-matrix optics for planar multilayer stacks.
//
// Conventions:
//   * time dependence exp(-i w t), so absorbing media have n + i k with k >= 0;
//   * lengths in nanometres, angles in degrees at the API boundary;
//   * p-polarised amplitudes are ratios of tangential electric fields, which
//     makes r_p == r_s at normal incidence.

#include <complex>
#include <vector>

namespace photonbench::tmm {

using complex = std::complex<double>;

/// Complex refractive index n + i k of a passive medium.
struct ComplexIndex {
  double n = 1.0;
  double k = 0.0;

  complex value() const { return {n, k}; }
  complex permittivity() const { return value() * value(); }

  /// Principal square root of a passive permittivity (Im eps >= 0).
  static ComplexIndex from_permittivity(complex eps);
  static ComplexIndex from_permittivity(double eps) { return from_permittivity(complex{eps, 0.0}); }

  bool lossless() const { return k == 0.0; }
  friend bool operator==(const ComplexIndex&, const ComplexIndex&) = default;
};

struct Layer {
  double thickness_nm = 0.0;
  ComplexIndex index;
};

/// superstrate -> layers[0] -> ... -> layers[n-1] -> substrate, in the
/// order light meets them.
struct LayerStack {
  ComplexIndex superstrate;
  std::vector<Layer> layers;
  ComplexIndex substrate;

  /// Same structure traversed from the substrate side.
  LayerStack reversed() const;

  /// Throws std::invalid_argument on negative thickness or k < 0.
  void validate() const;
};

enum class Polarization { s, p };

struct PlaneWave {
  double wavelength_nm = 600.0;
  double angle_deg = 0.0;  ///< measured in the incidence medium, [0, 90)
  Polarization polarization = Polarization::s;
};

struct StackResponse {
  complex r;
  complex t;
  double R = 0.0;  ///< power reflectance
  double T = 0.0;  ///< power transmittance into the substrate
  double A = 0.0;  ///< absorbed fraction, 1 - R - T
};

struct InterfaceCoefficients {
  complex r;
  complex t;
};

/// Amplitude coefficients of a single interface, n1 on the incidence side.
/// Throws std::domain_error for angle >= 90 degrees.
InterfaceCoefficients fresnel_interface(ComplexIndex n1, ComplexIndex n2, const PlaneWave& wave);

/// Reflection, transmission and absorption of the whole stack.
/// The superstrate must be lossless.
StackResponse stack_response(const LayerStack& stack, const PlaneWave& wave);

struct EllipsometricAngles {
  double psi_deg = 0.0;    ///< atan|r_p / r_s|, in [0, 90]
  double delta_deg = 0.0;  ///< arg(r_p / r_s), in (-180, 180]
};

/// Throws std::domain_error when r_s vanishes or the angle is outside (0, 90).
EllipsometricAngles ellipsometric_angles(const LayerStack& stack, double wavelength_nm, double angle_deg);

/// Longitudinal wave-vector factor n_j cos(theta_j) = sqrt(n_j^2 - beta^2),
/// on the branch with non-negative imaginary part.
complex normal_component(complex n, complex beta);

}  // namespace photonbench::tmm
