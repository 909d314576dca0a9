#pragma once

// Tabulated optical constants and solar spectrum.
//
// File format (UTF-8, LF or CRLF, '#' comment lines ignored, header required):
//   dispersion: wavelength_nm,n,k
//   spectrum:   wavelength_nm,irradiance_W_m2_nm

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonbench/tmm.hpp"

namespace photonbench::materials {

/// h * c in J m.
inline constexpr double kPlanckTimesLightSpeed = 1.98644586e-25;

class DataError : public std::runtime_error {
 public:
  DataError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct DispersionSample {
  double wavelength_nm;
  double n;
  double k;
  friend bool operator==(const DispersionSample&, const DispersionSample&) = default;
};

class DispersionTable {
 public:
  /// Validates: >= 2 samples, strictly increasing wavelengths, k >= 0.
  DispersionTable(std::string material_id, std::vector<DispersionSample> samples);

  const std::string& material_id() const { return material_id_; }
  const std::vector<DispersionSample>& samples() const { return samples_; }
  double min_wavelength() const { return samples_.front().wavelength_nm; }
  double max_wavelength() const { return samples_.back().wavelength_nm; }

  /// Linear interpolation of n and k; std::out_of_range outside the table.
  tmm::ComplexIndex index_at(double wavelength_nm) const;

  friend bool operator==(const DispersionTable&, const DispersionTable&) = default;

 private:
  std::string material_id_;
  std::vector<DispersionSample> samples_;
};

struct SpectrumSample {
  double wavelength_nm;
  double irradiance;  ///< W m^-2 nm^-1
  friend bool operator==(const SpectrumSample&, const SpectrumSample&) = default;
};

class SolarSpectrum {
 public:
  explicit SolarSpectrum(std::vector<SpectrumSample> samples);

  const std::vector<SpectrumSample>& samples() const { return samples_; }
  double min_wavelength() const { return samples_.front().wavelength_nm; }
  double max_wavelength() const { return samples_.back().wavelength_nm; }
  double irradiance_at(double wavelength_nm) const;

  friend bool operator==(const SolarSpectrum&, const SolarSpectrum&) = default;

 private:
  std::vector<SpectrumSample> samples_;
};

DispersionTable parse_dispersion(std::istream& in, std::string material_id, const std::string& source = "<stream>");
DispersionTable load_dispersion(const std::filesystem::path& path);
void write_dispersion(std::ostream& out, const DispersionTable& table);

SolarSpectrum parse_spectrum(std::istream& in, const std::string& source = "<stream>");
SolarSpectrum load_spectrum(const std::filesystem::path& path);
void write_spectrum(std::ostream& out, const SolarSpectrum& spectrum);

/// Photon flux in photons m^-2 s^-1 nm^-1 at the given wavelength.
double photon_flux(const SolarSpectrum& spectrum, double wavelength_nm);

/// Directory holding au_nk.csv, si_nk.csv and am15.csv. Honours the
/// PHOTONBENCH_DATA_DIR environment variable.
std::filesystem::path default_data_dir();

}  // namespace photonbench::materials
