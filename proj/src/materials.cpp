#include "photonbench/materials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace photonbench::materials {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, const std::string& source, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value))
    throw DataError(source, line, fmt::format("cannot parse number '{}'", field));
  return value;
}

// Reads every data row after the header; returns (line number, fields).
std::vector<std::pair<std::size_t, std::vector<double>>> read_rows(std::istream& in, std::string_view header,
                                                                   std::size_t columns, const std::string& source) {
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      if (line != header) throw DataError(source, line_no, fmt::format("expected header '{}'", header));
      seen_header = true;
      continue;
    }
    std::vector<double> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(parse_number(line.substr(start, comma - start), source, line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != columns)
      throw DataError(source, line_no, fmt::format("expected {} columns, found {}", columns, fields.size()));
    rows.emplace_back(line_no, std::move(fields));
  }
  if (!seen_header) throw DataError(source, line_no, fmt::format("missing header '{}'", header));
  return rows;
}

template <typename Sample>
std::pair<const Sample*, const Sample*> bracket(const std::vector<Sample>& samples, double wavelength_nm,
                                                const char* what) {
  if (!(wavelength_nm >= samples.front().wavelength_nm) || !(wavelength_nm <= samples.back().wavelength_nm))
    throw std::out_of_range(fmt::format("{}: wavelength {} nm outside [{}, {}]", what, wavelength_nm,
                                        samples.front().wavelength_nm, samples.back().wavelength_nm));
  auto hi = std::lower_bound(samples.begin(), samples.end(), wavelength_nm,
                             [](const Sample& s, double w) { return s.wavelength_nm < w; });
  if (hi->wavelength_nm == wavelength_nm || hi == samples.begin()) return {&*hi, &*hi};
  return {&*(hi - 1), &*hi};
}

double lerp_at(double x0, double y0, double x1, double y1, double x) {
  if (x0 == x1) return y0;
  const double u = (x - x0) / (x1 - x0);
  return y0 + u * (y1 - y0);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  return in;
}

}  // namespace

DataError::DataError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}: {}", source, line, what) : fmt::format("{}: {}", source, what)),
      line_(line) {}

DispersionTable::DispersionTable(std::string material_id, std::vector<DispersionSample> samples)
    : material_id_(std::move(material_id)), samples_(std::move(samples)) {
  if (samples_.size() < 2) throw std::invalid_argument(material_id_ + ": dispersion table needs >= 2 samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i].k >= 0.0))
      throw std::invalid_argument(fmt::format("{}: negative k at {} nm", material_id_, samples_[i].wavelength_nm));
    if (i > 0 && !(samples_[i].wavelength_nm > samples_[i - 1].wavelength_nm))
      throw std::invalid_argument(fmt::format("{}: wavelengths not strictly increasing at {} nm", material_id_,
                                              samples_[i].wavelength_nm));
  }
}

tmm::ComplexIndex DispersionTable::index_at(double wavelength_nm) const {
  const auto [lo, hi] = bracket(samples_, wavelength_nm, material_id_.c_str());
  return {lerp_at(lo->wavelength_nm, lo->n, hi->wavelength_nm, hi->n, wavelength_nm),
          lerp_at(lo->wavelength_nm, lo->k, hi->wavelength_nm, hi->k, wavelength_nm)};
}

SolarSpectrum::SolarSpectrum(std::vector<SpectrumSample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw std::invalid_argument("solar spectrum needs >= 2 samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i].irradiance >= 0.0))
      throw std::invalid_argument(fmt::format("negative irradiance at {} nm", samples_[i].wavelength_nm));
    if (i > 0 && !(samples_[i].wavelength_nm > samples_[i - 1].wavelength_nm))
      throw std::invalid_argument(
          fmt::format("spectrum wavelengths not strictly increasing at {} nm", samples_[i].wavelength_nm));
  }
}

double SolarSpectrum::irradiance_at(double wavelength_nm) const {
  const auto [lo, hi] = bracket(samples_, wavelength_nm, "solar spectrum");
  return lerp_at(lo->wavelength_nm, lo->irradiance, hi->wavelength_nm, hi->irradiance, wavelength_nm);
}

DispersionTable parse_dispersion(std::istream& in, std::string material_id, const std::string& source) {
  std::vector<DispersionSample> samples;
  double last = -INFINITY;
  for (const auto& [line, f] : read_rows(in, "wavelength_nm,n,k", 3, source)) {
    if (f[0] == last) throw DataError(source, line, fmt::format("duplicate wavelength {}", f[0]));
    if (f[0] < last) throw DataError(source, line, "wavelengths must be strictly increasing");
    if (f[2] < 0.0) throw DataError(source, line, "extinction coefficient k must be >= 0");
    samples.push_back({f[0], f[1], f[2]});
    last = f[0];
  }
  if (samples.size() < 2) throw DataError(source, 0, "need at least 2 samples");
  return DispersionTable(std::move(material_id), std::move(samples));
}

DispersionTable load_dispersion(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  auto id = path.stem().string();
  if (id.size() > 3 && id.ends_with("_nk")) id.resize(id.size() - 3);
  return parse_dispersion(in, id, path.string());
}

void write_dispersion(std::ostream& out, const DispersionTable& table) {
  out << "# " << table.material_id() << "\nwavelength_nm,n,k\n";
  for (const auto& s : table.samples()) out << fmt::format("{:.17g},{:.17g},{:.17g}\n", s.wavelength_nm, s.n, s.k);
}

SolarSpectrum parse_spectrum(std::istream& in, const std::string& source) {
  std::vector<SpectrumSample> samples;
  double last = -INFINITY;
  for (const auto& [line, f] : read_rows(in, "wavelength_nm,irradiance_W_m2_nm", 2, source)) {
    if (f[0] == last) throw DataError(source, line, fmt::format("duplicate wavelength {}", f[0]));
    if (f[0] < last) throw DataError(source, line, "wavelengths must be strictly increasing");
    if (f[1] < 0.0) throw DataError(source, line, "irradiance must be >= 0");
    samples.push_back({f[0], f[1]});
    last = f[0];
  }
  if (samples.size() < 2) throw DataError(source, 0, "need at least 2 samples");
  return SolarSpectrum(std::move(samples));
}

SolarSpectrum load_spectrum(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_spectrum(in, path.string());
}

void write_spectrum(std::ostream& out, const SolarSpectrum& spectrum) {
  out << "wavelength_nm,irradiance_W_m2_nm\n";
  for (const auto& s : spectrum.samples()) out << fmt::format("{:.17g},{:.17g}\n", s.wavelength_nm, s.irradiance);
}

double photon_flux(const SolarSpectrum& spectrum, double wavelength_nm) {
  return spectrum.irradiance_at(wavelength_nm) * wavelength_nm * 1e-9 / kPlanckTimesLightSpeed;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("PHOTONBENCH_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::path(PHOTONBENCH_SHARE_DIR) / "data";
}

}  // namespace photonbench::materials
