#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "macover/ao_pipeline.hpp"
#include "macover/array_model.hpp"

namespace macover {

enum class Scheme { Proposed, Fpa, Mafab };

std::string to_string(Scheme s);
std::optional<Scheme> parse_scheme(const std::string& name);

/// A length as written in a config file: meters or multiples of lambda.
struct Length {
  double value = 0.0;
  bool in_wavelengths = false;

  double meters(double wavelength) const { return in_wavelengths ? value * wavelength : value; }
};

struct RegionSpec {
  double min_deg = 0.0;
  double max_deg = 0.0;
  std::optional<int> samples;
};

struct ExperimentConfig {
  int n_antennas = 8;
  double carrier_freq = 1e9;
  Length aperture{8.0, true};
  Length min_spacing{0.5, true};
  std::vector<RegionSpec> regions;
  AoConfig ao;
  std::vector<Scheme> schemes{Scheme::Proposed, Scheme::Fpa, Scheme::Mafab};
  std::string output_dir = "out";
  int fine_audit_factor = 10;

  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  ArrayConfig array() const;
  CoverageSpec coverage() const;
};

/// Every problem found while parsing, each prefixed with its line number
/// where one applies.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Line-oriented "key = value" format; '#' starts a comment. Lengths take a
/// unit suffix ("m" or "lambda"), angles are degrees and "region" may repeat:
///
///   n_antennas   = 8
///   carrier_freq = 1e9
///   aperture     = 8 lambda
///   min_spacing  = 0.5 lambda
///   region       = 0 30          # optional third field: sample count
///   schemes      = proposed, fpa, mafab
///
/// AO keys: rho, ao_tol, sca_tol_v, sca_tol_x, max_ao_iters, max_sca_iters,
/// randomization_trials, seed. Others: output_dir, fine_audit_factor.
ExperimentConfig parse_config(const std::string& text);

/// Canonical text that parses back to the same config.
std::string to_text(const ExperimentConfig& cfg);

/// FNV-1a over the canonical text of the array and region settings, as 16
/// hex digits. Runs of one problem share it whatever the schemes, seed or
/// output location.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace macover
