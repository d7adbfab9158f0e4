#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace macover {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPositionTol = 1e-9;           // m

/// Raised when a domain value violates its construction invariants.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }
inline double to_db(double gain) { return 10.0 * std::log10(gain); }

/// Linear movable-antenna array: N elements inside [0, D] with adjacent
/// spacing of at least d_min.
class ArrayConfig {
 public:
  ArrayConfig(int n_antennas, double aperture_m, double wavelength_m,
              double min_spacing_m,
              std::optional<double> carrier_hz = std::nullopt);

  static ArrayConfig from_carrier(int n_antennas, double aperture_m,
                                  double carrier_hz, double min_spacing_m);

  int n_antennas() const { return n_; }
  double aperture() const { return aperture_; }
  double wavelength() const { return wavelength_; }
  double min_spacing() const { return min_spacing_; }
  double carrier_freq() const { return kSpeedOfLight / wavelength_; }

 private:
  int n_;
  double aperture_;
  double wavelength_;
  double min_spacing_;
};

/// Antenna coordinates in meters, kept in ascending order.
class PositionVector {
 public:
  PositionVector() = default;
  explicit PositionVector(std::vector<double> coords);

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t n) const { return coords_[n]; }
  const std::vector<double>& coords() const { return coords_; }
  std::span<const double> span() const { return coords_; }
  Eigen::VectorXd to_eigen() const;

  bool operator==(const PositionVector&) const = default;

 private:
  std::vector<double> coords_;
};

/// Constant-modulus analog weights (1/sqrt(N)) e^{j phi_n}. Only the phases
/// are stored, so the modulus constraint holds by construction.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> phases) : phases_(std::move(phases)) {}

  /// Keeps only the argument of each entry; zero entries map to phase 0.
  static WeightVector from_complex(const Eigen::VectorXcd& w);

  std::size_t size() const { return phases_.size(); }
  const std::vector<double>& phases() const { return phases_; }
  cdouble weight(std::size_t n) const;
  Eigen::VectorXcd to_eigen() const;

  bool operator==(const WeightVector&) const = default;

 private:
  std::vector<double> phases_;
};

struct AngularRegion {
  double min_rad;
  double max_rad;
};

/// K pairwise-disjoint angular regions inside [0, pi] with per-region sample
/// counts. A point region (min == max) is allowed with exactly one sample.
class CoverageSpec {
 public:
  CoverageSpec(std::vector<AngularRegion> regions, std::vector<int> samples);

  /// Regions with the default density of one sample per degree.
  static CoverageSpec with_default_density(std::vector<AngularRegion> regions);
  static CoverageSpec point(double angle_rad);

  std::size_t num_regions() const { return regions_.size(); }
  const std::vector<AngularRegion>& regions() const { return regions_; }
  const std::vector<int>& samples() const { return samples_; }

 private:
  std::vector<AngularRegion> regions_;
  std::vector<int> samples_;
};

/// ceil(width in degrees) + 1 samples, at least 2.
int default_samples(double width_rad);

struct SampleGrid {
  std::vector<double> angles;
  std::vector<int> region_index;

  std::size_t size() const { return angles.size(); }
  /// Ad-hoc grid of arbitrary angles, all tagged as region 0.
  static SampleGrid from_angles(std::vector<double> angles);
};

SampleGrid discretize(const CoverageSpec& spec);

Eigen::VectorXcd steering_vector(const PositionVector& x, double theta,
                                 double wavelength);

double beam_gain(const WeightVector& w, const PositionVector& x, double theta,
                 double wavelength);

/// Beam gain at every grid angle.
std::vector<double> beam_gains(const WeightVector& w, const PositionVector& x,
                               std::span<const double> angles,
                               double wavelength);

double min_gain(const WeightVector& w, const PositionVector& x,
                const SampleGrid& grid, double wavelength);

enum class ViolationKind { LowerBox, UpperBox, Spacing, Size };

struct Violation {
  ViolationKind kind;
  std::size_t index;  // antenna index (0-based); for Spacing, the upper one
  double slack;       // negative when violated
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
  std::string describe() const;
};

FeasibilityReport is_feasible(const PositionVector& x, const ArrayConfig& cfg);

}  // namespace macover
