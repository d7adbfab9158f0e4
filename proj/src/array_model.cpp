#include "macover/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "macover/kernels.hpp"

namespace macover {

ArrayConfig::ArrayConfig(int n_antennas, double aperture_m, double wavelength_m,
                         double min_spacing_m, std::optional<double> carrier_hz)
    : n_(n_antennas),
      aperture_(aperture_m),
      wavelength_(wavelength_m),
      min_spacing_(min_spacing_m) {
  if (n_ < 1) throw InvalidArgument("n_antennas must be >= 1");
  if (!(aperture_ > 0.0)) throw InvalidArgument("aperture must be > 0");
  if (!(wavelength_ > 0.0)) throw InvalidArgument("wavelength must be > 0");
  if (!(min_spacing_ >= 0.0)) throw InvalidArgument("min_spacing must be >= 0");
  if ((n_ - 1) * min_spacing_ > aperture_ + kPositionTol) {
    std::ostringstream os;
    os << "infeasible geometry: (N-1)*d_min = " << (n_ - 1) * min_spacing_
       << " m exceeds aperture D = " << aperture_ << " m";
    throw InvalidArgument(os.str());
  }
  if (carrier_hz) {
    const double product = *carrier_hz * wavelength_;
    if (std::abs(product - kSpeedOfLight) > 1e-6 * kSpeedOfLight)
      throw InvalidArgument("wavelength * carrier_freq must equal c");
  }
}

ArrayConfig ArrayConfig::from_carrier(int n_antennas, double aperture_m,
                                      double carrier_hz, double min_spacing_m) {
  if (!(carrier_hz > 0.0)) throw InvalidArgument("carrier_freq must be > 0");
  return ArrayConfig(n_antennas, aperture_m, kSpeedOfLight / carrier_hz,
                     min_spacing_m, carrier_hz);
}

PositionVector::PositionVector(std::vector<double> coords)
    : coords_(std::move(coords)) {
  for (double c : coords_)
    if (!std::isfinite(c)) throw InvalidArgument("position must be finite");
  if (!std::is_sorted(coords_.begin(), coords_.end()))
    throw InvalidArgument("positions must be in ascending order");
}

Eigen::VectorXd PositionVector::to_eigen() const {
  return Eigen::Map<const Eigen::VectorXd>(coords_.data(),
                                           static_cast<Eigen::Index>(coords_.size()));
}

WeightVector WeightVector::from_complex(const Eigen::VectorXcd& w) {
  std::vector<double> phases(static_cast<std::size_t>(w.size()));
  for (Eigen::Index n = 0; n < w.size(); ++n)
    phases[static_cast<std::size_t>(n)] = std::arg(w(n));
  return WeightVector(std::move(phases));
}

cdouble WeightVector::weight(std::size_t n) const {
  return std::polar(1.0 / std::sqrt(static_cast<double>(phases_.size())),
                    phases_[n]);
}

Eigen::VectorXcd WeightVector::to_eigen() const {
  Eigen::VectorXcd w(static_cast<Eigen::Index>(phases_.size()));
  for (std::size_t n = 0; n < phases_.size(); ++n)
    w(static_cast<Eigen::Index>(n)) = weight(n);
  return w;
}

CoverageSpec::CoverageSpec(std::vector<AngularRegion> regions,
                           std::vector<int> samples)
    : regions_(std::move(regions)), samples_(std::move(samples)) {
  if (regions_.empty()) throw InvalidArgument("coverage needs at least one region");
  if (regions_.size() != samples_.size())
    throw InvalidArgument("one sample count per region is required");
  for (std::size_t k = 0; k < regions_.size(); ++k) {
    const auto& r = regions_[k];
    if (!(r.min_rad >= 0.0) || !(r.max_rad <= kPi) || !(r.min_rad <= r.max_rad))
      throw InvalidArgument("region " + std::to_string(k + 1) +
                            " must satisfy 0 <= min <= max <= pi");
    if (r.min_rad == r.max_rad) {
      if (samples_[k] != 1)
        throw InvalidArgument("point region " + std::to_string(k + 1) +
                              " takes exactly one sample");
    } else if (samples_[k] < 2) {
      throw InvalidArgument("region " + std::to_string(k + 1) +
                            " needs at least 2 samples");
    }
  }
  std::vector<std::size_t> order(regions_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return regions_[a].min_rad < regions_[b].min_rad;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (regions_[order[i]].min_rad <= regions_[order[i - 1]].max_rad)
      throw InvalidArgument("regions " + std::to_string(order[i - 1] + 1) +
                            " and " + std::to_string(order[i] + 1) +
                            " are not disjoint");
  }
}

int default_samples(double width_rad) {
  // Tolerance absorbs the degree/radian round trip on integer widths.
  const double width_deg = rad_to_deg(width_rad);
  return std::max(2, static_cast<int>(std::ceil(width_deg - 1e-9)) + 1);
}

CoverageSpec CoverageSpec::with_default_density(std::vector<AngularRegion> regions) {
  std::vector<int> samples;
  samples.reserve(regions.size());
  for (const auto& r : regions)
    samples.push_back(r.min_rad == r.max_rad ? 1 : default_samples(r.max_rad - r.min_rad));
  return CoverageSpec(std::move(regions), std::move(samples));
}

CoverageSpec CoverageSpec::point(double angle_rad) {
  return CoverageSpec({{angle_rad, angle_rad}}, {1});
}

SampleGrid SampleGrid::from_angles(std::vector<double> angles) {
  SampleGrid g;
  g.region_index.assign(angles.size(), 0);
  g.angles = std::move(angles);
  return g;
}

SampleGrid discretize(const CoverageSpec& spec) {
  SampleGrid grid;
  for (std::size_t k = 0; k < spec.num_regions(); ++k) {
    const auto [lo, hi] = spec.regions()[k];
    const int count = spec.samples()[k];
    const double width = hi - lo;
    for (int l = 0; l < count; ++l) {
      double theta = lo;
      if (l == count - 1)
        theta = hi;
      else if (l > 0)
        theta = lo + width * static_cast<double>(l) / static_cast<double>(count - 1);
      grid.angles.push_back(theta);
      grid.region_index.push_back(static_cast<int>(k));
    }
  }
  return grid;
}

Eigen::VectorXcd steering_vector(const PositionVector& x, double theta,
                                 double wavelength) {
  const double alpha = 2.0 * kPi / wavelength * std::cos(theta);
  Eigen::VectorXcd a(static_cast<Eigen::Index>(x.size()));
  for (std::size_t n = 0; n < x.size(); ++n)
    a(static_cast<Eigen::Index>(n)) = std::polar(1.0, alpha * x[n]);
  return a;
}

double beam_gain(const WeightVector& w, const PositionVector& x, double theta,
                 double wavelength) {
  return std::norm(w.to_eigen().dot(steering_vector(x, theta, wavelength)));
}

std::vector<double> beam_gains(const WeightVector& w, const PositionVector& x,
                               std::span<const double> angles,
                               double wavelength) {
  std::vector<double> gains(angles.size());
  kernels::beam_gains(w.to_eigen(), x.span(), angles, wavelength, gains);
  return gains;
}

double min_gain(const WeightVector& w, const PositionVector& x,
                const SampleGrid& grid, double wavelength) {
  const auto gains = beam_gains(w, x, grid.angles, wavelength);
  return *std::min_element(gains.begin(), gains.end());
}

std::string FeasibilityReport::describe() const {
  if (feasible) return "feasible";
  std::ostringstream os;
  for (const auto& v : violations) {
    switch (v.kind) {
      case ViolationKind::LowerBox: os << "x_" << v.index + 1 << " < 0"; break;
      case ViolationKind::UpperBox: os << "x_" << v.index + 1 << " > D"; break;
      case ViolationKind::Spacing:
        os << "x_" << v.index + 1 << " - x_" << v.index << " < d_min";
        break;
      case ViolationKind::Size: os << "wrong number of antennas"; break;
    }
    os << " (slack " << v.slack << "); ";
  }
  return os.str();
}

FeasibilityReport is_feasible(const PositionVector& x, const ArrayConfig& cfg) {
  FeasibilityReport report;
  auto flag = [&](ViolationKind kind, std::size_t index, double slack) {
    report.feasible = false;
    report.violations.push_back({kind, index, slack});
  };
  if (x.size() != static_cast<std::size_t>(cfg.n_antennas())) {
    flag(ViolationKind::Size, 0,
         static_cast<double>(x.size()) - cfg.n_antennas());
    return report;
  }
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (x[n] < -kPositionTol) flag(ViolationKind::LowerBox, n, x[n]);
    if (x[n] > cfg.aperture() + kPositionTol)
      flag(ViolationKind::UpperBox, n, cfg.aperture() - x[n]);
    if (n > 0) {
      const double slack = x[n] - x[n - 1] - cfg.min_spacing();
      if (slack < -kPositionTol) flag(ViolationKind::Spacing, n, slack);
    }
  }
  return report;
}

}  // namespace macover
