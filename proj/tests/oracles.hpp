#pragma once

// Brute-force references used by the tests and the acceptance binary. None of
// them call into the library's numerics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg(double d) { return d * kPi / 180.0; }

/// L uniformly spaced angles from lo to hi degrees, endpoints included.
inline std::vector<double> angles_deg(double lo, double hi, int count) {
  std::vector<double> out;
  for (int l = 0; l < count; ++l)
    out.push_back(deg(count == 1 ? lo : lo + (hi - lo) * l / (count - 1)));
  return out;
}

/// |sum_n (1/sqrt N) e^{j(2pi/lambda x_n cos th - phi_n)}|^2
inline double gain(const std::vector<double>& phases, const std::vector<double>& x,
                   double theta, double lambda) {
  std::complex<double> acc = 0.0;
  const double k = 2.0 * kPi / lambda * std::cos(theta);
  for (std::size_t n = 0; n < x.size(); ++n) acc += std::polar(1.0, k * x[n] - phases[n]);
  return std::norm(acc) / static_cast<double>(x.size());
}

/// (1/N) sum_{p,q} cos(alpha (x_p - x_q) - (phi_p - phi_q))
inline double gain_cosine_sum(const std::vector<double>& phases, const std::vector<double>& x,
                              double theta, double lambda) {
  const double alpha = 2.0 * kPi / lambda * std::cos(theta);
  double s = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p)
    for (std::size_t q = 0; q < x.size(); ++q)
      s += std::cos(alpha * (x[p] - x[q]) - (phases[p] - phases[q]));
  return s / static_cast<double>(x.size());
}

inline double min_gain(const std::vector<double>& phases, const std::vector<double>& x,
                       const std::vector<double>& angles, double lambda) {
  double m = std::numeric_limits<double>::infinity();
  for (double th : angles) m = std::min(m, gain(phases, x, th, lambda));
  return m;
}

/// Points lo, lo + step, ... not exceeding hi, plus hi itself.
inline std::vector<double> span_grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi - 1e-12) break;
    out.push_back(v);
  }
  out.push_back(hi);
  return out;
}

struct TwoElementOptimum {
  double value = -1.0;
  double spacing = 0.0;
  double phase = 0.0;
};

/// Two-element max-min gain. The gain 1 + cos(alpha dx - dphi) depends only
/// on the spacing dx in [dmin, aperture] and the phase difference, so the
/// search is a 2-D grid.
inline TwoElementOptimum two_element_max_min(const std::vector<double>& angles, double lambda,
                                             double aperture, double dmin, double dx_step,
                                             double dphi_step) {
  TwoElementOptimum best;
  std::vector<double> alpha;
  for (double th : angles) alpha.push_back(2.0 * kPi / lambda * std::cos(th));
  const int nphi = static_cast<int>(std::lround(2.0 * kPi / dphi_step));
  std::vector<double> ax(alpha.size());
  for (double dx : span_grid(dmin, aperture, dx_step)) {
    for (std::size_t l = 0; l < alpha.size(); ++l) ax[l] = alpha[l] * dx;
    for (int j = 0; j < nphi; ++j) {
      const double dphi = j * dphi_step;
      double m = std::numeric_limits<double>::infinity();
      for (double a : ax) {
        m = std::min(m, 1.0 + std::cos(a - dphi));
        if (m <= best.value) break;
      }
      if (m > best.value) best = {m, dx, dphi};
    }
  }
  return best;
}

/// Two-element max-min over the spacing alone, for a fixed phase difference.
inline double spacing_max_min(double dphi, const std::vector<double>& angles, double lambda,
                              double lo, double hi, double step) {
  double best = -1.0;
  for (double dx : span_grid(lo, hi, step)) {
    double m = std::numeric_limits<double>::infinity();
    for (double th : angles)
      m = std::min(m, 1.0 + std::cos(2.0 * kPi / lambda * std::cos(th) * dx - dphi));
    best = std::max(best, m);
  }
  return best;
}

struct Quadratic2 {
  double a11, a12, a22;   // symmetric A
  double b1, b2, c;

  double operator()(double x1, double x2) const {
    return a11 * x1 * x1 + 2.0 * a12 * x1 * x2 + a22 * x2 * x2 + b1 * x1 + b2 * x2 + c;
  }
};

/// max over 0 <= x1, x1 + dmin <= x2 <= upper of min_i q_i(x).
inline double qcqp_grid_2d(const std::vector<Quadratic2>& q, double upper, double dmin,
                           double step) {
  double best = -std::numeric_limits<double>::infinity();
  for (double x1 : span_grid(0.0, upper - dmin, step))
    for (double x2 : span_grid(x1 + dmin, upper, step)) {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& f : q) m = std::min(m, f(x1, x2));
      best = std::max(best, m);
    }
  return best;
}

// Closed-form SDP instances shared with tests/reference/sdp_reference.py.
// N = 3, L = 4, diag 1/3; gain vectors r_l and penalty vector s per index k.

inline Eigen::VectorXcd reference_gain_vector(int k, int l) {
  Eigen::VectorXcd r(3);
  for (int n = 0; n < 3; ++n)
    r(n) = {std::cos(0.7 * (k + 1) * (l + 1) + 1.3 * n),
            std::sin(1.9 * (k + 1) + 0.6 * l * n + 0.4 * n)};
  return r;
}

inline Eigen::VectorXcd reference_penalty_vector(int k) {
  Eigen::VectorXcd s(3);
  for (int n = 0; n < 3; ++n) s(n) = {std::cos(n + k), std::sin(2.0 * n - k)};
  return s.normalized();
}

}  // namespace oracle
