#include "macover/kernels.hpp"

#include <cmath>
#include <complex>

#include "macover/array_model.hpp"

namespace macover::kernels {
namespace {

// Below these sizes the fork/join cost outweighs the loop body.
constexpr long kMinParallelAngles = 64;
constexpr long kMinParallelColumns = 16;

inline double gain_at(const Eigen::VectorXcd& w, std::span<const double> x,
                      double theta, double wavelength) {
  const double alpha = 2.0 * kPi / wavelength * std::cos(theta);
  cdouble acc{0.0, 0.0};
  for (std::size_t n = 0; n < x.size(); ++n)
    acc += std::conj(w(static_cast<Eigen::Index>(n))) * std::polar(1.0, alpha * x[n]);
  return std::norm(acc);
}

inline void surrogate_column(std::span<const double> phases,
                             std::span<const double> x, double theta,
                             double wavelength, Eigen::Index l,
                             Eigen::MatrixXd& b, Eigen::VectorXd& c,
                             Eigen::VectorXd& alpha) {
  const std::size_t n = x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double a = 2.0 * kPi / wavelength * std::cos(theta);
  double c_acc = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double b_acc = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      const double dx = x[p] - x[q];
      const double u0 = a * dx - (phases[p] - phases[q]);
      const double s = std::sin(u0);
      b_acc += a * dx - s;
      c_acc += std::cos(u0) + a * dx * s - 0.5 * (a * dx) * (a * dx);
    }
    b(static_cast<Eigen::Index>(p), l) = 2.0 * a * inv_n * b_acc;
  }
  c(l) = inv_n * c_acc;
  alpha(l) = a;
}

inline double gram_entry(const Eigen::MatrixXd& g, const Eigen::VectorXd& w,
                         Eigen::Index i, Eigen::Index j) {
  double acc = 0.0;
  for (Eigen::Index l = 0; l < g.rows(); ++l) acc += g(l, i) * w(l) * g(l, j);
  return acc;
}

inline double hessian_entry(const Eigen::MatrixXd& grads,
                            std::span<const Eigen::MatrixXd> curvs,
                            const Eigen::VectorXd& outer_w,
                            const Eigen::VectorXd& curv_w, Eigen::Index a,
                            Eigen::Index b) {
  double acc = 0.0;
  for (Eigen::Index l = 0; l < grads.cols(); ++l)
    acc += outer_w(l) * grads(a, l) * grads(b, l);
  if (!curvs.empty() && a < curvs[0].rows() && b < curvs[0].rows()) {
    for (std::size_t l = 0; l < curvs.size(); ++l)
      acc -= curv_w(static_cast<Eigen::Index>(l)) * curvs[l](a, b);
  }
  return acc;
}

}  // namespace

void beam_gains(const Eigen::VectorXcd& w, std::span<const double> x,
                std::span<const double> angles, double wavelength,
                std::span<double> gains) {
  const long count = static_cast<long>(angles.size());
#pragma omp parallel for schedule(static) if (count >= kMinParallelAngles)
  for (long l = 0; l < count; ++l)
    gains[static_cast<std::size_t>(l)] =
        gain_at(w, x, angles[static_cast<std::size_t>(l)], wavelength);
}

void surrogate_terms(std::span<const double> phases, std::span<const double> x,
                     std::span<const double> angles, double wavelength,
                     Eigen::MatrixXd& b, Eigen::VectorXd& c,
                     Eigen::VectorXd& alpha) {
  const long count = static_cast<long>(angles.size());
  b.resize(static_cast<Eigen::Index>(x.size()), count);
  c.resize(count);
  alpha.resize(count);
#pragma omp parallel for schedule(static) if (count >= kMinParallelAngles)
  for (long l = 0; l < count; ++l)
    surrogate_column(phases, x, angles[static_cast<std::size_t>(l)], wavelength,
                     l, b, c, alpha);
}

void add_weighted_gram(const Eigen::MatrixXd& g, const Eigen::VectorXd& w,
                       Eigen::MatrixXd& m) {
  const long cols = static_cast<long>(g.cols());
#pragma omp parallel for schedule(dynamic, 4) if (cols >= kMinParallelColumns)
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i <= j; ++i) {
      const double v = gram_entry(g, w, i, j);
      m(i, j) += v;
      if (i != j) m(j, i) += v;
    }
  }
}

void barrier_hessian(const Eigen::MatrixXd& grads,
                     std::span<const Eigen::MatrixXd> curvs,
                     const Eigen::VectorXd& outer_w, const Eigen::VectorXd& curv_w,
                     Eigen::MatrixXd& h) {
  const long dim = static_cast<long>(grads.rows());
  h.resize(dim, dim);
#pragma omp parallel for schedule(dynamic, 1) if (dim >= kMinParallelColumns)
  for (long a = 0; a < dim; ++a)
    for (long b = 0; b <= a; ++b) {
      const double v = hessian_entry(grads, curvs, outer_w, curv_w, a, b);
      h(a, b) = v;
      h(b, a) = v;
    }
}

namespace serial {

void beam_gains(const Eigen::VectorXcd& w, std::span<const double> x,
                std::span<const double> angles, double wavelength,
                std::span<double> gains) {
  for (std::size_t l = 0; l < angles.size(); ++l)
    gains[l] = gain_at(w, x, angles[l], wavelength);
}

void surrogate_terms(std::span<const double> phases, std::span<const double> x,
                     std::span<const double> angles, double wavelength,
                     Eigen::MatrixXd& b, Eigen::VectorXd& c,
                     Eigen::VectorXd& alpha) {
  const auto count = static_cast<Eigen::Index>(angles.size());
  b.resize(static_cast<Eigen::Index>(x.size()), count);
  c.resize(count);
  alpha.resize(count);
  for (Eigen::Index l = 0; l < count; ++l)
    surrogate_column(phases, x, angles[static_cast<std::size_t>(l)], wavelength,
                     l, b, c, alpha);
}

void add_weighted_gram(const Eigen::MatrixXd& g, const Eigen::VectorXd& w,
                       Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = gram_entry(g, w, i, j);
      m(i, j) += v;
      if (i != j) m(j, i) += v;
    }
}

void barrier_hessian(const Eigen::MatrixXd& grads,
                     std::span<const Eigen::MatrixXd> curvs,
                     const Eigen::VectorXd& outer_w, const Eigen::VectorXd& curv_w,
                     Eigen::MatrixXd& h) {
  const Eigen::Index dim = grads.rows();
  h.resize(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = hessian_entry(grads, curvs, outer_w, curv_w, a, b);
      h(a, b) = v;
      h(b, a) = v;
    }
}

}  // namespace serial
}  // namespace macover::kernels
