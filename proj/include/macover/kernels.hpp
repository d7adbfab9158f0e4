#pragma once

// Data-parallel inner loops. Every kernel writes each output element from a
// single thread and never reduces across threads, so the OpenMP variants are
// bit-identical to the serial references in kernels::serial.

#include <span>

#include <Eigen/Dense>

namespace macover::kernels {

/// gains[l] = |w^H a(x, angles[l])|^2 for complex weights w.
void beam_gains(const Eigen::VectorXcd& w, std::span<const double> x,
                std::span<const double> angles, double wavelength,
                std::span<double> gains);

/// Linear and constant terms of the quadratic cosine minorant for every
/// angle (the quadratic term is -alpha^2 W and needs no storage).
/// Column l of b and entry l of c/alpha belong to angles[l].
void surrogate_terms(std::span<const double> phases, std::span<const double> x,
                     std::span<const double> angles, double wavelength,
                     Eigen::MatrixXd& b, Eigen::VectorXd& c,
                     Eigen::VectorXd& alpha);

/// M += G^T diag(w) G, upper and lower triangles filled.
void add_weighted_gram(const Eigen::MatrixXd& g, const Eigen::VectorXd& w,
                       Eigen::MatrixXd& m);

/// Weighted barrier Hessian
///   H = sum_l outer_w[l] grad_l grad_l^T - sum_l curv_w[l] curv_l.
/// grads is (dim x L). curvs[l] is the second derivative of constraint l
/// restricted to the leading k x k block; constraints l >= curvs.size() are
/// affine.
void barrier_hessian(const Eigen::MatrixXd& grads,
                     std::span<const Eigen::MatrixXd> curvs,
                     const Eigen::VectorXd& outer_w, const Eigen::VectorXd& curv_w,
                     Eigen::MatrixXd& h);

namespace serial {

void beam_gains(const Eigen::VectorXcd& w, std::span<const double> x,
                std::span<const double> angles, double wavelength,
                std::span<double> gains);

void surrogate_terms(std::span<const double> phases, std::span<const double> x,
                     std::span<const double> angles, double wavelength,
                     Eigen::MatrixXd& b, Eigen::VectorXd& c,
                     Eigen::VectorXd& alpha);

void add_weighted_gram(const Eigen::MatrixXd& g, const Eigen::VectorXd& w,
                       Eigen::MatrixXd& m);

void barrier_hessian(const Eigen::MatrixXd& grads,
                     std::span<const Eigen::MatrixXd> curvs,
                     const Eigen::VectorXd& outer_w, const Eigen::VectorXd& curv_w,
                     Eigen::MatrixXd& h);

}  // namespace serial

}  // namespace macover::kernels
