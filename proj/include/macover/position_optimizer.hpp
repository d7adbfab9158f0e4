#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "macover/array_model.hpp"
#include "macover/convex.hpp"

namespace macover {

/// Concave quadratic lower bound x^T A x + b^T x + c of the beam gain toward
/// one angle, tight at the anchor positions.
struct QuadraticSurrogate {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double c = 0.0;
  double alpha = 0.0;   // (2 pi / lambda) cos(theta)
  PositionVector anchor;

  double evaluate(const Eigen::VectorXd& x) const { return x.dot(a * x) + b.dot(x) + c; }
};

/// g(z | z0) = cos z0 - sin z0 (z - z0) - (z - z0)^2 / 2  <=  cos z.
double cosine_minorant(double z, double z0);

/// The centering matrix I - (1/N) 1 1^T.
Eigen::MatrixXd centering_matrix(int n);

QuadraticSurrogate build_surrogate(const WeightVector& w, const PositionVector& anchor,
                                   double theta, double wavelength);

/// One surrogate per angle; the per-angle terms are computed in parallel.
std::vector<QuadraticSurrogate> build_surrogates(const WeightVector& w,
                                                 const PositionVector& anchor,
                                                 std::span<const double> angles,
                                                 double wavelength);

/// True iff the largest eigenvalue of A is at most 1e-9.
bool certify_nsd(const QuadraticSurrogate& s);

/// Smallest adjustment that restores box and spacing feasibility after a
/// solve that satisfied them only to solver tolerance.
PositionVector project_feasible(const Eigen::VectorXd& x, const ArrayConfig& cfg);

struct PositionTraceRecord {
  int iteration = 0;
  double surrogate_t = 0.0;   // optimum of the convex subproblem (NaN at 0)
  double min_gain = 0.0;      // true min gain at the iterate
};

struct PositionOptions {
  double sca_tol = 0.01;
  int max_iter = 100;
  SolverTolerances solver;
};

struct PositionResult {
  PositionVector x;
  int iterations = 0;
  bool ascent_guard = false;   // an iterate lowered the min gain and was discarded
  std::vector<PositionTraceRecord> trace;
};

/// SCA over antenna positions for fixed weights. The subproblems are solved
/// in wavelength units. Throws InvalidArgument if x_init is infeasible and
/// SolverError if a subproblem fails.
PositionResult sca_positions(const WeightVector& w, const PositionVector& x_init,
                             const SampleGrid& grid, const ArrayConfig& cfg,
                             const PositionOptions& opt = {});

}  // namespace macover
