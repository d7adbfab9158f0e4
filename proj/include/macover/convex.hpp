#pragma once

// Small dense convex solvers used by the SCA loops.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace macover {

enum class SolveStatus { Optimal, MaxIter, Infeasible, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolverTolerances {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 200;
};

/// Outcome of one solve. kkt_residuals holds, in order, the primal
/// infeasibility, the dual infeasibility (stationarity for the QCQP) and the
/// largest complementarity product.
struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  std::vector<double> kkt_residuals;

  bool ok() const { return status == SolveStatus::Optimal; }
};

/// Raised by the SCA loops when an inner solve does not reach optimality.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// maximize  t_coeff * t + <C, V>
/// s.t.      Tr(R_l V) >= t   for every gain matrix R_l
///           V(n, n) = diag_value
///           V Hermitian PSD
/// <A, B> denotes Re Tr(A^H B).
struct SdpProblem {
  int dim = 0;
  double t_coeff = 1.0;
  Eigen::MatrixXcd objective;   // C, dim x dim Hermitian (may be empty = 0)
  std::vector<Eigen::MatrixXcd> gain_constraints;
  double diag_value = 0.0;

  /// Throws InvalidArgument on shape or Hermitian violations.
  void validate() const;
};

struct SdpSolution {
  double t = 0.0;
  Eigen::MatrixXcd v;
  SolveReport report;
};

SdpSolution solve_sdp(const SdpProblem& p, const SolverTolerances& tol = {});

struct QuadraticConstraint {
  Eigen::MatrixXd a;   // symmetric negative semidefinite
  Eigen::VectorXd b;
  double c = 0.0;

  double evaluate(const Eigen::VectorXd& x) const { return x.dot(a * x) + b.dot(x) + c; }
};

/// maximize  t
/// s.t.      x^T A_l x + b_l^T x + c_l >= t
///           0 <= x_n <= upper
///           x_n - x_{n-1} >= min_spacing
struct QcqpProblem {
  int dim = 0;
  std::vector<QuadraticConstraint> constraints;
  double upper = 0.0;
  double min_spacing = 0.0;

  /// Throws InvalidArgument on shape errors, non-NSD A (max eigenvalue above
  /// 1e-9) or an empty constraint list (t would be unbounded).
  void validate() const;
};

struct QcqpSolution {
  double t = 0.0;
  Eigen::VectorXd x;
  SolveReport report;
};

/// start, when non-empty, is a preferred starting point; it is pulled toward
/// the interior before use so any feasible point is acceptable.
QcqpSolution solve_qcqp(const QcqpProblem& p, const SolverTolerances& tol = {},
                        const Eigen::VectorXd& start = {});

// Plain-text problem dumps for offline cross-checking. Layout: a keyword
// header line with dimensions, then each matrix row-major, one row per line,
// 17 significant digits. Complex entries are written as "re im" pairs.
void write_problem(std::ostream& os, const SdpProblem& p);
void write_problem(std::ostream& os, const QcqpProblem& p);
SdpProblem read_sdp_problem(std::istream& is);
QcqpProblem read_qcqp_problem(std::istream& is);

}  // namespace macover
