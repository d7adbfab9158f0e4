#include "macover/position_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "macover/kernels.hpp"
#include "macover/linalg.hpp"

namespace macover {

double cosine_minorant(double z, double z0) {
  const double d = z - z0;
  return std::cos(z0) - std::sin(z0) * d - 0.5 * d * d;
}

Eigen::MatrixXd centering_matrix(int n) {
  return Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
}

std::vector<QuadraticSurrogate> build_surrogates(const WeightVector& w,
                                                 const PositionVector& anchor,
                                                 std::span<const double> angles,
                                                 double wavelength) {
  if (w.size() != anchor.size()) throw InvalidArgument("weight and position sizes differ");
  const int n = static_cast<int>(anchor.size());
  Eigen::MatrixXd b;
  Eigen::VectorXd c, alpha;
  kernels::surrogate_terms(w.phases(), anchor.span(), angles, wavelength, b, c, alpha);
  const Eigen::MatrixXd wc = centering_matrix(n);
  std::vector<QuadraticSurrogate> out(angles.size());
  for (std::size_t l = 0; l < angles.size(); ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    auto& s = out[l];
    s.alpha = alpha(li);
    s.a = -(s.alpha * s.alpha) * wc;
    s.b = b.col(li);
    s.c = c(li);
    s.anchor = anchor;
  }
  return out;
}

QuadraticSurrogate build_surrogate(const WeightVector& w, const PositionVector& anchor,
                                   double theta, double wavelength) {
  const double angles[] = {theta};
  return build_surrogates(w, anchor, angles, wavelength).front();
}

bool certify_nsd(const QuadraticSurrogate& s) { return max_eigenvalue(s.a) <= 1e-9; }

PositionVector project_feasible(const Eigen::VectorXd& x, const ArrayConfig& cfg) {
  const Eigen::Index n = x.size();
  const double d = cfg.min_spacing();
  std::vector<double> y(x.data(), x.data() + n);
  if (n == 0) return PositionVector(y);
  y[0] = std::clamp(y[0], 0.0, cfg.aperture());
  for (Eigen::Index i = 1; i < n; ++i)
    y[static_cast<std::size_t>(i)] = std::max(y[static_cast<std::size_t>(i)],
                                              y[static_cast<std::size_t>(i - 1)] + d);
  y.back() = std::min(y.back(), cfg.aperture());
  for (Eigen::Index i = n - 2; i >= 0; --i)
    y[static_cast<std::size_t>(i)] = std::min(y[static_cast<std::size_t>(i)],
                                              y[static_cast<std::size_t>(i + 1)] - d);
  return PositionVector(std::move(y));
}

PositionResult sca_positions(const WeightVector& w, const PositionVector& x_init,
                             const SampleGrid& grid, const ArrayConfig& cfg,
                             const PositionOptions& opt) {
  if (!(opt.sca_tol > 0.0)) throw InvalidArgument("sca_tol must be > 0");
  if (grid.size() == 0) throw InvalidArgument("empty sample grid");
  if (w.size() != x_init.size()) throw InvalidArgument("weight and position sizes differ");
  const FeasibilityReport feas = is_feasible(x_init, cfg);
  if (!feas.feasible)
    throw InvalidArgument("initial positions infeasible: " + feas.describe());

  const double lambda = cfg.wavelength();
  PositionResult res;
  res.x = x_init;
  double gain = min_gain(w, x_init, grid, lambda);
  res.trace.push_back({0, std::numeric_limits<double>::quiet_NaN(), gain});
  const int n = static_cast<int>(x_init.size());
  if (n == 1) return res;

  QcqpProblem prob;
  prob.dim = n;
  prob.upper = cfg.aperture() / lambda;
  prob.min_spacing = cfg.min_spacing() / lambda;

  for (int it = 1; it <= opt.max_iter; ++it) {
    std::vector<double> scaled = res.x.coords();
    for (double& v : scaled) v /= lambda;
    const PositionVector anchor(std::move(scaled));
    auto surrogates = build_surrogates(w, anchor, grid.angles, 1.0);
    prob.constraints.clear();
    prob.constraints.reserve(surrogates.size());
    for (std::size_t l = 0; l < surrogates.size(); ++l) {
      if (!certify_nsd(surrogates[l]))
        throw SolverError("surrogate " + std::to_string(l) + " is not concave", {});
      prob.constraints.push_back({std::move(surrogates[l].a), std::move(surrogates[l].b),
                                  surrogates[l].c});
    }
    const QcqpSolution sol = solve_qcqp(prob, opt.solver, anchor.to_eigen());
    if (!sol.report.ok())
      throw SolverError("position QCQP failed at SCA iteration " + std::to_string(it) + ": " +
                            to_string(sol.report.status),
                        sol.report);
    res.iterations = it;
    // The surrogates are tight at the anchor, so an optimum no better than
    // the current gain means the anchor already solves the subproblem.
    if (sol.t - gain <= opt.solver.gap_tol * (1.0 + std::abs(gain))) break;
    const PositionVector next = project_feasible(lambda * sol.x, cfg);
    const double next_gain = min_gain(w, next, grid, lambda);
    if (next_gain <= gain) {
      res.ascent_guard = gain - next_gain > 1e-9;
      break;
    }
    res.trace.push_back({it, sol.t, next_gain});
    const double improvement = next_gain - gain;
    res.x = next;
    gain = next_gain;
    if (improvement < opt.sca_tol) break;
  }
  return res;
}

}  // namespace macover
