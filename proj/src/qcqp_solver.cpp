// Log-barrier method for the concave-quadratic max-min program.
//
// Variables z = (x, t). Every constraint is written as a slack s_i(z) > 0:
//   quadratic   s_l = x^T A_l x + b_l^T x + c_l - t   (concave in z)
//   box         x_n,  upper - x_n
//   spacing     x_n - x_{n-1} - min_spacing
// Classic barrier path following. After each centring step multipliers are
// recovered from the active constraints to certify the point.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "macover/array_model.hpp"
#include "macover/convex.hpp"
#include "macover/kernels.hpp"
#include "macover/linalg.hpp"

namespace macover {

void QcqpProblem::validate() const {
  if (dim < 1) throw InvalidArgument("qcqp: dim must be >= 1");
  if (constraints.empty())
    throw InvalidArgument("qcqp: no quadratic constraints, objective is unbounded");
  if (!(upper > 0.0)) throw InvalidArgument("qcqp: upper bound must be > 0");
  if (!(min_spacing >= 0.0)) throw InvalidArgument("qcqp: min_spacing must be >= 0");
  if ((dim - 1) * min_spacing > upper + kPositionTol)
    throw InvalidArgument("qcqp: box and spacing constraints are inconsistent");
  for (std::size_t l = 0; l < constraints.size(); ++l) {
    const auto& q = constraints[l];
    if (q.a.rows() != dim || q.a.cols() != dim || q.b.size() != dim)
      throw InvalidArgument("qcqp: constraint " + std::to_string(l) + " has wrong shape");
    if ((q.a - q.a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidArgument("qcqp: constraint " + std::to_string(l) + " is not symmetric");
    if (max_eigenvalue(q.a) > 1e-9)
      throw InvalidArgument("qcqp: constraint " + std::to_string(l) +
                            " is not negative semidefinite");
  }
}

namespace {

class Barrier {
 public:
  explicit Barrier(const QcqpProblem& p)
      : p_(p),
        n_(p.dim),
        nq_(static_cast<Eigen::Index>(p.constraints.size())),
        count_(nq_ + 2 * n_ + (n_ - 1)) {
    curvs_.reserve(p.constraints.size());
    for (const auto& q : p.constraints) curvs_.push_back(2.0 * q.a);
  }

  Eigen::Index count() const { return count_; }

  Eigen::VectorXd slacks(const Eigen::VectorXd& z) const {
    Eigen::VectorXd s(count_);
    const Eigen::VectorXd x = z.head(n_);
    const double t = z(n_);
    for (Eigen::Index l = 0; l < nq_; ++l)
      s(l) = p_.constraints[static_cast<std::size_t>(l)].evaluate(x) - t;
    for (Eigen::Index n = 0; n < n_; ++n) {
      s(nq_ + n) = x(n);
      s(nq_ + n_ + n) = p_.upper - x(n);
    }
    for (Eigen::Index n = 1; n < n_; ++n)
      s(nq_ + 2 * n_ + n - 1) = x(n) - x(n - 1) - p_.min_spacing;
    return s;
  }

  // Columns are gradients of each slack with respect to z.
  Eigen::MatrixXd gradients(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_ + 1, count_);
    const Eigen::VectorXd x = z.head(n_);
    for (Eigen::Index l = 0; l < nq_; ++l) {
      const auto& q = p_.constraints[static_cast<std::size_t>(l)];
      g.col(l).head(n_) = 2.0 * q.a * x + q.b;
      g(n_, l) = -1.0;
    }
    for (Eigen::Index n = 0; n < n_; ++n) {
      g(n, nq_ + n) = 1.0;
      g(n, nq_ + n_ + n) = -1.0;
    }
    for (Eigen::Index n = 1; n < n_; ++n) {
      g(n, nq_ + 2 * n_ + n - 1) = 1.0;
      g(n - 1, nq_ + 2 * n_ + n - 1) = -1.0;
    }
    return g;
  }

  const std::vector<Eigen::MatrixXd>& curvatures() const { return curvs_; }

 private:
  const QcqpProblem& p_;
  Eigen::Index n_;
  Eigen::Index nq_;
  Eigen::Index count_;
  std::vector<Eigen::MatrixXd> curvs_;
};

Eigen::VectorXd interior_center(const QcqpProblem& p, double& margin) {
  const auto n = p.dim;
  margin = (p.upper - (n - 1) * p.min_spacing) / (n + 1);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = (i + 1) * margin + i * p.min_spacing;
  return x;
}

double min_quadratic(const QcqpProblem& p, const Eigen::VectorXd& x) {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& q : p.constraints) t = std::min(t, q.evaluate(x));
  return t;
}

// Multipliers recovered from a near-optimal point: nonnegative least squares
// on the stationarity condition  e_t + sum lambda_i grad s_i = 0  over the
// constraints the barrier path marks as active.
struct Certificate {
  bool valid = false;
  Eigen::VectorXd lambda;
  double stationarity = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double complementarity = std::numeric_limits<double>::infinity();

  double score() const { return std::max(stationarity, gap); }
  bool worse_than(const Certificate& other) const {
    return other.valid && score() > other.score();
  }
};

Certificate certify(const Eigen::MatrixXd& gmat, const Eigen::VectorXd& s,
                    const Eigen::VectorXd& path_lambda) {
  constexpr double kActiveRatio = 1e-6;
  const Eigen::Index dim = gmat.rows();
  const Eigen::Index m = gmat.cols();
  Eigen::VectorXd target = Eigen::VectorXd::Zero(dim);
  target(dim - 1) = 1.0;

  const double cutoff = kActiveRatio * path_lambda.maxCoeff();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < m; ++i)
    if (path_lambda(i) >= cutoff) active.push_back(i);

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
  while (!active.empty()) {
    Eigen::MatrixXd ga(dim, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k)
      ga.col(static_cast<Eigen::Index>(k)) = gmat.col(active[k]);
    const Eigen::VectorXd la = ga.completeOrthogonalDecomposition().solve(-target);
    Eigen::Index worst = 0;
    const double most_negative = la.minCoeff(&worst);
    if (most_negative >= 0.0) {
      lam.setZero();
      for (std::size_t k = 0; k < active.size(); ++k)
        lam(active[k]) = la(static_cast<Eigen::Index>(k));
      break;
    }
    active.erase(active.begin() + worst);
  }

  auto build = [&](Eigen::VectorXd l) {
    Certificate c;
    c.valid = true;
    const Eigen::VectorXd residual = gmat * l + target;
    const Eigen::VectorXd products = l.cwiseProduct(s.cwiseMax(0.0));
    // Relative to the size of the terms that cancel.
    const double scale = 1.0 + (gmat.cwiseAbs() * l.cwiseAbs()).maxCoeff();
    c.stationarity = residual.cwiseAbs().maxCoeff() / scale;
    c.gap = products.sum();
    c.complementarity = products.maxCoeff();
    c.lambda = std::move(l);
    return c;
  };
  Certificate nnls = build(std::move(lam));
  Certificate path = build(path_lambda);
  return path.score() < nnls.score() ? path : nnls;
}

// Newton steps on the KKT equations with an active set held as equalities:
//   e_t + G_A lambda_A = 0,  s_A(z) = 0.
// Constraints whose multiplier turns negative are released and the solve is
// repeated from z0. Returns false if no consistent active set is found.
bool polish(const Barrier& barrier, const Eigen::VectorXd& z0, const Certificate& cert,
            Eigen::VectorXd& z_out, Eigen::VectorXd& lambda_out) {
  constexpr int kSteps = 4;
  const auto dim = z0.size();
  // At most dim multipliers can be independent; keep the largest ones.
  constexpr double kCandidateRatio = 1e-3;
  std::vector<Eigen::Index> active;
  const double cutoff = kCandidateRatio * cert.lambda.maxCoeff();
  for (Eigen::Index i = 0; i < cert.lambda.size(); ++i)
    if (cert.lambda(i) > 0.0 && cert.lambda(i) >= cutoff) active.push_back(i);
  std::sort(active.begin(), active.end(),
            [&](Eigen::Index a, Eigen::Index b) { return cert.lambda(a) > cert.lambda(b); });
  if (static_cast<Eigen::Index>(active.size()) > dim) active.resize(static_cast<std::size_t>(dim));
  const auto nq = static_cast<Eigen::Index>(barrier.curvatures().size());
  const Eigen::Index nx = dim - 1;

  while (!active.empty()) {
    const auto na = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd z = z0;
    Eigen::VectorXd lam(na);
    for (Eigen::Index k = 0; k < na; ++k)
      lam(k) = cert.lambda(active[static_cast<std::size_t>(k)]);
    for (int step = 0; step < kSteps; ++step) {
      const Eigen::MatrixXd gmat = barrier.gradients(z);
      const Eigen::VectorXd s = barrier.slacks(z);
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim + na, dim + na);
      Eigen::VectorXd rhs(dim + na);
      rhs.head(dim).setZero();
      rhs(dim - 1) = 1.0;
      for (Eigen::Index k = 0; k < na; ++k) {
        const Eigen::Index i = active[static_cast<std::size_t>(k)];
        kkt.block(0, dim + k, dim, 1) = gmat.col(i);
        kkt.block(dim + k, 0, 1, dim) = gmat.col(i).transpose();
        rhs.head(dim) += lam(k) * gmat.col(i);
        rhs(dim + k) = s(i);
        if (i < nq)
          kkt.topLeftCorner(nx, nx) += lam(k) * barrier.curvatures()[static_cast<std::size_t>(i)];
      }
      const Eigen::VectorXd delta = kkt.completeOrthogonalDecomposition().solve(-rhs);
      if (!delta.allFinite()) return false;
      z += delta.head(dim);
      lam += delta.tail(na);
    }
    Eigen::Index worst = 0;
    if (lam.minCoeff(&worst) >= 0.0) {
      z_out = z;
      lambda_out = Eigen::VectorXd::Zero(cert.lambda.size());
      for (Eigen::Index k = 0; k < na; ++k) lambda_out(active[static_cast<std::size_t>(k)]) = lam(k);
      return true;
    }
    active.erase(active.begin() + worst);
  }
  return false;
}

}  // namespace

QcqpSolution solve_qcqp(const QcqpProblem& p, const SolverTolerances& tol,
                        const Eigen::VectorXd& start) {
  p.validate();
  QcqpSolution sol;
  SolveReport& rep = sol.report;
  const auto n = static_cast<Eigen::Index>(p.dim);

  double margin = 0.0;
  const Eigen::VectorXd center = interior_center(p, margin);
  if (margin <= 1e-12 * std::max(1.0, p.upper)) {
    // The feasible set is a single point (or numerically so).
    sol.x = center;
    sol.t = min_quadratic(p, center);
    rep.status = SolveStatus::Optimal;
    rep.objective = sol.t;
    rep.kkt_residuals = {0.0, 0.0, 0.0};
    return sol;
  }

  const Barrier barrier(p);
  const Eigen::Index m = barrier.count();
  const auto nq = static_cast<Eigen::Index>(p.constraints.size());

  Eigen::VectorXd z(n + 1);
  z.head(n) = center;
  if (start.size() == n) {
    constexpr double kPull = 0.05;
    Eigen::VectorXd candidate(n + 1);
    candidate.head(n) = (1.0 - kPull) * start + kPull * center;
    candidate(n) = 0.0;
    if (barrier.slacks(candidate).tail(m - nq).minCoeff() > 0.0)
      z.head(n) = candidate.head(n);
  }
  z(n) = min_quadratic(p, z.head(n)) - 1.0;

  // Barrier path: for increasing tau minimise  -tau t - sum log s_i(z)
  // by damped Newton. The objective is self-concordant so backtracking on it
  // always makes progress. Multipliers on the path are 1 / (tau s_i).
  constexpr double kTauGrowth = 20.0;
  constexpr double kBacktrack = 0.5;
  constexpr double kArmijo = 0.25;
  constexpr double kNewtonTol = 1e-9;
  constexpr double kRoundoffDecrement = 1e-3;
  constexpr double kTauFloor = 1e-4;
  constexpr double kPolishGap = 1e-5;
  // Change of the barrier objective along dz. Slack increments are formed
  // directly (g^T dz + dx^T A dx) instead of differencing slacks, which keeps
  // the test meaningful when tau is large and slacks are tiny.
  auto phi_change = [&](const Eigen::VectorXd& ss, const Eigen::VectorXd& lin,
                        const Eigen::VectorXd& quad, double dt, double tau, double alpha,
                        double& out) {
    double acc = -tau * alpha * dt;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double ds = alpha * lin(i) + (i < nq ? alpha * alpha * quad(i) : 0.0);
      const double ratio = ds / ss(i);
      if (!(ratio > -1.0)) return false;
      acc -= std::log1p(ratio);
    }
    out = acc;
    return true;
  };

  Eigen::VectorXd s = barrier.slacks(z);
  double tau = static_cast<double>(m) / std::max(1.0, std::abs(z(n)));
  rep.status = SolveStatus::MaxIter;
  int iter = 0;
  bool failed = false;
  Certificate best;
  Eigen::VectorXd best_z = z;
  bool certified = false;
  auto try_certify = [&]() {
    const Certificate cert = certify(barrier.gradients(z), s, s.cwiseInverse() / tau);
    if (!cert.worse_than(best)) {
      best = cert;
      best_z = z;
    }
    certified = best.stationarity <= tol.feas_tol && best.gap <= tol.gap_tol;
    if (!certified && cert.stationarity <= kPolishGap && cert.gap <= kPolishGap) {
      Eigen::VectorXd zp, lp;
      if (!polish(barrier, z, cert, zp, lp)) return certified;
      const Eigen::VectorXd sp = barrier.slacks(zp);
      if (sp.allFinite() && sp.minCoeff() >= -0.1 * tol.feas_tol) {
        const Certificate cp = certify(barrier.gradients(zp), sp, lp);
        if (cp.stationarity <= tol.feas_tol && cp.gap <= tol.gap_tol) {
          best = cp;
          best_z = zp;
          certified = true;
        }
      }
    }
    return certified;
  };
  while (iter < tol.max_iter) {
    // Centre for the current tau.
    bool centred = false;
    double last_decrement = std::numeric_limits<double>::infinity();
    while (iter < tol.max_iter) {
      ++iter;
      const Eigen::MatrixXd gmat = barrier.gradients(z);
      const Eigen::VectorXd inv_s = s.cwiseInverse();
      Eigen::VectorXd grad = -(gmat * inv_s);
      grad(n) -= tau;
      Eigen::MatrixXd h;
      kernels::barrier_hessian(gmat, barrier.curvatures(), inv_s.cwiseAbs2(),
                               inv_s.head(nq), h);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      Eigen::VectorXd dz = -ldlt.solve(grad);
      // Translation-invariant surrogates leave the common-shift direction
      // curved only by the box terms; late on the path that is ~1e-18 of the
      // active curvature. A small shift keeps the factorization usable.
      for (double shift = 1e-14; (ldlt.info() != Eigen::Success || !dz.allFinite()) &&
                                 shift <= 1e-6;
           shift *= 100.0) {
        const double scale = h.diagonal().cwiseAbs().maxCoeff();
        ldlt.compute(h + Eigen::MatrixXd::Identity(h.rows(), h.cols()) * (shift * scale));
        dz = -ldlt.solve(grad);
      }
      if (ldlt.info() != Eigen::Success || !dz.allFinite()) {
        failed = true;
        break;
      }
      const double decrement = -grad.dot(dz);
      if (decrement / 2.0 <= kNewtonTol ||
          (decrement <= kRoundoffDecrement && decrement >= 0.5 * last_decrement)) {
        centred = true;
        break;
      }
      last_decrement = decrement;
      const Eigen::VectorXd lin = gmat.transpose() * dz;
      Eigen::VectorXd quad(nq);
      for (Eigen::Index l = 0; l < nq; ++l) {
        const auto& q = p.constraints[static_cast<std::size_t>(l)];
        quad(l) = dz.head(n).dot(q.a * dz.head(n));
      }
      double alpha = 1.0;
      bool accepted = false;
      for (int k = 0; k < 60; ++k, alpha *= kBacktrack) {
        double change = 0.0;
        if (phi_change(s, lin, quad, dz(n), tau, alpha, change) &&
            change <= -kArmijo * alpha * decrement) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // Round-off floor: the decrement can no longer be resolved.
        centred = decrement <= kRoundoffDecrement;
        if (!centred) failed = true;
        break;
      }
      z += alpha * dz;
      s = barrier.slacks(z);
      if (!(s.minCoeff() > 0.0)) {
        failed = true;
        break;
      }
      if (try_certify()) break;
    }
    if (failed) break;
    if (certified) {
      rep.status = SolveStatus::Optimal;
      break;
    }
    if (!centred) continue;
    // Past this point the path is below round-off; keep the best point.
    if (static_cast<double>(m) / tau < kTauFloor * tol.gap_tol) break;
    tau *= kTauGrowth;
  }
  if (failed && !best.valid) rep.status = SolveStatus::NumericalFailure;
  if (best.valid) {
    z = best_z;
    s = barrier.slacks(z);
  } else {
    best = certify(barrier.gradients(z), s, s.cwiseInverse() / tau);
  }

  sol.x = z.head(n);
  sol.t = min_quadratic(p, sol.x);
  rep.iterations = iter;
  rep.objective = sol.t;
  rep.duality_gap = best.gap;
  rep.kkt_residuals = {std::max(0.0, -s.minCoeff()), best.stationarity,
                       best.complementarity};
  return sol;
}

}  // namespace macover
