// Primal-dual path-following solver for the gain-constrained Hermitian SDP.
//
// The caller's problem is kept in "dual" standard form over the variable
// y = (t, off-diagonal real/imaginary parts of V):
//
//   maximize b^T y   s.t.  Z(y) = C - sum_i y_i A_i  in  H^N_+ x R^L_+
//
// with Z_V = V(y) (diagonal pinned at diag_value) and z_l = Tr(R_l V) - t.
// The multipliers X = (X_V, x) solve min <C, X> s.t. A(X) = b, X >= 0.
// Directions are HKM with a Mehrotra predictor-corrector. The start
// y = (t0, 0) is strictly feasible and dual residuals vanish identically, so
// every returned V is exactly feasible.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "macover/array_model.hpp"
#include "macover/convex.hpp"
#include "macover/kernels.hpp"

namespace macover {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  if (dim < 1) throw InvalidArgument("sdp: dim must be >= 1");
  if (gain_constraints.empty())
    throw InvalidArgument("sdp: at least one gain constraint is required");
  if (!(diag_value > 0.0)) throw InvalidArgument("sdp: diag_value must be > 0");
  auto check = [&](const Eigen::MatrixXcd& m, const char* what) {
    if (m.rows() != dim || m.cols() != dim)
      throw InvalidArgument(std::string("sdp: ") + what + " has wrong shape");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidArgument(std::string("sdp: ") + what + " is not Hermitian");
  };
  if (objective.size() != 0) check(objective, "objective");
  for (const auto& r : gain_constraints) check(r, "gain constraint");
}

namespace {

struct BasisEntry {
  int row;
  int col;
  cdouble coef;
};

// Off-diagonal Hermitian basis: for each p < q, E = e_p e_q^T + e_q e_p^T
// (real part) and E = j e_p e_q^T - j e_q e_p^T (imaginary part), so that
// V(p, q) = y_re + j y_im.
struct HermitianBasis {
  std::vector<std::array<BasisEntry, 2>> elems;

  explicit HermitianBasis(int n) {
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        elems.push_back({{{p, q, {1.0, 0.0}}, {q, p, {1.0, 0.0}}}});
        elems.push_back({{{p, q, {0.0, 1.0}}, {q, p, {0.0, -1.0}}}});
      }
  }

  std::size_t size() const { return elems.size(); }

  // Re Tr(E_k M)
  double inner(std::size_t k, const Eigen::MatrixXcd& m) const {
    double acc = 0.0;
    for (const auto& e : elems[k]) acc += (e.coef * m(e.col, e.row)).real();
    return acc;
  }

  void add_scaled(std::size_t k, double s, Eigen::MatrixXcd& m) const {
    for (const auto& e : elems[k]) m(e.row, e.col) += s * e.coef;
  }
};

struct Workspace {
  int n = 0;
  std::size_t nl = 0;        // number of gain constraints
  std::size_t m = 0;         // length of y
  double d = 0.0;
  HermitianBasis basis{0};
  Eigen::MatrixXd g;         // linear block of A, nl x m
  Eigen::VectorXd c_lin;     // linear block of C
  Eigen::VectorXd b;
  double objective_offset = 0.0;
};

struct Iterate {
  Eigen::VectorXd y;
  Eigen::MatrixXcd xv;   // X_V
  Eigen::VectorXd xl;    // linear multipliers
  Eigen::MatrixXcd zv;   // Z_V = V(y)
  Eigen::VectorXd zl;    // gain slacks
};

struct Direction {
  Eigen::VectorXd dy;
  Eigen::MatrixXcd dxv, dzv;
  Eigen::VectorXd dxl, dzl;
};

Eigen::MatrixXcd v_of(const Workspace& ws, const Eigen::VectorXd& y) {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(ws.n, ws.n) * ws.d;
  for (std::size_t k = 0; k < ws.basis.size(); ++k)
    ws.basis.add_scaled(k, y(static_cast<Eigen::Index>(k + 1)), v);
  return v;
}

void set_dual_slacks(const Workspace& ws, Iterate& it) {
  it.zv = v_of(ws, it.y);
  it.zl = ws.c_lin - ws.g * it.y;
}

// A(X_V, x): component t gets only the linear block.
Eigen::VectorXd apply_a(const Workspace& ws, const Eigen::MatrixXcd& xv,
                        const Eigen::VectorXd& xl) {
  Eigen::VectorXd out = ws.g.transpose() * xl;
  for (std::size_t k = 0; k < ws.basis.size(); ++k)
    out(static_cast<Eigen::Index>(k + 1)) -= ws.basis.inner(k, xv);
  return out;
}

double re_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.adjoint() * b).trace().real();
}

double complementarity(const Iterate& it) {
  return re_inner(it.xv, it.zv) + it.xl.dot(it.zl);
}

// Largest alpha in (0, cap] with M + alpha dM PSD; -1 if M is not PD.
double max_step_psd(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& dm,
                    double cap) {
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success) return -1.0;
  const Eigen::MatrixXcd linv_dm = llt.matrixL().solve(dm);
  Eigen::MatrixXcd s = llt.matrixL().solve(linv_dm.adjoint()).adjoint();
  s = 0.5 * (s + s.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0.0 ? cap : std::min(cap, -1.0 / lmin);
}

double max_step_pos(const Eigen::VectorXd& v, const Eigen::VectorXd& dv,
                    double cap) {
  double a = cap;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  return a;
}

Eigen::MatrixXd schur_complement(const Workspace& ws, const Iterate& it,
                                 const Eigen::MatrixXcd& zinv) {
  const auto m = static_cast<Eigen::Index>(ws.m);
  Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
  const Eigen::VectorXd w = it.xl.cwiseQuotient(it.zl);
  kernels::add_weighted_gram(ws.g, w, schur);
  // Re Tr(E_i X E_j Z^-1) over the off-diagonal basis.
  const std::size_t mv = ws.basis.size();
  for (std::size_t i = 0; i < mv; ++i)
    for (std::size_t j = i; j < mv; ++j) {
      double acc = 0.0;
      for (const auto& ei : ws.basis.elems[i])
        for (const auto& ej : ws.basis.elems[j])
          acc += (ei.coef * ej.coef * it.xv(ei.col, ej.row) * zinv(ej.col, ei.row)).real();
      schur(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(j + 1)) += acc;
      if (i != j)
        schur(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(i + 1)) += acc;
    }
  return schur;
}

// Completes a direction from dy for the complementarity target
// X Z -> target * I - corr, evaluated without forming X Z so that an
// ill-conditioned Z does not cost accuracy in dX:
//   dX = target Z^-1 - X - (corr + X dZ) Z^-1.
void complete_direction(const Workspace& ws, const Iterate& it,
                        const Eigen::MatrixXcd& zinv, double target,
                        const Eigen::MatrixXcd* corr_v,
                        const Eigen::VectorXd* corr_l, Direction& dir) {
  dir.dzv = Eigen::MatrixXcd::Zero(ws.n, ws.n);
  for (std::size_t k = 0; k < ws.basis.size(); ++k)
    ws.basis.add_scaled(k, dir.dy(static_cast<Eigen::Index>(k + 1)), dir.dzv);
  dir.dzl = -(ws.g * dir.dy);
  Eigen::MatrixXcd inner = it.xv * dir.dzv;
  if (corr_v) inner += *corr_v;
  Eigen::MatrixXcd dxv = target * zinv - it.xv - inner * zinv;
  dir.dxv = 0.5 * (dxv + dxv.adjoint());
  Eigen::VectorXd num = it.xl.cwiseProduct(dir.dzl);
  if (corr_l) num += *corr_l;
  dir.dxl = (Eigen::VectorXd::Constant(it.zl.size(), target) - num).cwiseQuotient(it.zl) - it.xl;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, const SolverTolerances& tol) {
  p.validate();
  Workspace ws;
  ws.n = p.dim;
  ws.nl = p.gain_constraints.size();
  ws.d = p.diag_value;
  ws.basis = HermitianBasis(p.dim);
  ws.m = 1 + ws.basis.size();
  const auto m = static_cast<Eigen::Index>(ws.m);
  const auto nl = static_cast<Eigen::Index>(ws.nl);

  ws.g.resize(nl, m);
  ws.c_lin.resize(nl);
  for (Eigen::Index l = 0; l < nl; ++l) {
    const auto& r = p.gain_constraints[static_cast<std::size_t>(l)];
    ws.c_lin(l) = ws.d * r.trace().real();
    ws.g(l, 0) = 1.0;
    for (std::size_t k = 0; k < ws.basis.size(); ++k)
      ws.g(l, static_cast<Eigen::Index>(k + 1)) = -ws.basis.inner(k, r);
  }
  ws.b = Eigen::VectorXd::Zero(m);
  ws.b(0) = p.t_coeff;
  if (p.objective.size() != 0) {
    for (std::size_t k = 0; k < ws.basis.size(); ++k)
      ws.b(static_cast<Eigen::Index>(k + 1)) = ws.basis.inner(k, p.objective);
    ws.objective_offset = ws.d * p.objective.trace().real();
  }

  const double cone_dim = static_cast<double>(ws.n) + static_cast<double>(ws.nl);
  Iterate it;
  it.y = Eigen::VectorXd::Zero(m);
  it.y(0) = ws.c_lin.minCoeff() - 1.0;
  set_dual_slacks(ws, it);
  const double b_scale = 1.0 + ws.b.cwiseAbs().maxCoeff();
  const double x_scale = std::max(1.0, ws.b.cwiseAbs().maxCoeff());
  it.xv = Eigen::MatrixXcd::Identity(ws.n, ws.n) * x_scale;
  it.xl = Eigen::VectorXd::Constant(nl, 1.0 / static_cast<double>(nl));

  SdpSolution sol;
  SolveReport& rep = sol.report;
  rep.status = SolveStatus::MaxIter;
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(ws.n, ws.n);

  auto fill_report = [&](const Iterate& cur) {
    const Eigen::VectorXd rp = ws.b - apply_a(ws, cur.xv, cur.xl);
    const double primal_lagr =
        ws.d * cur.xv.trace().real() + ws.c_lin.dot(cur.xl);
    const double dual_obj = ws.b.dot(cur.y);
    rep.objective = dual_obj + ws.objective_offset;
    rep.duality_gap = primal_lagr - dual_obj;
    rep.kkt_residuals = {rp.cwiseAbs().maxCoeff(), 0.0, complementarity(cur)};
  };

  for (int iter = 0; iter < tol.max_iter; ++iter) {
    rep.iterations = iter;
    fill_report(it);
    const double obj_scale = 1.0 + std::abs(rep.objective - ws.objective_offset);
    if (std::abs(rep.duality_gap) <= tol.gap_tol * obj_scale &&
        rep.kkt_residuals[0] <= tol.feas_tol * b_scale &&
        rep.kkt_residuals[2] <= tol.gap_tol) {
      rep.status = SolveStatus::Optimal;
      break;
    }
    const double mu = complementarity(it) / cone_dim;

    Eigen::LLT<Eigen::MatrixXcd> zchol(it.zv);
    if (zchol.info() != Eigen::Success) {
      rep.status = SolveStatus::NumericalFailure;
      break;
    }
    Eigen::MatrixXcd zinv = zchol.solve(eye);
    zinv = 0.5 * (zinv + zinv.adjoint()).eval();
    const Eigen::MatrixXd schur = schur_complement(ws, it, zinv);
    Eigen::MatrixXd shifted = schur;
    Eigen::LLT<Eigen::MatrixXd> mchol(schur);
    // Uniform arrays give Toeplitz gain matrices that leave most of the dual
    // space to the vanishing V block; a relative shift restores definiteness.
    const double shift_base = schur.diagonal().cwiseAbs().maxCoeff();
    bool was_shifted = false;
    for (double rel = 1e-14; mchol.info() != Eigen::Success && rel <= 1e-8; rel *= 100.0) {
      shifted.diagonal().array() += rel * shift_base;
      mchol.compute(shifted);
      was_shifted = true;
    }
    if (mchol.info() != Eigen::Success) {
      rep.status = SolveStatus::NumericalFailure;
      break;
    }

    // Predictor (affine scaling): right-hand side reduces to b.
    Direction aff;
    // Iterative refinement recovers the accuracy lost to the shift.
    auto schur_solve = [&](const Eigen::VectorXd& r) {
      Eigen::VectorXd x = mchol.solve(r);
      if (was_shifted)
        for (int k = 0; k < 3; ++k) x += mchol.solve(r - schur * x);
      return x;
    };
    aff.dy = schur_solve(ws.b);
    complete_direction(ws, it, zinv, 0.0, nullptr, nullptr, aff);
    double ap = std::min(max_step_psd(it.xv, aff.dxv, 1.0),
                         max_step_pos(it.xl, aff.dxl, 1.0));
    double ad = std::min(max_step_psd(it.zv, aff.dzv, 1.0),
                         max_step_pos(it.zl, aff.dzl, 1.0));
    if (ap < 0.0 || ad < 0.0) {
      rep.status = SolveStatus::NumericalFailure;
      break;
    }
    const double mu_aff =
        (re_inner(it.xv + ap * aff.dxv, it.zv + ad * aff.dzv) +
         (it.xl + ap * aff.dxl).dot(it.zl + ad * aff.dzl)) /
        cone_dim;
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Corrector with second-order term.
    const Eigen::MatrixXcd corr_v = aff.dxv * aff.dzv;
    const Eigen::VectorXd corr_l = aff.dxl.cwiseProduct(aff.dzl);
    const double target = sigma * mu;
    const Eigen::VectorXd rhs =
        ws.b - apply_a(ws, (target * zinv - corr_v * zinv),
                       (Eigen::VectorXd::Constant(nl, target) - corr_l).cwiseQuotient(it.zl));
    Direction dir;
    dir.dy = schur_solve(rhs);
    complete_direction(ws, it, zinv, target, &corr_v, &corr_l, dir);

    ap = std::min(max_step_psd(it.xv, dir.dxv, 1e300), max_step_pos(it.xl, dir.dxl, 1e300));
    ad = std::min(max_step_psd(it.zv, dir.dzv, 1e300), max_step_pos(it.zl, dir.dzl, 1e300));
    if (ap < 0.0 || ad < 0.0) {
      rep.status = SolveStatus::NumericalFailure;
      break;
    }
    constexpr double kStepFactor = 0.95;
    ap = std::min(1.0, kStepFactor * ap);
    ad = std::min(1.0, kStepFactor * ad);

    // Round-off near the cone boundary can break definiteness at the nominal
    // step; shorten it until both blocks stay interior.
    Iterate next;
    bool interior = false;
    for (int cut = 0; cut < 30 && !interior; ++cut, ap *= 0.5, ad *= 0.5) {
      next = it;
      next.xv = it.xv + ap * dir.dxv;
      next.xv = 0.5 * (next.xv + next.xv.adjoint()).eval();
      next.xl = it.xl + ap * dir.dxl;
      next.y = it.y + ad * dir.dy;
      set_dual_slacks(ws, next);
      interior = next.zl.minCoeff() > 0.0 && next.xl.minCoeff() > 0.0 &&
                 Eigen::LLT<Eigen::MatrixXcd>(next.zv).info() == Eigen::Success &&
                 Eigen::LLT<Eigen::MatrixXcd>(next.xv).info() == Eigen::Success;
    }
    if (!interior) {
      rep.status = SolveStatus::NumericalFailure;
      break;
    }
    it = std::move(next);
    if (iter + 1 == tol.max_iter) {
      rep.iterations = tol.max_iter;
      fill_report(it);
    }
  }

  sol.v = it.zv;
  sol.t = it.y(0);
  return sol;
}

}  // namespace macover
