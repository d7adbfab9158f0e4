#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "macover/array_model.hpp"
#include "macover/convex.hpp"
#include "macover/linalg.hpp"
#include "macover/weight_optimizer.hpp"
#include "oracles.hpp"

using namespace macover;
using doctest::Approx;

namespace {

// Optima of the closed-form instances, from tests/reference/sdp_reference.py
// (Clarabel and CVXOPT agree to 1e-7).
constexpr double kSdpReference[4] = {2.561042481447, 1.765986114620, 1.033772009782,
                                     1.427521615296};
constexpr double kSdpPenaltyReference[4] = {6.056437886548, 5.927952312795, 5.425901208750,
                                            5.616671684315};

// 2-D grid oracle at 1e-3 over 0 <= x1, x1 + 0.3 <= x2 <= 1.
const std::vector<std::vector<oracle::Quadratic2>> kQcqpInstances = {
    {{-1.3, 0.4, -0.8, 0.9, -0.2, 0.1}, {-0.5, -0.2, -2.0, -0.4, 1.6, -0.3}},
    {{-2, 1, -0.6, 1.5, 0.3, 0}, {0, 0, -1, -1, 0.8, 0.4}},
    {{-1.125, 1.125, -1.125, -2, 2, 0.3}, {-0.3, 0.1, -0.3, 0.5, -0.1, 0}}};
constexpr double kQcqpGridOptimum[3] = {-0.012842899999999935, 0.37707100000000005,
                                        -0.0079999999999999793};

SdpProblem reference_sdp(int k, double rho) {
  SdpProblem p;
  p.dim = 3;
  p.diag_value = 1.0 / 3.0;
  for (int l = 0; l < 4; ++l) {
    const Eigen::VectorXcd r = oracle::reference_gain_vector(k, l);
    p.gain_constraints.push_back(r * r.adjoint());
  }
  if (rho > 0) {
    const Eigen::VectorXcd s = oracle::reference_penalty_vector(k);
    p.objective = rho * s * s.adjoint();
  }
  return p;
}

QcqpProblem to_qcqp(const std::vector<oracle::Quadratic2>& q, double upper, double dmin) {
  QcqpProblem p;
  p.dim = 2;
  p.upper = upper;
  p.min_spacing = dmin;
  for (const auto& f : q) {
    QuadraticConstraint c;
    c.a.resize(2, 2);
    c.a << f.a11, f.a12, f.a12, f.a22;
    c.b = Eigen::Vector2d(f.b1, f.b2);
    c.c = f.c;
    p.constraints.push_back(c);
  }
  return p;
}

Eigen::MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {z(rng), z(rng)};
  return 0.5 * (m + m.adjoint());
}

void check_sdp_postconditions(const SdpProblem& p, const SdpSolution& s,
                              const SolverTolerances& tol = {}) {
  REQUIRE(s.report.ok());
  CHECK(hermitian_eig(s.v).values.minCoeff() >= -1e-9);
  for (int n = 0; n < p.dim; ++n)
    CHECK(std::abs(s.v(n, n).real() - p.diag_value) <= tol.feas_tol);
  for (const auto& r : p.gain_constraints)
    CHECK((r * s.v).trace().real() >= s.t - tol.feas_tol);
  CHECK(s.report.duality_gap <= tol.gap_tol * (1.0 + std::abs(s.report.objective)));
}

}  // namespace

TEST_CASE("hermitian eigendecomposition") {
  auto e = hermitian_eig(Eigen::MatrixXcd::Identity(5, 5));
  for (int i = 0; i < 5; ++i) CHECK(e.values(i) == Approx(1.0));

  for (int n : {1, 2, 6, 8}) {
    const Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(n, n) -
                               Eigen::MatrixXcd::Constant(n, n, 1.0 / n);
    e = hermitian_eig(w);
    CHECK(std::abs(e.values(0)) < 1e-12);
    for (int i = 1; i < n; ++i) CHECK(e.values(i) == Approx(1.0));
  }

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 8;
    const Eigen::MatrixXcd m = random_hermitian(n, rng);
    e = hermitian_eig(m);
    const Eigen::MatrixXcd rec = e.vectors * e.values.asDiagonal() * e.vectors.adjoint();
    CHECK((rec - m).norm() <= 1e-10 * m.norm());
    CHECK((e.vectors.adjoint() * e.vectors - Eigen::MatrixXcd::Identity(n, n)).norm() <= 1e-10);
    for (int i = 1; i < n; ++i) CHECK(e.values(i) >= e.values(i - 1));
  }

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(3, 3);
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(hermitian_eig(bad), InvalidArgument);
  CHECK_THROWS_AS(hermitian_eig(Eigen::MatrixXcd::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("principal singular pair") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Eigen::VectorXcd w(4);
  for (int i = 0; i < 4; ++i) w(i) = {z(rng), z(rng)};
  w.normalize();
  auto sp = principal_singular_pair(w * w.adjoint());
  CHECK(sp.sigma == Approx(1.0));
  CHECK(std::abs(std::abs(w.dot(sp.left)) - 1.0) < 1e-10);
  CHECK(std::abs(std::abs(w.dot(sp.right)) - 1.0) < 1e-10);

  sp = principal_singular_pair(Eigen::MatrixXcd::Identity(4, 4) / 4.0);
  CHECK(sp.sigma == Approx(0.25));

  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 8;
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = {z(rng), z(rng)};
    const Eigen::MatrixXcd m = g * g.adjoint();
    sp = principal_singular_pair(m);
    CHECK(sp.sigma == Approx(hermitian_eig(m).values.maxCoeff()).epsilon(1e-10));
    CHECK((m * sp.right - sp.sigma * sp.left).norm() <= 1e-10 * m.norm());
    CHECK(sp.left.norm() == Approx(1.0));
    CHECK(sp.right.norm() == Approx(1.0));
  }
}

TEST_CASE("sdp: single angle reaches the conjugate match") {
  const PositionVector x({0.0, 0.37});
  const double th = 1.2;
  SdpProblem p;
  p.dim = 2;
  p.diag_value = 0.5;
  const Eigen::VectorXcd a = steering_vector(x, th, 0.3);
  p.gain_constraints = {a * a.adjoint()};
  const auto s = solve_sdp(p);
  check_sdp_postconditions(p, s);
  CHECK(s.t == Approx(2.0).epsilon(1e-7));
  const Eigen::VectorXcd w = a / std::sqrt(2.0);
  CHECK((s.v - w * w.adjoint()).norm() < 1e-6);
}

TEST_CASE("sdp: closed-form instances match the offline references") {
  for (int k = 0; k < 4; ++k) {
    CAPTURE(k);
    auto p = reference_sdp(k, 0.0);
    auto s = solve_sdp(p);
    check_sdp_postconditions(p, s);
    CHECK(s.t == Approx(kSdpReference[k]).epsilon(1e-6));

    p = reference_sdp(k, 5.0);
    s = solve_sdp(p);
    check_sdp_postconditions(p, s);
    CHECK(s.report.objective == Approx(kSdpPenaltyReference[k]).epsilon(1e-6));
  }
}

TEST_CASE("sdp: optimum of steering-vector problems lies in [1, N]") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 8;
    const int l = 1 + static_cast<int>(u(rng) * 60);
    std::vector<double> xs;
    double pos = 0.0;
    for (int i = 0; i < n; ++i) {
      xs.push_back(pos);
      pos += 0.5 + u(rng) * 1.5;
    }
    std::vector<double> ang;
    for (int i = 0; i < l; ++i) ang.push_back(u(rng) * kPi);
    SdpProblem p;
    p.dim = n;
    p.diag_value = 1.0 / n;
    p.gain_constraints = gain_matrices(PositionVector(xs), SampleGrid::from_angles(ang), 1.0);
    const auto s = solve_sdp(p);
    CAPTURE(trial);
    check_sdp_postconditions(p, s);
    CHECK(s.t >= 1.0 - 1e-8);
    CHECK(s.t <= n + 1e-8);
  }
}

TEST_CASE("sdp: deterministic and validated") {
  const auto p = reference_sdp(2, 5.0);
  const auto s1 = solve_sdp(p);
  const auto s2 = solve_sdp(p);
  CHECK(s1.t == s2.t);
  CHECK(s1.v == s2.v);
  CHECK(s1.report.iterations == s2.report.iterations);

  SdpProblem bad = p;
  bad.gain_constraints.clear();
  CHECK_THROWS_AS(solve_sdp(bad), InvalidArgument);
  bad = p;
  bad.diag_value = 0.0;
  CHECK_THROWS_AS(solve_sdp(bad), InvalidArgument);
  bad = p;
  bad.gain_constraints[0](0, 1) += 1.0;
  CHECK_THROWS_AS(solve_sdp(bad), InvalidArgument);
}

TEST_CASE("qcqp: concave parabola in one dimension") {
  for (double c : {0.0, 0.4, 1.3, 2.0}) {
    QcqpProblem p;
    p.dim = 1;
    p.upper = 2.0;
    QuadraticConstraint q;
    q.a = Eigen::MatrixXd::Constant(1, 1, -1.0);
    q.b = Eigen::VectorXd::Constant(1, 2.0 * c);
    q.c = 0.7 - c * c;
    p.constraints = {q};
    const auto s = solve_qcqp(p);
    CAPTURE(c);
    REQUIRE(s.report.ok());
    CHECK(s.x(0) == Approx(c).epsilon(1e-4).scale(1.0));
    CHECK(s.t == Approx(0.7).epsilon(1e-7));
  }
}

TEST_CASE("qcqp: matches the 2-D grid oracle") {
  for (std::size_t i = 0; i < kQcqpInstances.size(); ++i) {
    CAPTURE(i);
    const double grid = oracle::qcqp_grid_2d(kQcqpInstances[i], 1.0, 0.3, 1e-3);
    CHECK(grid == Approx(kQcqpGridOptimum[i]).epsilon(1e-12));
    const auto p = to_qcqp(kQcqpInstances[i], 1.0, 0.3);
    const auto s = solve_qcqp(p);
    REQUIRE(s.report.ok());
    CHECK(s.t >= grid - 1e-8);
    CHECK(s.t <= grid + 1e-2);
    CHECK(s.x(0) >= -1e-8);
    CHECK(s.x(1) <= 1.0 + 1e-8);
    CHECK(s.x(1) - s.x(0) >= 0.3 - 1e-8);
    for (const auto& c : p.constraints) CHECK(c.evaluate(s.x) >= s.t - 1e-8);
  }
}

TEST_CASE("qcqp: random feasible perturbations never improve the optimum") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 6;
    QcqpProblem p;
    p.dim = n;
    p.upper = 1.0 + 4.0 * u(rng);
    p.min_spacing = n > 1 ? 0.8 * u(rng) * p.upper / (n - 1) : 0.0;
    const Eigen::MatrixXd w =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    for (int l = 0; l < 30; ++l) {
      QuadraticConstraint q;
      const double a = 3.0 * z(rng);
      q.a = -a * a * w;
      q.b = Eigen::VectorXd::NullaryExpr(n, [&] { return 2.0 * z(rng); });
      q.c = z(rng);
      p.constraints.push_back(q);
    }
    const auto s = solve_qcqp(p);
    CAPTURE(trial);
    REQUIRE(s.report.ok());
    auto objective = [&](const Eigen::VectorXd& x) {
      double m = INFINITY;
      for (const auto& c : p.constraints) m = std::min(m, c.evaluate(x));
      return m;
    };
    CHECK(objective(s.x) >= s.t - 1e-8);
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd y = s.x + 0.05 * Eigen::VectorXd::NullaryExpr(n, [&] { return z(rng); });
      bool feasible = y(0) >= 0.0 && y(n - 1) <= p.upper;
      for (int i = 1; i < n; ++i) feasible = feasible && y(i) - y(i - 1) >= p.min_spacing;
      if (feasible) CHECK(objective(y) <= s.t + 1e-8);
    }
    const auto again = solve_qcqp(p);
    CHECK(again.x == s.x);
    CHECK(again.t == s.t);
  }
}

TEST_CASE("qcqp: invalid problems are rejected") {
  QcqpProblem p = to_qcqp(kQcqpInstances[0], 1.0, 0.3);
  QcqpProblem bad = p;
  bad.constraints.clear();
  CHECK_THROWS_AS(solve_qcqp(bad), InvalidArgument);
  bad = p;
  bad.constraints[0].a = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(solve_qcqp(bad), InvalidArgument);
  bad = p;
  bad.min_spacing = 1.5;
  CHECK_THROWS_AS(solve_qcqp(bad), InvalidArgument);
}

TEST_CASE("problem dumps round trip") {
  const auto sdp = reference_sdp(1, 5.0);
  std::stringstream ss;
  write_problem(ss, sdp);
  const auto sdp2 = read_sdp_problem(ss);
  CHECK(sdp2.dim == sdp.dim);
  CHECK(sdp2.diag_value == sdp.diag_value);
  REQUIRE(sdp2.gain_constraints.size() == sdp.gain_constraints.size());
  for (std::size_t l = 0; l < sdp.gain_constraints.size(); ++l)
    CHECK(sdp2.gain_constraints[l] == sdp.gain_constraints[l]);
  CHECK(sdp2.objective == sdp.objective);

  const auto q = to_qcqp(kQcqpInstances[1], 1.0, 0.3);
  std::stringstream qs;
  write_problem(qs, q);
  const auto q2 = read_qcqp_problem(qs);
  CHECK(q2.upper == q.upper);
  CHECK(q2.min_spacing == q.min_spacing);
  REQUIRE(q2.constraints.size() == q.constraints.size());
  for (std::size_t l = 0; l < q.constraints.size(); ++l) {
    CHECK(q2.constraints[l].a == q.constraints[l].a);
    CHECK(q2.constraints[l].b == q.constraints[l].b);
    CHECK(q2.constraints[l].c == q.constraints[l].c);
  }
}
