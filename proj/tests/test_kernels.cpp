#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <random>
#include <vector>

#include "macover/array_model.hpp"
#include "macover/kernels.hpp"

using namespace macover;

namespace {

struct Inputs {
  Eigen::VectorXcd w;
  std::vector<double> phases, x, angles;
};

Inputs make_inputs(int n, int l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Inputs in;
  double pos = 0.0;
  for (int i = 0; i < n; ++i) {
    in.x.push_back(pos);
    pos += 0.15 + u(rng) * 0.3;
    in.phases.push_back(u(rng) * 2 * kPi);
  }
  in.w = WeightVector(in.phases).to_eigen();
  for (int i = 0; i < l; ++i) in.angles.push_back(kPi * i / (l - 1));
  return in;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a.data()[i] != b.data()[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("parallel kernels match the serial references bit for bit") {
  omp_set_num_threads(4);
  for (int n : {2, 8, 16}) {
    for (int l : {3, 181, 1801}) {
      const Inputs in = make_inputs(n, l, static_cast<std::uint64_t>(n * 10000 + l));
      CAPTURE(n);
      CAPTURE(l);

      std::vector<double> g_par(l), g_ser(l);
      kernels::beam_gains(in.w, in.x, in.angles, 0.3, g_par);
      kernels::serial::beam_gains(in.w, in.x, in.angles, 0.3, g_ser);
      CHECK(g_par == g_ser);

      Eigen::MatrixXd b1, b2;
      Eigen::VectorXd c1, c2, a1, a2;
      kernels::surrogate_terms(in.phases, in.x, in.angles, 0.3, b1, c1, a1);
      kernels::serial::surrogate_terms(in.phases, in.x, in.angles, 0.3, b2, c2, a2);
      CHECK(same_bits(b1, b2));
      CHECK(same_bits(c1, c2));
      CHECK(same_bits(a1, a2));

      const Eigen::MatrixXd grads = b1;   // any dense (dim x L) block
      const Eigen::VectorXd ow = c1.cwiseAbs();
      const Eigen::VectorXd cw = a1.cwiseAbs();
      std::vector<Eigen::MatrixXd> curvs;
      for (int i = 0; i < l; ++i)
        curvs.push_back(Eigen::MatrixXd::Identity(n, n) * (1.0 + i % 3));
      Eigen::MatrixXd h1, h2;
      kernels::barrier_hessian(grads, curvs, ow, cw, h1);
      kernels::serial::barrier_hessian(grads, curvs, ow, cw, h2);
      CHECK(same_bits(h1, h2));

      const Eigen::MatrixXd g = grads.transpose();
      Eigen::MatrixXd m1 = Eigen::MatrixXd::Identity(n, n);
      Eigen::MatrixXd m2 = m1;
      kernels::add_weighted_gram(g, ow, m1);
      kernels::serial::add_weighted_gram(g, ow, m2);
      CHECK(same_bits(m1, m2));
    }
  }
}

TEST_CASE("beam gain kernel agrees with the scalar gain") {
  const Inputs in = make_inputs(6, 181, 3);
  std::vector<double> g(181);
  kernels::beam_gains(in.w, in.x, in.angles, 0.3, g);
  for (int l = 0; l < 181; ++l)
    CHECK(g[l] == doctest::Approx(beam_gain(WeightVector(in.phases), PositionVector(in.x),
                                            in.angles[l], 0.3))
                      .epsilon(1e-12)
                      .scale(1.0));
}

TEST_CASE("weighted gram is symmetric and accumulates") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(40, 20, [&] { return z(rng); });
  Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(40, [&] { return std::abs(z(rng)); });
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(20, 20);
  kernels::add_weighted_gram(g, w, m);
  const Eigen::MatrixXd ref =
      Eigen::MatrixXd::Identity(20, 20) + g.transpose() * w.asDiagonal() * g;
  CHECK((m - ref).norm() < 1e-10 * ref.norm());
  CHECK((m - m.transpose()).norm() == 0.0);
}
