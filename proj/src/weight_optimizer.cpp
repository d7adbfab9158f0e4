#include "macover/weight_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "macover/kernels.hpp"
#include "macover/linalg.hpp"

namespace macover {
namespace {

constexpr double kDegenerateGap = 1e-6;
constexpr double kRampCap = 1e4;
constexpr int kRampEvery = 10;

std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

double min_trace_gain(const std::vector<Eigen::MatrixXcd>& r, const Eigen::MatrixXcd& v) {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& m : r) t = std::min(t, (m * v).trace().real());
  return t;
}

Eigen::MatrixXcd outer(const WeightVector& w) {
  const Eigen::VectorXcd e = w.to_eigen();
  return e * e.adjoint();
}

}  // namespace

PenaltyState PenaltyState::at(double rho, const Eigen::MatrixXcd& v) {
  const HermitianEig eig = hermitian_eig(v);
  const Eigen::Index top = eig.values.size() - 1;
  PenaltyState s;
  s.rho = rho;
  s.v_current = v;
  s.s_current = eig.vectors.col(top);
  s.sigma_current = eig.values(top);
  return s;
}

double rank_penalty(const Eigen::MatrixXcd& v) {
  const HermitianEig eig = hermitian_eig(v);
  return v.trace().real() - eig.values(eig.values.size() - 1);
}

double LinearizedPenalty::evaluate(const Eigen::MatrixXcd& v) const {
  const double inner = (s.adjoint() * (v - anchor) * s)(0, 0).real();
  return v.trace().real() - sigma - inner;
}

LinearizedPenalty linearize_penalty(const PenaltyState& state) {
  return {state.v_current, state.s_current, state.sigma_current};
}

Extraction extract_weights(const Eigen::MatrixXcd& v) {
  const HermitianEig eig = hermitian_eig(v);
  const Eigen::Index n = eig.values.size();
  const double sigma = std::max(eig.values(n - 1), 0.0);
  const Eigen::VectorXcd u = std::sqrt(sigma) * eig.vectors.col(n - 1);
  Extraction e;
  e.w = WeightVector::from_complex(u);
  e.eigengap = n > 1 ? eig.values(n - 1) - eig.values(n - 2) : eig.values(0);
  e.degenerate = n > 1 && e.eigengap < kDegenerateGap;
  return e;
}

WeightVector gaussian_randomization(const Eigen::MatrixXcd& v, const PositionVector& x,
                                    const SampleGrid& grid, double wavelength,
                                    int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("randomization needs at least one trial");
  const HermitianEig eig = hermitian_eig(v);
  const Eigen::Index n = eig.values.size();
  const Eigen::MatrixXcd factor =
      eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::vector<WeightVector> candidates(static_cast<std::size_t>(trials));
  std::vector<double> scores(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(static)
  for (int k = 0; k < trials; ++k) {
    auto rng = trial_engine(seed, static_cast<std::uint64_t>(k));
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    Eigen::VectorXcd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      r(i) = {re, im};
    }
    auto& w = candidates[static_cast<std::size_t>(k)];
    w = WeightVector::from_complex(factor * r);
    std::vector<double> gains(grid.size());
    kernels::serial::beam_gains(w.to_eigen(), x.span(), grid.angles, wavelength, gains);
    scores[static_cast<std::size_t>(k)] = *std::min_element(gains.begin(), gains.end());
  }
  const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
  return candidates[static_cast<std::size_t>(best)];
}

std::vector<Eigen::MatrixXcd> gain_matrices(const PositionVector& x, const SampleGrid& grid,
                                            double wavelength) {
  std::vector<Eigen::MatrixXcd> r;
  r.reserve(grid.size());
  for (double theta : grid.angles) {
    const Eigen::VectorXcd a = steering_vector(x, theta, wavelength);
    r.push_back(a * a.adjoint());
  }
  return r;
}

WeightResult sca_weights(const PositionVector& x, const SampleGrid& grid, double wavelength,
                         const WeightVector& w_init, const WeightOptions& opt) {
  if (!(opt.rho >= 0.0)) throw InvalidArgument("rho must be >= 0");
  if (!(opt.sca_tol > 0.0)) throw InvalidArgument("sca_tol must be > 0");
  if (w_init.size() != x.size()) throw InvalidArgument("weight and position sizes differ");
  if (grid.size() == 0) throw InvalidArgument("empty sample grid");

  const int n = static_cast<int>(x.size());
  SdpProblem prob;
  prob.dim = n;
  prob.diag_value = 1.0 / n;
  prob.gain_constraints = gain_matrices(x, grid, wavelength);

  WeightResult res;
  double rho = opt.rho;
  Eigen::MatrixXcd v = outer(w_init);
  auto record = [&](int it, const Eigen::MatrixXcd& m) {
    WeightTraceRecord r;
    r.iteration = it;
    r.t = min_trace_gain(prob.gain_constraints, m);
    r.f = rank_penalty(m);
    r.v = r.t - rho * r.f;
    return r;
  };
  res.trace.push_back(record(0, v));

  for (int it = 1; it <= opt.max_iter; ++it) {
    if (opt.rho_ramp && it > 1 && (it - 1) % kRampEvery == 0)
      rho = std::min(2.0 * rho, std::max(kRampCap, opt.rho));
    const PenaltyState state = PenaltyState::at(rho, v);
    // With Tr(V) fixed at 1 the penalty term reduces to rho s^H V s up to a
    // constant.
    prob.objective = rho * state.s_current * state.s_current.adjoint();
    const SdpSolution sol = solve_sdp(prob, opt.solver);
    if (!sol.report.ok())
      throw SolverError("weight SDP failed at SCA iteration " + std::to_string(it) + ": " +
                            to_string(sol.report.status),
                        sol.report);
    res.iterations = it;
    const WeightTraceRecord prev = record(it - 1, v);
    const WeightTraceRecord next = record(it, sol.v);
    if (next.v < prev.v) {
      res.ascent_guard = prev.v - next.v > 1e-9;
      break;
    }
    v = sol.v;
    res.trace.push_back(next);
    if (next.v - prev.v < opt.sca_tol) break;
  }

  res.v_final = v;
  res.rank_penalty = rank_penalty(v);
  res.rank_one = res.rank_penalty <= opt.rank_tol;
  const Extraction e = extract_weights(v);
  res.w = e.w;
  if (e.degenerate) {
    res.degenerate = true;
    res.w = gaussian_randomization(v, x, grid, wavelength, opt.randomization_trials, opt.seed);
  }
  return res;
}

}  // namespace macover
