#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "macover/array_model.hpp"
#include "macover/convex.hpp"

namespace macover {

/// Local point of the rank-one penalty linearization.
struct PenaltyState {
  double rho = 0.0;
  Eigen::MatrixXcd v_current;
  Eigen::VectorXcd s_current;   // unit principal eigenvector of v_current
  double sigma_current = 0.0;   // its eigenvalue

  static PenaltyState at(double rho, const Eigen::MatrixXcd& v);
};

/// f(V) = Tr(V) - sigma_max(V). Zero exactly on rank-one PSD matrices.
double rank_penalty(const Eigen::MatrixXcd& v);

/// f~(V) = Tr(V) - sigma(V_i) - Re<s s^H, V - V_i>, an affine majorizer of f
/// that is tight at V_i.
struct LinearizedPenalty {
  Eigen::MatrixXcd anchor;
  Eigen::VectorXcd s;
  double sigma = 0.0;

  double evaluate(const Eigen::MatrixXcd& v) const;
};

LinearizedPenalty linearize_penalty(const PenaltyState& state);

struct Extraction {
  WeightVector w;
  bool degenerate = false;   // top eigenvalue gap below 1e-6
  double eigengap = 0.0;
};

/// Phases of the scaled principal eigenvector of V.
Extraction extract_weights(const Eigen::MatrixXcd& v);

/// Best of `trials` candidates (1/sqrt(N)) exp(j arg(U Lambda^{1/2} r)) with
/// r ~ CN(0, I), scored by min_gain on the grid. Each trial draws from its own
/// stream derived from (seed, trial), so the result does not depend on the
/// thread count.
WeightVector gaussian_randomization(const Eigen::MatrixXcd& v,
                                    const PositionVector& x,
                                    const SampleGrid& grid, double wavelength,
                                    int trials, std::uint64_t seed);

/// Gain matrices R_l = a_l a_l^H for every grid angle.
std::vector<Eigen::MatrixXcd> gain_matrices(const PositionVector& x,
                                            const SampleGrid& grid,
                                            double wavelength);

struct WeightTraceRecord {
  int iteration = 0;
  double t = 0.0;   // min_l Tr(R_l V)
  double f = 0.0;   // rank_penalty(V)
  double v = 0.0;   // t - rho f
};

struct WeightOptions {
  double rho = 20.0;
  double sca_tol = 0.01;
  int max_iter = 100;
  double rank_tol = 1e-3;
  bool rho_ramp = false;   // x2 every 10 iterations, capped at 1e4
  int randomization_trials = 100;
  std::uint64_t seed = 0;
  SolverTolerances solver;
};

struct WeightResult {
  WeightVector w;
  Eigen::MatrixXcd v_final;
  double rank_penalty = 0.0;
  bool rank_one = false;
  bool degenerate = false;      // extraction fell back to randomization
  bool ascent_guard = false;    // an iterate lowered v and was discarded
  int iterations = 0;
  std::vector<WeightTraceRecord> trace;
};

/// SCA over the lifted weight matrix for fixed positions, starting from
/// V = w_init w_init^H. Throws SolverError if an SDP solve does not reach
/// optimality.
WeightResult sca_weights(const PositionVector& x, const SampleGrid& grid,
                         double wavelength, const WeightVector& w_init,
                         const WeightOptions& opt = {});

}  // namespace macover
