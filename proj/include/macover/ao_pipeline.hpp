#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "macover/array_model.hpp"
#include "macover/convex.hpp"
#include "macover/position_optimizer.hpp"
#include "macover/weight_optimizer.hpp"

namespace macover {

struct AoConfig {
  double rho = 20.0;
  double ao_tol = 1e-5;
  double sca_tol_v = 0.01;
  double sca_tol_x = 0.01;
  int max_ao_iters = 500;
  int randomization_trials = 100;
  std::uint64_t seed = 0;
  int max_sca_iters = 100;
  SolverTolerances solver;

  void validate() const;
};

struct StageTimes {
  double init_s = 0.0;
  double weights_s = 0.0;
  double positions_s = 0.0;
};

struct AoResult {
  WeightVector w;
  PositionVector x;
  double min_gain = 0.0;
  double min_gain_db = 0.0;
  std::vector<double> ao_trace;   // entry 0 is the initial point
  std::vector<std::vector<WeightTraceRecord>> weight_traces;
  std::vector<std::vector<PositionTraceRecord>> position_traces;
  StageTimes wall_time;
  int iterations = 0;
  double rank_penalty = 0.0;      // of the last weight stage
  bool rank_one = true;
  bool stage_rejected = false;    // some stage output lowered the min gain
  std::uint64_t seed = 0;
  std::vector<std::string> diagnostics;
};

enum class AoStage { Init, Weights, Positions };

std::string to_string(AoStage s);

/// A stage failure; partial() holds everything computed before it.
class StageError : public std::runtime_error {
 public:
  StageError(AoStage stage, const std::string& what, AoResult partial)
      : std::runtime_error(to_string(stage) + " stage: " + what),
        stage_(stage),
        partial_(std::move(partial)) {}
  AoStage stage() const { return stage_; }
  const AoResult& partial() const { return partial_; }

 private:
  AoStage stage_;
  AoResult partial_;
};

/// Equal spacing x_n = n D / (N + 1).
PositionVector init_positions(const ArrayConfig& cfg);

/// Gaussian randomization around the plain relaxation at x0.
WeightVector init_weights(const PositionVector& x0, const SampleGrid& grid, double wavelength,
                          int trials, std::uint64_t seed, const SolverTolerances& tol = {});

AoResult run_ao(const ArrayConfig& cfg, const CoverageSpec& spec, const AoConfig& ao);

/// Alternation from an explicit starting point.
AoResult run_ao_from(const ArrayConfig& cfg, const SampleGrid& grid, const AoConfig& ao,
                     const WeightVector& w0, const PositionVector& x0);

/// Half-wavelength array starting at 0; weights only.
AoResult run_fpa_baseline(const ArrayConfig& cfg, const CoverageSpec& spec, const AoConfig& ao);

/// Initial weights held fixed; positions only.
AoResult run_mafab_baseline(const ArrayConfig& cfg, const CoverageSpec& spec,
                            const AoConfig& ao);

/// Shift so that x_1 = 0.
PositionVector normalize_positions(const PositionVector& x);

}  // namespace macover
