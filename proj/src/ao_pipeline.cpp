#include "macover/ao_pipeline.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace macover {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t stage_seed(std::uint64_t seed, int iteration) {
  return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(iteration + 1));
}

struct Blocks {
  bool weights = true;
  bool positions = true;
};

void finish(AoResult& r, const SampleGrid& grid, double wavelength) {
  r.min_gain = min_gain(r.w, r.x, grid, wavelength);
  r.min_gain_db = to_db(r.min_gain);
}

AoResult alternate(const ArrayConfig& cfg, const SampleGrid& grid, const AoConfig& ao,
                   const WeightVector& w0, const PositionVector& x0, Blocks blocks,
                   AoResult r) {
  const double lambda = cfg.wavelength();
  r.w = w0;
  r.x = x0;
  r.seed = ao.seed;
  double gain = min_gain(w0, x0, grid, lambda);
  r.ao_trace.push_back(gain);

  PositionOptions popt;
  popt.sca_tol = ao.sca_tol_x;
  popt.max_iter = ao.max_sca_iters;
  popt.solver = ao.solver;

  for (int j = 1; j <= ao.max_ao_iters; ++j) {
    r.iterations = j;
    const double start_gain = gain;

    if (blocks.weights) {
      WeightOptions wopt;
      wopt.rho = ao.rho;
      wopt.sca_tol = ao.sca_tol_v;
      wopt.max_iter = ao.max_sca_iters;
      wopt.randomization_trials = ao.randomization_trials;
      wopt.seed = stage_seed(ao.seed, j);
      wopt.solver = ao.solver;
      const auto t0 = Clock::now();
      WeightResult wr;
      try {
        wr = sca_weights(r.x, grid, lambda, r.w, wopt);
      } catch (const SolverError& e) {
        r.wall_time.weights_s += seconds_since(t0);
        finish(r, grid, lambda);
        throw StageError(AoStage::Weights, e.what(), r);
      }
      r.wall_time.weights_s += seconds_since(t0);
      r.weight_traces.push_back(wr.trace);
      r.rank_penalty = wr.rank_penalty;
      r.rank_one = wr.rank_one;
      const double g = min_gain(wr.w, r.x, grid, lambda);
      if (g >= gain) {
        r.w = wr.w;
        gain = g;
      } else {
        r.stage_rejected = true;
        std::ostringstream os;
        os << "AO iteration " << j << ": weight stage lowered min gain by " << gain - g
           << " (rank penalty " << wr.rank_penalty << "), kept previous weights";
        r.diagnostics.push_back(os.str());
      }
    }

    if (blocks.positions) {
      const auto t0 = Clock::now();
      PositionResult pr;
      try {
        pr = sca_positions(r.w, r.x, grid, cfg, popt);
      } catch (const SolverError& e) {
        r.wall_time.positions_s += seconds_since(t0);
        finish(r, grid, lambda);
        throw StageError(AoStage::Positions, e.what(), r);
      }
      r.wall_time.positions_s += seconds_since(t0);
      r.position_traces.push_back(pr.trace);
      const double g = min_gain(r.w, pr.x, grid, lambda);
      if (g >= gain) {
        r.x = pr.x;
        gain = g;
      } else {
        r.stage_rejected = true;
        std::ostringstream os;
        os << "AO iteration " << j << ": position stage lowered min gain by " << gain - g
           << ", kept previous positions";
        r.diagnostics.push_back(os.str());
      }
    }

    r.ao_trace.push_back(gain);
    if (gain - start_gain < ao.ao_tol) break;
  }
  finish(r, grid, lambda);
  return r;
}

}  // namespace

void AoConfig::validate() const {
  if (!(rho >= 0.0)) throw InvalidArgument("rho must be >= 0");
  if (!(ao_tol > 0.0)) throw InvalidArgument("ao_tol must be > 0");
  if (!(sca_tol_v > 0.0)) throw InvalidArgument("sca_tol_v must be > 0");
  if (!(sca_tol_x > 0.0)) throw InvalidArgument("sca_tol_x must be > 0");
  if (max_ao_iters < 1) throw InvalidArgument("max_ao_iters must be >= 1");
  if (max_sca_iters < 1) throw InvalidArgument("max_sca_iters must be >= 1");
  if (randomization_trials < 1) throw InvalidArgument("randomization_trials must be >= 1");
}

std::string to_string(AoStage s) {
  switch (s) {
    case AoStage::Init: return "init";
    case AoStage::Weights: return "weights";
    case AoStage::Positions: return "positions";
  }
  return "unknown";
}

PositionVector init_positions(const ArrayConfig& cfg) {
  const int n = cfg.n_antennas();
  const double step = cfg.aperture() / (n + 1);
  if (n > 1 && step < cfg.min_spacing() - kPositionTol) {
    std::ostringstream os;
    os << "equal spacing D/(N+1) = " << step << " m is below min_spacing "
       << cfg.min_spacing() << " m; use a smaller min_spacing or a larger aperture";
    throw InvalidArgument(os.str());
  }
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (i + 1) * step;
  return PositionVector(std::move(x));
}

WeightVector init_weights(const PositionVector& x0, const SampleGrid& grid, double wavelength,
                          int trials, std::uint64_t seed, const SolverTolerances& tol) {
  SdpProblem p;
  p.dim = static_cast<int>(x0.size());
  p.diag_value = 1.0 / p.dim;
  p.gain_constraints = gain_matrices(x0, grid, wavelength);
  const SdpSolution sol = solve_sdp(p, tol);
  if (!sol.report.ok())
    throw SolverError("relaxation at the initial positions failed: " +
                          to_string(sol.report.status),
                      sol.report);
  return gaussian_randomization(sol.v, x0, grid, wavelength, trials, seed);
}

AoResult run_ao_from(const ArrayConfig& cfg, const SampleGrid& grid, const AoConfig& ao,
                     const WeightVector& w0, const PositionVector& x0) {
  ao.validate();
  return alternate(cfg, grid, ao, w0, x0, {}, AoResult{});
}

namespace {

AoResult run_scheme(const ArrayConfig& cfg, const CoverageSpec& spec, const AoConfig& ao,
                    const PositionVector& x0, const PositionVector& weight_site,
                    Blocks blocks) {
  ao.validate();
  const SampleGrid grid = discretize(spec);
  AoResult r;
  r.seed = ao.seed;
  const auto t0 = Clock::now();
  WeightVector w0;
  try {
    w0 = init_weights(weight_site, grid, cfg.wavelength(), ao.randomization_trials, ao.seed,
                      ao.solver);
  } catch (const SolverError& e) {
    r.wall_time.init_s = seconds_since(t0);
    r.x = x0;
    throw StageError(AoStage::Init, e.what(), r);
  }
  r.wall_time.init_s = seconds_since(t0);
  return alternate(cfg, grid, ao, w0, x0, blocks, std::move(r));
}

}  // namespace

AoResult run_ao(const ArrayConfig& cfg, const CoverageSpec& spec, const AoConfig& ao) {
  const PositionVector x0 = init_positions(cfg);
  return run_scheme(cfg, spec, ao, x0, x0, {true, true});
}

AoResult run_fpa_baseline(const ArrayConfig& cfg, const CoverageSpec& spec,
                          const AoConfig& ao) {
  const int n = cfg.n_antennas();
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = i * cfg.wavelength() / 2.0;
  const PositionVector fpa(std::move(x));
  return run_scheme(cfg, spec, ao, fpa, fpa, {true, false});
}

AoResult run_mafab_baseline(const ArrayConfig& cfg, const CoverageSpec& spec,
                            const AoConfig& ao) {
  const PositionVector x0 = init_positions(cfg);
  return run_scheme(cfg, spec, ao, x0, x0, {false, true});
}

PositionVector normalize_positions(const PositionVector& x) {
  if (x.size() == 0) return x;
  std::vector<double> y = x.coords();
  const double shift = y.front();
  for (double& v : y) v -= shift;
  return PositionVector(std::move(y));
}

}  // namespace macover
