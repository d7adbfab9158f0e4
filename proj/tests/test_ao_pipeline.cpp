#include <doctest.h>

#include <cmath>

#include "macover/ao_pipeline.hpp"
#include "frozen.hpp"
#include "oracles.hpp"

using namespace macover;
using doctest::Approx;

namespace {

void check_trace(const AoResult& r) {
  for (std::size_t j = 1; j < r.ao_trace.size(); ++j)
    CHECK(r.ao_trace[j] >= r.ao_trace[j - 1] - 1e-9);
}

}  // namespace

TEST_CASE("initial positions") {
  auto x = init_positions(ArrayConfig(3, 4.0, 1.0, 0.5));
  CHECK(x.coords() == std::vector<double>{1.0, 2.0, 3.0});
  x = init_positions(ArrayConfig(1, 2.0, 1.0, 0.5));
  CHECK(x.coords() == std::vector<double>{1.0});
  x = init_positions(ArrayConfig::from_carrier(8, 8 * kSpeedOfLight / 1e9, 1e9, 0.0));
  const double d = 8 * kSpeedOfLight / 1e9;
  for (int n = 1; n <= 8; ++n) CHECK(x[n - 1] == Approx(n * d / 9));
  CHECK_THROWS_WITH_AS(init_positions(ArrayConfig(4, 1.0, 1.0, 0.25)),
                       doctest::Contains("min_spacing"), InvalidArgument);
}

TEST_CASE("initial weights") {
  const double lambda = 0.3;
  const PositionVector x({0.1, 0.3, 0.55, 0.9, 1.2});
  const auto one = SampleGrid::from_angles({0.8});
  const auto w = init_weights(x, one, lambda, 100, 7);
  CHECK(min_gain(w, x, one, lambda) == Approx(5.0).epsilon(1e-3 / 5));

  const auto grid = SampleGrid::from_angles(oracle::angles_deg(0, 180, 61));
  CHECK(init_weights(x, grid, lambda, 1, 3).size() == 5);
  CHECK(init_weights(x, grid, lambda, 20, 3) == init_weights(x, grid, lambda, 20, 3));
}

TEST_CASE("normalize positions") {
  CHECK(normalize_positions(PositionVector({1, 2, 3})).coords() == std::vector<double>{0, 1, 2});
  CHECK(normalize_positions(PositionVector({0, 0.7})).coords() == std::vector<double>{0, 0.7});
  const PositionVector x({0.31, 0.9, 1.77});
  const auto y = normalize_positions(x);
  CHECK(y[2] - y[0] == x[2] - x[0]);
}

TEST_CASE("ao config validation") {
  AoConfig ao;
  CHECK_NOTHROW(ao.validate());
  ao.ao_tol = 0.0;
  CHECK_THROWS_AS(ao.validate(), InvalidArgument);
  ao = {};
  ao.randomization_trials = 0;
  CHECK_THROWS_AS(ao.validate(), InvalidArgument);
  ao = {};
  ao.rho = -1;
  CHECK_THROWS_AS(run_ao(ArrayConfig(2, 2.0, 1.0, 0.5), CoverageSpec::point(1.0), ao),
                  InvalidArgument);
}

TEST_CASE("single element") {
  const ArrayConfig cfg(1, 2.0, 1.0, 0.5);
  const auto spec = CoverageSpec::with_default_density({{0.2, 2.0}});
  const auto r = run_ao(cfg, spec, {});
  CHECK(r.min_gain == Approx(1.0));
  CHECK(r.iterations == 1);
  const auto m = run_mafab_baseline(cfg, spec, {});
  CHECK(m.min_gain == Approx(r.min_gain));
  CHECK(m.x == r.x);
}

TEST_CASE("single angle: every scheme reaches N") {
  const double lambda = kSpeedOfLight / 1e9;
  const ArrayConfig cfg(6, 8 * lambda, lambda, lambda / 2);
  const auto spec = CoverageSpec::point(oracle::deg(63));
  const auto ao = run_ao(cfg, spec, {});
  const auto fpa = run_fpa_baseline(cfg, spec, {});
  const auto mafab = run_mafab_baseline(cfg, spec, {});
  CHECK(ao.min_gain == Approx(6.0).epsilon(1e-3 / 6));
  CHECK(fpa.min_gain == Approx(6.0).epsilon(1e-3 / 6));
  CHECK(mafab.min_gain == Approx(6.0).epsilon(1e-3 / 6));
}

TEST_CASE("baselines keep their fixed block") {
  const ArrayConfig cfg(2, 2.0, 1.0, 0.5);
  const auto spec = CoverageSpec::with_default_density({{oracle::deg(40), oracle::deg(100)}});
  const auto fpa = run_fpa_baseline(cfg, spec, {});
  CHECK(fpa.x.coords() == std::vector<double>{0.0, 0.5});
  CHECK(fpa.position_traces.empty());
  check_trace(fpa);

  const auto mafab = run_mafab_baseline(cfg, spec, {});
  CHECK(mafab.weight_traces.empty());
  const auto w0 = init_weights(init_positions(cfg), discretize(spec), 1.0, 100, 0);
  CHECK(mafab.w == w0);
  check_trace(mafab);
}

TEST_CASE("two elements: within 0.05 of the exhaustive oracle") {
  const auto& s = frozen::kTwoElement[0];
  const int count = static_cast<int>(std::ceil(s.hi_deg - s.lo_deg)) + 1;
  const auto angles = oracle::angles_deg(s.lo_deg, s.hi_deg, count);
  const auto best = oracle::two_element_max_min(angles, 1.0, s.aperture, 0.5, 1e-2, oracle::deg(0.5));
  CHECK(best.value == Approx(s.optimum).epsilon(1e-12));

  const ArrayConfig cfg(2, s.aperture, 1.0, 0.5);
  const auto spec =
      CoverageSpec::with_default_density({{oracle::deg(s.lo_deg), oracle::deg(s.hi_deg)}});
  const auto r = run_ao(cfg, spec, {});
  CHECK(r.min_gain >= s.optimum - 0.05);
  CHECK(is_feasible(r.x, cfg).feasible);
  check_trace(r);
}

TEST_CASE("run_ao: monotone, deterministic, consistent") {
  const double lambda = 0.3;
  const ArrayConfig cfg(4, 8 * lambda, lambda, lambda / 2);
  const auto spec = CoverageSpec::with_default_density(
      {{oracle::deg(10), oracle::deg(50)}, {oracle::deg(120), oracle::deg(150)}});
  AoConfig ao;
  ao.seed = 17;
  const auto a = run_ao(cfg, spec, ao);
  const auto b = run_ao(cfg, spec, ao);
  check_trace(a);
  CHECK(a.ao_trace == b.ao_trace);
  CHECK(a.w == b.w);
  CHECK(a.x == b.x);
  CHECK(a.min_gain == b.min_gain);
  CHECK(a.seed == 17);
  CHECK(a.min_gain == min_gain(a.w, a.x, discretize(spec), lambda));
  CHECK(a.min_gain_db == Approx(10 * std::log10(a.min_gain)));
  CHECK(a.ao_trace.back() == a.min_gain);
  CHECK(is_feasible(a.x, cfg).feasible);
  CHECK(a.weight_traces.size() == static_cast<std::size_t>(a.iterations));
  CHECK(a.position_traces.size() == static_cast<std::size_t>(a.iterations));

  const auto cont = run_ao_from(cfg, discretize(spec), ao, a.w, a.x);
  CHECK(cont.min_gain >= a.min_gain);
}
