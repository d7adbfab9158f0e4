#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/spdlog.h>

#include "macover/compare.hpp"
#include "macover/experiment.hpp"

namespace fs = std::filesystem;
using namespace macover;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> fine_factor;
};

ExperimentConfig load_config(const std::string& path, const Overrides& o) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str());
  if (o.seed) cfg.ao.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.fine_factor) {
    if (*o.fine_factor < 2) throw InvalidArgument("--fine-factor must be >= 2");
    cfg.fine_audit_factor = *o.fine_factor;
  }
  return cfg;
}

void print_manifest(const RunManifest& m) {
  std::cout << "config_hash " << m.config_hash << "  seed " << m.seed << '\n';
  for (const auto& s : m.schemes) {
    std::cout << "  " << std::left << std::setw(9) << to_string(s.scheme);
    if (!s.completed) {
      std::cout << "FAILED (" << s.error << ")\n";
      continue;
    }
    std::cout << std::fixed << std::setprecision(3) << "max-min " << std::setw(8)
              << s.min_gain_db << " dB  aperture " << s.aperture_m << " m  iters "
              << s.iterations << "  fine-grid gap " << s.audit.gap_db << " dB  "
              << std::setprecision(2) << s.wall_time_s << " s" << std::defaultfloat << '\n';
    for (const auto& d : s.diagnostics) spdlog::warn("{}: {}", to_string(s.scheme), d);
  }
}

int cmd_run(const std::string& config, const Overrides& o) {
  const ExperimentConfig cfg = load_config(config, o);
  spdlog::info("running {} scheme(s), output in {}", cfg.schemes.size(), cfg.output_dir);
  const RunManifest m = run_experiment(cfg, cfg.output_dir);
  print_manifest(m);
  for (const auto& s : m.schemes) {
    if (!s.completed) spdlog::error("{} failed at the {} stage", to_string(s.scheme), s.failed_stage);
    if (!s.monotone) spdlog::error("{}: AO trace is not monotone", to_string(s.scheme));
  }
  return m.all_ok() ? kOk : kFailed;
}

int cmd_sweep(const std::string& config, const std::string& param,
              const std::vector<double>& values, const Overrides& o) {
  const ExperimentConfig cfg = load_config(config, o);
  const fs::path out = cfg.output_dir;
  spdlog::info("sweeping {} over {} values, output in {}", param, values.size(), out.string());
  const SweepResult s = run_sweep(cfg, param, values, out);
  write_sweep_csv(out / "sweep.csv", config_hash(cfg), s);

  std::cout << std::left << std::setw(10) << param;
  for (Scheme sc : s.schemes) std::cout << std::setw(11) << to_string(sc);
  std::cout << '\n';
  bool ok = true;
  for (const auto& r : s.rows) {
    std::cout << std::setw(10) << r.value << std::fixed << std::setprecision(3);
    for (const auto& g : r.min_gain_db) {
      if (g) std::cout << std::setw(11) << *g;
      else std::cout << std::setw(11) << "failed";
      ok = ok && g.has_value();
    }
    std::cout << (r.continued ? "  (warm start)" : "") << std::defaultfloat << '\n';
  }
  return ok ? kOk : kFailed;
}

int cmd_audit(const std::string& dir) {
  bool ok = true;
  for (const auto& c : audit_run(dir)) {
    std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
    std::cout << '\n';
    ok = ok && c.pass;
  }
  return ok ? kOk : kFailed;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::optional<std::string>& csv) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  const Comparison c = compare_schemes(paths);
  std::cout << format_comparison(c);
  if (csv) write_comparison_csv(*csv, c);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::info);
  if (const char* lvl = std::getenv("MACOVER_LOG")) spdlog::cfg::helpers::load_levels(lvl);

  CLI::App app{"Beam coverage with movable antennas: run, sweep, audit and compare experiments"};
  app.require_subcommand(1);

  Overrides o;
  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Override the config seed");
    sub->add_option("--out", o.out, "Override output_dir");
    sub->add_option("--fine-factor", o.fine_factor, "Override fine_audit_factor");
  };

  std::string config;
  auto* run = app.add_subcommand("run", "Run the configured schemes");
  run->add_option("config", config, "Config file")->required();
  add_overrides(run);

  std::string param = "theta_max";
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Sweep the upper edge of the single region");
  sweep->add_option("config", config, "Config file")->required();
  sweep->add_option("--param", param, "Swept parameter (theta_max)");
  sweep->add_option("--values", values, "Values in degrees")->required();
  add_overrides(sweep);

  std::string result_dir;
  auto* audit = app.add_subcommand("audit", "Re-check a result directory");
  audit->add_option("result-dir", result_dir, "Directory written by run")->required();

  std::vector<std::string> dirs;
  std::optional<std::string> csv;
  auto* compare = app.add_subcommand("compare", "Tabulate schemes across result directories");
  compare->add_option("dirs", dirs, "Result directories")->required();
  compare->add_option("--csv", csv, "Also write the table as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, o);
    if (*sweep) return cmd_sweep(config, param, values, o);
    if (*audit) return cmd_audit(result_dir);
    if (*compare) return cmd_compare(dirs, csv);
  } catch (const ConfigError& e) {
    for (const auto& err : e.errors()) spdlog::error("{}", err);
    return kUsage;
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailed;
  }
  return kUsage;
}
