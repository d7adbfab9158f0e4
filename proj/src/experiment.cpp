#include "macover/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <semaphore>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace macover {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kMonotoneTol = 1e-9;
constexpr double kRoundTripTol = 1e-9;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << std::setprecision(17);
  return os;
}

void header(std::ostream& os, const std::string& kind, const std::string& hash,
            const std::string& units) {
  os << "# macover " << kind << '\n'
     << "# config_hash " << hash << '\n'
     << "# units " << units << '\n';
}

// Returns the data rows (split on commas) after the header and column line.
std::vector<std::vector<std::string>> read_csv(const fs::path& file, CsvHeader* hdr,
                                               const std::string& kind, std::size_t columns) {
  std::ifstream is(file);
  if (!is) throw FormatError("cannot read " + file.string());
  CsvHeader h;
  std::vector<std::vector<std::string>> rows;
  bool saw_columns = false;
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "macover") ls >> h.kind;
      else if (key == "config_hash") ls >> h.config_hash;
      continue;
    }
    if (!saw_columns) {
      saw_columns = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (cells.size() != columns)
      throw FormatError(file.string() + ": expected " + std::to_string(columns) +
                        " columns, got " + std::to_string(cells.size()));
    rows.push_back(std::move(cells));
  }
  if (h.kind != kind)
    throw FormatError(file.string() + ": expected a " + kind + " file, found '" + h.kind + "'");
  if (hdr) *hdr = h;
  return rows;
}

double number(const std::string& s, const fs::path& file) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(file.string() + ": bad number '" + s + "'");
  }
}

bool monotone(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] < trace[i - 1] - kMonotoneTol) return false;
  return true;
}

double aperture(const PositionVector& x) {
  return x.size() == 0 ? 0.0 : x.coords().back() - x.coords().front();
}

struct SchemeRun {
  SchemeSummary summary;
  std::optional<AoResult> result;
};

SchemeRun execute_scheme(Scheme s, const ExperimentConfig& cfg, const ArrayConfig& array,
                         const CoverageSpec& spec, const fs::path& dir,
                         const std::string& hash) {
  SchemeRun run;
  auto& sum = run.summary;
  sum.scheme = s;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    run.result = run_scheme(s, array, spec, cfg.ao);
    sum.completed = true;
  } catch (const StageError& e) {
    run.result = e.partial();
    sum.error = e.what();
    sum.failed_stage = to_string(e.stage());
  } catch (const std::exception& e) {
    sum.error = e.what();
  }
  sum.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!run.result) return run;

  const AoResult& r = *run.result;
  const double lambda = array.wavelength();
  const SampleGrid grid = discretize(spec);
  const bool have_weights = r.w.size() == r.x.size() && r.x.size() > 0;
  if (have_weights) {
    sum.min_gain = min_gain(r.w, r.x, grid, lambda);
    sum.min_gain_db = to_db(sum.min_gain);
    sum.audit = audit_fine_grid(r.w, r.x, spec, lambda, cfg.fine_audit_factor);
  }
  sum.aperture_m = aperture(r.x);
  sum.iterations = r.iterations;
  sum.rank_penalty = r.rank_penalty;
  sum.stage_rejected = r.stage_rejected;
  sum.monotone = monotone(r.ao_trace);
  sum.diagnostics = r.diagnostics;

  const SchemeFiles files = SchemeFiles::in(dir, s);
  if (r.x.size() > 0) write_positions_csv(files.positions, hash, r.x, lambda);
  if (have_weights) {
    write_weights_csv(files.weights, hash, r.w);
    write_pattern_csv(files.pattern, hash, r.w, r.x, lambda, cfg.fine_audit_factor);
  }
  write_trace_csv(files.trace, hash, r);
  return run;
}

json to_json(const FineAudit& a) {
  return {{"coarse_min", a.coarse_min}, {"fine_min", a.fine_min}, {"gap_db", a.gap_db}};
}

json to_json(const SchemeSummary& s) {
  return {{"scheme", to_string(s.scheme)},
          {"completed", s.completed},
          {"error", s.error},
          {"failed_stage", s.failed_stage},
          {"min_gain", s.min_gain},
          {"min_gain_db", s.min_gain_db},
          {"aperture_m", s.aperture_m},
          {"iterations", s.iterations},
          {"wall_time_s", s.wall_time_s},
          {"rank_penalty", s.rank_penalty},
          {"stage_rejected", s.stage_rejected},
          {"monotone", s.monotone},
          {"fine_audit", to_json(s.audit)},
          {"diagnostics", s.diagnostics}};
}

SchemeSummary summary_from_json(const json& j) {
  SchemeSummary s;
  const auto scheme = parse_scheme(j.at("scheme").get<std::string>());
  if (!scheme) throw FormatError("manifest names an unknown scheme");
  s.scheme = *scheme;
  s.completed = j.at("completed").get<bool>();
  s.error = j.at("error").get<std::string>();
  s.failed_stage = j.at("failed_stage").get<std::string>();
  s.min_gain = j.at("min_gain").get<double>();
  s.min_gain_db = j.at("min_gain_db").get<double>();
  s.aperture_m = j.at("aperture_m").get<double>();
  s.iterations = j.at("iterations").get<int>();
  s.wall_time_s = j.at("wall_time_s").get<double>();
  s.rank_penalty = j.at("rank_penalty").get<double>();
  s.stage_rejected = j.at("stage_rejected").get<bool>();
  s.monotone = j.at("monotone").get<bool>();
  const auto& a = j.at("fine_audit");
  s.audit = {a.at("coarse_min").get<double>(), a.at("fine_min").get<double>(),
             a.at("gap_db").get<double>()};
  s.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  return s;
}

struct Execution {
  RunManifest manifest;
  std::vector<std::optional<AoResult>> results;   // parallel to manifest.schemes
};

Execution execute(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const ArrayConfig array = cfg.array();
  const CoverageSpec spec = cfg.coverage();
  fs::create_directories(out_dir);
  Execution ex;
  RunManifest& m = ex.manifest;
  m.config_text = to_text(cfg);
  m.config_hash = config_hash(cfg);
  m.seed = cfg.ao.seed;
  m.started = utc_now();

  std::vector<std::future<SchemeRun>> jobs;
  for (Scheme s : cfg.schemes)
    jobs.push_back(std::async(std::launch::async, execute_scheme, s, std::cref(cfg),
                              std::cref(array), std::cref(spec), std::cref(out_dir),
                              std::cref(m.config_hash)));
  for (auto& j : jobs) {
    SchemeRun run = j.get();
    m.schemes.push_back(std::move(run.summary));
    ex.results.push_back(std::move(run.result));
  }
  m.finished = utc_now();
  write_manifest(out_dir / "manifest.json", m);
  return ex;
}

std::string value_label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

SampleGrid refine(const CoverageSpec& spec, int factor) {
  if (factor < 1) throw InvalidArgument("refinement factor must be >= 1");
  std::vector<int> samples = spec.samples();
  for (int& l : samples)
    if (l > 1) l = (l - 1) * factor + 1;
  return discretize(CoverageSpec(spec.regions(), std::move(samples)));
}

FineAudit audit_fine_grid(const WeightVector& w, const PositionVector& x,
                          const CoverageSpec& spec, double wavelength, int factor) {
  if (factor < 2) throw InvalidArgument("fine_audit_factor must be >= 2");
  FineAudit a;
  a.coarse_min = min_gain(w, x, discretize(spec), wavelength);
  a.fine_min = min_gain(w, x, refine(spec, factor), wavelength);
  a.gap_db = to_db(a.coarse_min) - to_db(a.fine_min);
  return a;
}

const SchemeSummary* RunManifest::find(Scheme s) const {
  for (const auto& x : schemes)
    if (x.scheme == s) return &x;
  return nullptr;
}

bool RunManifest::all_ok() const {
  for (const auto& s : schemes)
    if (!s.completed || !s.monotone) return false;
  return !schemes.empty();
}

void write_manifest(const fs::path& file, const RunManifest& m) {
  json j = {{"config_text", m.config_text},
            {"config_hash", m.config_hash},
            {"version", m.version},
            {"seed", m.seed},
            {"started", m.started},
            {"finished", m.finished}};
  j["schemes"] = json::array();
  for (const auto& s : m.schemes) j["schemes"].push_back(to_json(s));
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << j.dump(2) << '\n';
}

RunManifest read_manifest(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw FormatError("cannot read " + file.string());
  try {
    const json j = json::parse(is);
    RunManifest m;
    m.config_text = j.at("config_text").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    for (const auto& s : j.at("schemes")) m.schemes.push_back(summary_from_json(s));
    return m;
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

SchemeFiles SchemeFiles::in(const fs::path& dir, Scheme s) {
  const std::string n = to_string(s);
  return {dir / (n + "_pattern.csv"), dir / (n + "_positions.csv"),
          dir / (n + "_weights.csv"), dir / (n + "_trace.csv")};
}

AoResult run_scheme(Scheme s, const ArrayConfig& cfg, const CoverageSpec& spec,
                    const AoConfig& ao) {
  switch (s) {
    case Scheme::Proposed: return run_ao(cfg, spec, ao);
    case Scheme::Fpa: return run_fpa_baseline(cfg, spec, ao);
    case Scheme::Mafab: return run_mafab_baseline(cfg, spec, ao);
  }
  throw InvalidArgument("unknown scheme");
}

RunManifest run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  return execute(cfg, out_dir).manifest;
}

void write_positions_csv(const fs::path& file, const std::string& hash,
                         const PositionVector& x, double wavelength) {
  auto os = open_out(file);
  header(os, "positions", hash, "x_m meters, x_lambda wavelengths; shifted so x_1 = 0");
  os << "index,x_m,x_lambda\n";
  const PositionVector n = normalize_positions(x);
  for (std::size_t i = 0; i < n.size(); ++i)
    os << i + 1 << ',' << n[i] << ',' << n[i] / wavelength << '\n';
}

void write_weights_csv(const fs::path& file, const std::string& hash, const WeightVector& w) {
  auto os = open_out(file);
  header(os, "weights", hash, "phase_rad radians; modulus 1/sqrt(N)");
  os << "index,phase_rad\n";
  for (std::size_t i = 0; i < w.size(); ++i) os << i + 1 << ',' << w.phases()[i] << '\n';
}

void write_pattern_csv(const fs::path& file, const std::string& hash, const WeightVector& w,
                       const PositionVector& x, double wavelength, int factor) {
  const int n = 180 * factor + 1;
  std::vector<double> deg(static_cast<std::size_t>(n)), rad(deg.size());
  for (int i = 0; i < n; ++i) {
    deg[static_cast<std::size_t>(i)] = static_cast<double>(i) / factor;
    rad[static_cast<std::size_t>(i)] = deg_to_rad(deg[static_cast<std::size_t>(i)]);
  }
  const std::vector<double> g = beam_gains(w, x, rad, wavelength);
  auto os = open_out(file);
  header(os, "pattern", hash, "angle_deg degrees, gain_linear, gain_db = 10 log10(gain)");
  os << "angle_deg,gain_linear,gain_db\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    os << deg[i] << ',' << g[i] << ',' << to_db(g[i]) << '\n';
}

void write_trace_csv(const fs::path& file, const std::string& hash, const AoResult& r) {
  auto os = open_out(file);
  header(os, "trace", hash,
         "objective: ao = min gain, weights = t - rho f(V), positions = surrogate optimum");
  os << "stage,ao_iteration,inner_iteration,objective,min_gain\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < r.ao_trace.size(); ++j)
    os << "ao," << j << ",0," << r.ao_trace[j] << ',' << r.ao_trace[j] << '\n';
  for (std::size_t j = 0; j < r.weight_traces.size(); ++j)
    for (const auto& rec : r.weight_traces[j])
      os << "weights," << j + 1 << ',' << rec.iteration << ',' << rec.v << ',' << nan << '\n';
  for (std::size_t j = 0; j < r.position_traces.size(); ++j)
    for (const auto& rec : r.position_traces[j])
      os << "positions," << j + 1 << ',' << rec.iteration << ',' << rec.surrogate_t << ','
         << rec.min_gain << '\n';
}

PositionVector read_positions_csv(const fs::path& file, CsvHeader* header) {
  std::vector<double> x;
  for (const auto& row : read_csv(file, header, "positions", 3)) x.push_back(number(row[1], file));
  try {
    return PositionVector(std::move(x));
  } catch (const InvalidArgument& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

WeightVector read_weights_csv(const fs::path& file, CsvHeader* header) {
  std::vector<double> p;
  for (const auto& row : read_csv(file, header, "weights", 2)) p.push_back(number(row[1], file));
  return WeightVector(std::move(p));
}

std::vector<PatternSample> read_pattern_csv(const fs::path& file, CsvHeader* header) {
  std::vector<PatternSample> out;
  for (const auto& row : read_csv(file, header, "pattern", 3))
    out.push_back({number(row[0], file), number(row[1], file), number(row[2], file)});
  return out;
}

std::vector<AuditCheck> audit_run(const fs::path& dir) {
  std::vector<AuditCheck> checks;
  auto add = [&](std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  };
  const RunManifest m = read_manifest(dir / "manifest.json");
  ExperimentConfig cfg;
  try {
    cfg = parse_config(m.config_text);
  } catch (const ConfigError& e) {
    add("config snapshot parses", false, e.what());
    return checks;
  }
  add("config snapshot parses", true, "");
  const std::string hash = config_hash(cfg);
  add("config hash", hash == m.config_hash, "manifest " + m.config_hash + ", recomputed " + hash);

  const ArrayConfig array = cfg.array();
  const CoverageSpec spec = cfg.coverage();
  const SampleGrid grid = discretize(spec);
  const double lambda = array.wavelength();
  for (const auto& s : m.schemes) {
    const std::string n = to_string(s.scheme);
    add(n + " completed", s.completed, s.error);
    add(n + " monotone trace", s.monotone, "");
    if (!s.completed) continue;
    const SchemeFiles f = SchemeFiles::in(dir, s.scheme);
    try {
      CsvHeader hp, hw, hpat;
      const PositionVector x = read_positions_csv(f.positions, &hp);
      const WeightVector w = read_weights_csv(f.weights, &hw);
      (void)read_pattern_csv(f.pattern, &hpat);
      const bool hashes = hp.config_hash == hash && hw.config_hash == hash &&
                          hpat.config_hash == hash;
      add(n + " file hashes", hashes, "");
      const double g = min_gain(w, x, grid, lambda);
      std::ostringstream os;
      os << std::setprecision(17) << "manifest " << s.min_gain << ", files " << g;
      add(n + " round-trip min gain", std::abs(g - s.min_gain) <= kRoundTripTol, os.str());
      const FineAudit a = audit_fine_grid(w, x, spec, lambda, cfg.fine_audit_factor);
      std::ostringstream fa;
      fa << "coarse " << to_db(a.coarse_min) << " dB, fine " << to_db(a.fine_min)
         << " dB, gap " << a.gap_db << " dB";
      add(n + " fine-grid audit", std::abs(a.fine_min - s.audit.fine_min) <= kRoundTripTol,
          fa.str());
    } catch (const std::exception& e) {
      add(n + " files readable", false, e.what());
    }
  }
  return checks;
}

SweepResult run_sweep(const ExperimentConfig& base, const std::string& param,
                      const std::vector<double>& values, const fs::path& out_dir) {
  if (param != "theta_max") throw InvalidArgument("only theta_max can be swept, got '" + param + "'");
  if (base.regions.size() != 1) throw InvalidArgument("a theta_max sweep needs exactly one region");
  if (values.empty()) throw InvalidArgument("sweep needs at least one value");

  std::vector<ExperimentConfig> cfgs;
  for (double v : values) {
    ExperimentConfig c = base;
    c.regions[0].max_deg = v;
    c.regions[0].samples.reset();
    if (!(v > c.regions[0].min_deg) || v > 180.0)
      throw InvalidArgument("theta_max " + value_label(v) + " leaves (" +
                            value_label(c.regions[0].min_deg) + ", 180]");
    cfgs.push_back(std::move(c));
  }
  auto dir_for = [&](double v) { return out_dir / ("theta_max_" + value_label(v)); };

  std::counting_semaphore<> slots(std::max<std::ptrdiff_t>(1, std::thread::hardware_concurrency()));
  std::vector<std::future<Execution>> jobs;
  for (std::size_t i = 0; i < cfgs.size(); ++i)
    jobs.push_back(std::async(std::launch::async, [&, i] {
      slots.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{slots};
      return execute(cfgs[i], dir_for(values[i]));
    }));
  std::vector<Execution> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  SweepResult res;
  res.schemes = base.schemes;
  res.rows.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) res.rows[i].value = values[i];

  // Warm starts for the proposed scheme, widest region first.
  const auto pit = std::find(base.schemes.begin(), base.schemes.end(), Scheme::Proposed);
  if (pit != base.schemes.end()) {
    const auto k = static_cast<std::size_t>(pit - base.schemes.begin());
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] > values[b]; });
    const AoResult* wider = nullptr;
    double wider_value = 0.0;
    for (std::size_t i : order) {
      Execution& ex = runs[i];
      auto& slot = ex.results[k];
      SchemeSummary& sum = ex.manifest.schemes[k];
      if (wider && sum.completed) {
        const ExperimentConfig& c = cfgs[i];
        const ArrayConfig array = c.array();
        const CoverageSpec spec = c.coverage();
        try {
          AoResult warm = run_ao_from(array, discretize(spec), c.ao, wider->w, wider->x);
          if (warm.min_gain > slot->min_gain) {
            const auto t0 = sum.wall_time_s;
            const fs::path dir = dir_for(values[i]);
            const SchemeFiles f = SchemeFiles::in(dir, Scheme::Proposed);
            const double lambda = array.wavelength();
            write_positions_csv(f.positions, ex.manifest.config_hash, warm.x, lambda);
            write_weights_csv(f.weights, ex.manifest.config_hash, warm.w);
            write_pattern_csv(f.pattern, ex.manifest.config_hash, warm.w, warm.x, lambda,
                              c.fine_audit_factor);
            write_trace_csv(f.trace, ex.manifest.config_hash, warm);
            sum.min_gain = warm.min_gain;
            sum.min_gain_db = warm.min_gain_db;
            sum.aperture_m = aperture(warm.x);
            sum.iterations = warm.iterations;
            sum.rank_penalty = warm.rank_penalty;
            sum.stage_rejected = warm.stage_rejected;
            sum.monotone = monotone(warm.ao_trace);
            sum.audit = audit_fine_grid(warm.w, warm.x, spec, lambda, c.fine_audit_factor);
            sum.diagnostics = warm.diagnostics;
            sum.diagnostics.push_back("warm-started from theta_max = " +
                                      value_label(wider_value) + " solution");
            sum.wall_time_s = t0;
            slot = std::move(warm);
            res.rows[i].continued = true;
            write_manifest(dir / "manifest.json", ex.manifest);
          }
        } catch (const StageError&) {
          // The cold-start result stands.
        }
      }
      if (sum.completed) {
        wider = &*slot;
        wider_value = values[i];
      }
    }
  }

  for (std::size_t i = 0; i < values.size(); ++i)
    for (const auto& s : runs[i].manifest.schemes)
      res.rows[i].min_gain_db.push_back(s.completed ? std::optional<double>(s.min_gain_db)
                                                    : std::nullopt);
  return res;
}

void write_sweep_csv(const fs::path& file, const std::string& hash, const SweepResult& s) {
  auto os = open_out(file);
  header(os, "sweep", hash, "theta_max degrees, min gains in dB; empty = scheme failed");
  os << "theta_max";
  for (Scheme sc : s.schemes) os << ',' << to_string(sc) << "_db";
  os << ",warm_start\n";
  for (const auto& r : s.rows) {
    os << r.value;
    for (const auto& g : r.min_gain_db) {
      os << ',';
      if (g) os << *g;
    }
    os << ',' << (r.continued ? 1 : 0) << '\n';
  }
}

}  // namespace macover
