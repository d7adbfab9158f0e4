#include "macover/compare.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace macover {
namespace fs = std::filesystem;
namespace {

constexpr double kNarrowWidthDeg = 50.0;
constexpr double kNarrowGapDb = 0.5;

std::string db(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

const ComparisonEntry* find(const std::vector<ComparisonEntry>& es, const fs::path& dir,
                            Scheme s) {
  for (const auto& e : es)
    if (e.dir == dir && e.scheme == s) return &e;
  return nullptr;
}

}  // namespace

Comparison compare_schemes(const std::vector<fs::path>& dirs) {
  if (dirs.empty()) throw InvalidArgument("compare needs at least one run directory");
  Comparison c;
  double total_width = 0.0;
  for (const auto& dir : dirs) {
    const RunManifest m = read_manifest(dir / "manifest.json");
    if (c.config_hash.empty()) {
      c.config_hash = m.config_hash;
    } else if (m.config_hash != c.config_hash) {
      throw FormatError("config hash mismatch: " + dirs.front().string() + " has " +
                        c.config_hash + ", " + dir.string() + " has " + m.config_hash);
    }
    const ExperimentConfig cfg = parse_config(m.config_text);
    const CoverageSpec spec = cfg.coverage();
    const SampleGrid grid = discretize(spec);
    const double lambda = cfg.wavelength();
    if (c.regions.empty()) {
      c.regions = spec.regions();
      for (const auto& r : c.regions) total_width += rad_to_deg(r.max_rad - r.min_rad);
    }

    for (const auto& s : m.schemes) {
      if (!s.completed) continue;
      const SchemeFiles f = SchemeFiles::in(dir, s.scheme);
      CsvHeader hp, hw;
      const PositionVector x = read_positions_csv(f.positions, &hp);
      const WeightVector w = read_weights_csv(f.weights, &hw);
      if (hp.config_hash != c.config_hash || hw.config_hash != c.config_hash)
        throw FormatError("config hash mismatch in the files of " + dir.string());
      const std::vector<double> g = beam_gains(w, x, grid.angles, lambda);

      ComparisonEntry e;
      e.dir = dir;
      e.scheme = s.scheme;
      const std::size_t k = spec.num_regions();
      std::vector<double> lo(k, std::numeric_limits<double>::infinity()), hi(k, 0.0), sum(k, 0.0);
      std::vector<int> count(k, 0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto r = static_cast<std::size_t>(grid.region_index[i]);
        lo[r] = std::min(lo[r], g[i]);
        hi[r] = std::max(hi[r], g[i]);
        sum[r] += g[i];
        ++count[r];
      }
      double global = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < k; ++r) {
        e.regions.push_back({to_db(lo[r]), to_db(hi[r]), to_db(sum[r] / count[r])});
        global = std::min(global, lo[r]);
      }
      e.global_min_db = to_db(global);
      e.aperture_m = x.coords().back() - x.coords().front();
      if (const auto* ref = find(c.entries, dirs.front(), s.scheme))
        e.delta_db = e.global_min_db - ref->global_min_db;
      c.entries.push_back(std::move(e));
    }
  }

  std::vector<fs::path> seen;
  for (const auto& dir : dirs) {
    if (std::find(seen.begin(), seen.end(), dir) != seen.end()) continue;
    seen.push_back(dir);
    const auto* p = find(c.entries, dir, Scheme::Proposed);
    if (!p) continue;
    const std::string tag = dirs.size() > 1 ? " [" + dir.string() + "]" : "";
    for (Scheme b : {Scheme::Fpa, Scheme::Mafab}) {
      const auto* q = find(c.entries, dir, b);
      if (!q) continue;
      c.relations.push_back({"proposed >= " + to_string(b) + " (global max-min)" + tag,
                             p->global_min_db >= q->global_min_db,
                             db(p->global_min_db) + " vs " + db(q->global_min_db) + " dB"});
    }
    const auto* m = find(c.entries, dir, Scheme::Mafab);
    if (m && total_width <= kNarrowWidthDeg) {
      const double gap = std::abs(p->global_min_db - m->global_min_db);
      c.relations.push_back({"|proposed - mafab| <= 0.5 dB on a narrow region" + tag,
                             gap <= kNarrowGapDb, db(gap) + " dB"});
    }
  }
  return c;
}

std::string format_comparison(const Comparison& c) {
  std::ostringstream os;
  os << "config_hash " << c.config_hash << "\n\n";
  os << std::left << std::setw(28) << "run" << std::setw(10) << "scheme";
  for (std::size_t r = 0; r < c.regions.size(); ++r) {
    const std::string name = "R" + std::to_string(r + 1);
    os << std::setw(8) << (name + " min") << std::setw(8) << (name + " max") << std::setw(9)
       << (name + " mean");
  }
  os << std::setw(11) << "max-min" << std::setw(9) << "delta" << "aperture_m\n";
  for (const auto& e : c.entries) {
    os << std::setw(28) << e.dir.filename().string() << std::setw(10) << to_string(e.scheme);
    for (const auto& r : e.regions)
      os << std::setw(8) << db(r.min_db) << std::setw(8) << db(r.max_db) << std::setw(9)
         << db(r.mean_db);
    os << std::setw(11) << db(e.global_min_db) << std::setw(9) << db(e.delta_db)
       << std::setprecision(4) << e.aperture_m << '\n';
  }
  if (!c.relations.empty()) os << '\n';
  for (const auto& r : c.relations)
    os << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
  return os.str();
}

void write_comparison_csv(const fs::path& file, const Comparison& c) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << std::setprecision(17) << "# macover comparison\n# config_hash " << c.config_hash
     << "\n# units gains in dB, aperture in meters\n";
  os << "run,scheme,region,min_db,max_db,mean_db,global_min_db,delta_db,aperture_m\n";
  for (const auto& e : c.entries)
    for (std::size_t r = 0; r < e.regions.size(); ++r)
      os << e.dir.string() << ',' << to_string(e.scheme) << ',' << r + 1 << ','
         << e.regions[r].min_db << ',' << e.regions[r].max_db << ',' << e.regions[r].mean_db
         << ',' << e.global_min_db << ',' << e.delta_db << ',' << e.aperture_m << '\n';
}

}  // namespace macover
