#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "macover/ao_pipeline.hpp"
#include "macover/experiment_config.hpp"

namespace macover {

inline constexpr const char* kLibraryVersion = "1.0.0";

struct FineAudit {
  double coarse_min = 0.0;
  double fine_min = 0.0;
  double gap_db = 0.0;   // coarse minus fine, signed
};

/// Re-evaluates the min gain on a grid factor times denser. Region sample
/// counts L become (L - 1) * factor + 1, so every coarse angle stays on the
/// fine grid.
FineAudit audit_fine_grid(const WeightVector& w, const PositionVector& x,
                          const CoverageSpec& spec, double wavelength, int factor);

SampleGrid refine(const CoverageSpec& spec, int factor);

struct SchemeSummary {
  Scheme scheme = Scheme::Proposed;
  bool completed = false;
  std::string error;                 // set when the optimizer failed
  std::string failed_stage;
  double min_gain = 0.0;
  double min_gain_db = 0.0;
  double aperture_m = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  double rank_penalty = 0.0;
  bool stage_rejected = false;
  bool monotone = true;              // AO trace non-decreasing within 1e-9
  FineAudit audit;
  std::vector<std::string> diagnostics;
};

struct RunManifest {
  std::string config_text;
  std::string config_hash;
  std::string version = kLibraryVersion;
  std::uint64_t seed = 0;
  std::string started;               // ISO 8601 UTC
  std::string finished;
  std::vector<SchemeSummary> schemes;

  const SchemeSummary* find(Scheme s) const;
  /// True iff every scheme completed and kept its invariants.
  bool all_ok() const;
};

void write_manifest(const std::filesystem::path& file, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& file);

/// Output files of one scheme inside a run directory.
struct SchemeFiles {
  std::filesystem::path pattern, positions, weights, trace;
  static SchemeFiles in(const std::filesystem::path& dir, Scheme s);
};

AoResult run_scheme(Scheme s, const ArrayConfig& cfg, const CoverageSpec& spec,
                    const AoConfig& ao);

/// Runs every configured scheme concurrently, writes the per-scheme CSV files
/// and manifest.json into out_dir and returns the manifest. Optimizer
/// failures are recorded in the manifest; the partial result is still written.
RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// CSV files start with '#' comment lines: the file kind, config_hash and
// column units. Numbers are written with 17 significant digits.
struct CsvHeader {
  std::string kind;
  std::string config_hash;
};

/// Positions normalized so that x_1 = 0, in meters and wavelengths.
void write_positions_csv(const std::filesystem::path& file, const std::string& hash,
                         const PositionVector& x, double wavelength);
void write_weights_csv(const std::filesystem::path& file, const std::string& hash,
                       const WeightVector& w);
/// angle_deg, gain_linear, gain_db over [0, 180] degrees at 1/factor degree.
void write_pattern_csv(const std::filesystem::path& file, const std::string& hash,
                       const WeightVector& w, const PositionVector& x, double wavelength,
                       int factor);
void write_trace_csv(const std::filesystem::path& file, const std::string& hash,
                     const AoResult& r);

PositionVector read_positions_csv(const std::filesystem::path& file, CsvHeader* header = nullptr);
WeightVector read_weights_csv(const std::filesystem::path& file, CsvHeader* header = nullptr);

struct PatternSample {
  double angle_deg, gain, gain_db;
};
std::vector<PatternSample> read_pattern_csv(const std::filesystem::path& file,
                                            CsvHeader* header = nullptr);

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AuditCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Reloads a run directory: re-parses the config snapshot, re-reads each
/// scheme's files and checks hashes, the recorded min gain against a
/// recomputation (1e-9) and the fine-grid audit.
std::vector<AuditCheck> audit_run(const std::filesystem::path& dir);

struct SweepRow {
  double value = 0.0;
  std::vector<std::optional<double>> min_gain_db;   // per scheme, empty on failure
  bool continued = false;    // proposed taken from the warm start of the wider run
};

struct SweepResult {
  std::vector<Scheme> schemes;
  std::vector<SweepRow> rows;   // in the order of the requested values
};

/// Sweeps the upper edge of the single region (theta_max, degrees). Each
/// value is an independent experiment written to out_dir/theta_max_<v>.
/// The proposed scheme is additionally warm-started from the solution for
/// the next wider region and keeps the better of the two results.
SweepResult run_sweep(const ExperimentConfig& base, const std::string& param,
                      const std::vector<double>& values, const std::filesystem::path& out_dir);

void write_sweep_csv(const std::filesystem::path& file, const std::string& hash,
                     const SweepResult& s);

}  // namespace macover
