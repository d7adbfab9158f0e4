#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "macover/experiment.hpp"

namespace macover {

struct RegionStats {
  double min_db = 0.0;
  double max_db = 0.0;
  double mean_db = 0.0;   // of the linear gain
};

struct ComparisonEntry {
  std::filesystem::path dir;
  Scheme scheme = Scheme::Proposed;
  std::vector<RegionStats> regions;
  double global_min_db = 0.0;
  double aperture_m = 0.0;
  double delta_db = 0.0;   // against the same scheme in the first directory
};

struct Relation {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Comparison {
  std::string config_hash;
  std::vector<AngularRegion> regions;
  std::vector<ComparisonEntry> entries;
  std::vector<Relation> relations;
};

/// Gains are recomputed from each run's weight and position files on the
/// coarse grid. Throws FormatError if the runs carry different config hashes.
Comparison compare_schemes(const std::vector<std::filesystem::path>& dirs);

std::string format_comparison(const Comparison& c);
void write_comparison_csv(const std::filesystem::path& file, const Comparison& c);

}  // namespace macover
