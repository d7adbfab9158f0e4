#include "macover/experiment_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace macover {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

bool to_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end && std::isfinite(out);
}

template <typename Int>
bool to_int(const std::string& s, Int& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt(const Length& l) { return fmt(l.value) + (l.in_wavelengths ? " lambda" : " m"); }

std::string fmt(const RegionSpec& r) {
  std::string s = fmt(r.min_deg) + " " + fmt(r.max_deg);
  if (r.samples) s += " " + std::to_string(*r.samples);
  return s;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string problem_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "n_antennas = " << c.n_antennas << '\n'
     << "carrier_freq = " << fmt(c.carrier_freq) << '\n'
     << "aperture = " << fmt(c.aperture) << '\n'
     << "min_spacing = " << fmt(c.min_spacing) << '\n';
  for (const auto& r : c.regions) os << "region = " << fmt(r) << '\n';
  return os.str();
}

class Parser {
 public:
  explicit Parser(ExperimentConfig& cfg) : cfg_(cfg) {}

  void line(int no, const std::string& raw) {
    no_ = no;
    std::string text = raw.substr(0, raw.find('#'));
    text = trim(text);
    if (text.empty()) return;
    const auto eq = text.find('=');
    if (eq == std::string::npos) return error("expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) return error("missing key");
    if (value.empty()) return error("missing value for '" + key + "'");
    if (key != "region" && !seen_.emplace(key, no).second)
      return error("duplicate key '" + key + "' (first set on line " +
                   std::to_string(seen_[key]) + ")");
    assign(key, value);
  }

  std::vector<std::string>& errors() { return errors_; }

 private:
  void error(const std::string& msg) {
    errors_.push_back("line " + std::to_string(no_) + ": " + msg);
  }

  void real(const std::string& key, const std::string& v, double& out) {
    if (!to_double(v, out)) error("'" + key + "' expects a number, got '" + v + "'");
  }

  template <typename Int>
  void integer(const std::string& key, const std::string& v, Int& out) {
    if (!to_int(v, out)) error("'" + key + "' expects an integer, got '" + v + "'");
  }

  void length(const std::string& key, const std::string& v, Length& out) {
    const auto tok = split_ws(v);
    if (tok.size() != 2 || (tok[1] != "m" && tok[1] != "lambda"))
      return error("'" + key + "' expects '<number> m' or '<number> lambda', got '" + v + "'");
    if (!to_double(tok[0], out.value)) return error("'" + key + "' has a bad number '" + tok[0] + "'");
    out.in_wavelengths = tok[1] == "lambda";
  }

  void region(const std::string& v) {
    const auto tok = split_ws(v);
    if (tok.size() != 2 && tok.size() != 3)
      return error("'region' expects '<min deg> <max deg> [samples]', got '" + v + "'");
    RegionSpec r;
    if (!to_double(tok[0], r.min_deg) || !to_double(tok[1], r.max_deg))
      return error("'region' bounds must be numbers, got '" + v + "'");
    if (tok.size() == 3) {
      int l = 0;
      if (!to_int(tok[2], l)) return error("'region' sample count must be an integer");
      r.samples = l;
    }
    if (r.min_deg == r.max_deg) return error("empty region (" + fmt(r) + ")");
    if (r.min_deg > r.max_deg) return error("region minimum exceeds maximum (" + fmt(r) + ")");
    if (r.min_deg < 0.0 || r.max_deg > 180.0)
      return error("region (" + fmt(r) + ") leaves [0, 180] degrees");
    if (r.samples && *r.samples < 2) return error("region sample count must be >= 2");
    cfg_.regions.push_back(r);
  }

  void schemes(const std::string& v) {
    std::string list = v;
    for (char& c : list)
      if (c == ',') c = ' ';
    cfg_.schemes.clear();
    for (const auto& tok : split_ws(list)) {
      const auto s = parse_scheme(tok);
      if (!s) {
        error("unknown scheme '" + tok + "' (expected proposed, fpa or mafab)");
        continue;
      }
      bool dup = false;
      for (Scheme t : cfg_.schemes) dup = dup || t == *s;
      if (dup) error("scheme '" + tok + "' listed twice");
      else cfg_.schemes.push_back(*s);
    }
  }

  void assign(const std::string& key, const std::string& v) {
    auto& ao = cfg_.ao;
    if (key == "n_antennas") integer(key, v, cfg_.n_antennas);
    else if (key == "carrier_freq") real(key, v, cfg_.carrier_freq);
    else if (key == "aperture") length(key, v, cfg_.aperture);
    else if (key == "min_spacing") length(key, v, cfg_.min_spacing);
    else if (key == "region") region(v);
    else if (key == "rho") real(key, v, ao.rho);
    else if (key == "ao_tol") real(key, v, ao.ao_tol);
    else if (key == "sca_tol_v") real(key, v, ao.sca_tol_v);
    else if (key == "sca_tol_x") real(key, v, ao.sca_tol_x);
    else if (key == "max_ao_iters") integer(key, v, ao.max_ao_iters);
    else if (key == "max_sca_iters") integer(key, v, ao.max_sca_iters);
    else if (key == "randomization_trials") integer(key, v, ao.randomization_trials);
    else if (key == "seed") integer(key, v, ao.seed);
    else if (key == "schemes") schemes(v);
    else if (key == "output_dir") cfg_.output_dir = v;
    else if (key == "fine_audit_factor") integer(key, v, cfg_.fine_audit_factor);
    else error("unknown key '" + key + "'");
  }

  ExperimentConfig& cfg_;
  std::vector<std::string> errors_;
  std::map<std::string, int> seen_;
  int no_ = 0;
};

void check(std::vector<std::string>& errors, const std::function<void()>& f) {
  try {
    f();
  } catch (const InvalidArgument& e) {
    errors.emplace_back(e.what());
  }
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::Fpa: return "fpa";
    case Scheme::Mafab: return "mafab";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(const std::string& name) {
  if (name == "proposed") return Scheme::Proposed;
  if (name == "fpa") return Scheme::Fpa;
  if (name == "mafab") return Scheme::Mafab;
  return std::nullopt;
}

ArrayConfig ExperimentConfig::array() const {
  const double lambda = wavelength();
  return ArrayConfig::from_carrier(n_antennas, aperture.meters(lambda), carrier_freq,
                                   min_spacing.meters(lambda));
}

CoverageSpec ExperimentConfig::coverage() const {
  std::vector<AngularRegion> r;
  std::vector<int> samples;
  for (const auto& g : regions) {
    r.push_back({deg_to_rad(g.min_deg), deg_to_rad(g.max_deg)});
    samples.push_back(g.samples ? *g.samples : default_samples(r.back().max_rad - r.back().min_rad));
  }
  return CoverageSpec(std::move(r), std::move(samples));
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string s = "invalid config:";
        for (const auto& e : errors) s += "\n  " + e;
        return s;
      }()),
      errors_(std::move(errors)) {}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  Parser parser(cfg);
  std::istringstream is(text);
  int no = 0;
  for (std::string line; std::getline(is, line);) parser.line(++no, line);

  auto& errors = parser.errors();
  if (!(cfg.carrier_freq > 0.0)) errors.emplace_back("carrier_freq must be > 0");
  else check(errors, [&] { (void)cfg.array(); });
  if (cfg.regions.empty()) errors.emplace_back("at least one region is required");
  else check(errors, [&] { (void)cfg.coverage(); });
  check(errors, [&] { cfg.ao.validate(); });
  if (cfg.schemes.empty()) errors.emplace_back("schemes must name at least one scheme");
  if (cfg.fine_audit_factor < 2) errors.emplace_back("fine_audit_factor must be >= 2");
  if (cfg.output_dir.empty()) errors.emplace_back("output_dir must not be empty");
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << problem_text(c)
     << "rho = " << fmt(c.ao.rho) << '\n'
     << "ao_tol = " << fmt(c.ao.ao_tol) << '\n'
     << "sca_tol_v = " << fmt(c.ao.sca_tol_v) << '\n'
     << "sca_tol_x = " << fmt(c.ao.sca_tol_x) << '\n'
     << "max_ao_iters = " << c.ao.max_ao_iters << '\n'
     << "max_sca_iters = " << c.ao.max_sca_iters << '\n'
     << "randomization_trials = " << c.ao.randomization_trials << '\n'
     << "seed = " << c.ao.seed << '\n'
     << "schemes =";
  for (std::size_t i = 0; i < c.schemes.size(); ++i)
    os << (i ? ", " : " ") << to_string(c.schemes[i]);
  os << '\n'
     << "output_dir = " << c.output_dir << '\n'
     << "fine_audit_factor = " << c.fine_audit_factor << '\n';
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(problem_text(cfg))));
  return buf;
}

}  // namespace macover
