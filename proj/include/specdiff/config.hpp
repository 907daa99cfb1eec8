#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "specdiff/errors.hpp"

namespace specdiff {

/// Config-file syntax error tied to one field.
struct ParseError : ConfigError {
  std::string field;
  ParseError(std::string f, const std::string& why)
      : ConfigError("parse error at '" + f + "': " + why), field(std::move(f)) {}
};

/// Config value outside its legal range.
struct ValidationError : ConfigError {
  std::string field, reason;
  ValidationError(std::string f, std::string why)
      : ConfigError("invalid '" + f + "': " + why),
        field(std::move(f)),
        reason(std::move(why)) {}
};

/// One fully validated run request. Flat key=value schema shared by all
/// subcommands; each subcommand reads the subset it needs.
struct RunConfig {
  std::string subcommand;
  std::string domain = "halfline";  ///< halfline | disk
  double s = 0.5;
  double eps = 0.1;
  std::vector<double> eps_list;
  long n = 10000;
  double T = 0.5;
  double dt = 1e-3;
  long grid_n = 48;
  std::string bc = "specular";  ///< specular | absorb
  std::string method = "implicit_euler";
  uint64_t seed = 12345;
  int workers = 1;
  std::string output_dir = "out";
  std::vector<std::string> warnings;
  std::string canonical;  ///< normalized key=value text, hashed for metadata
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError(key, "expected a number, got '" + v + "'");
  }
}

inline long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError(key, "expected an integer, got '" + v + "'");
  }
}

inline uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<uint64_t>(x);
  } catch (const std::exception&) {
    throw ParseError(key, "expected an unsigned integer, got '" + v + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ParseError(key, "expected a comma-separated list");
  return out;
}

}  // namespace detail

/// Parse a flat key=value file, apply overrides (flag values win), validate.
/// Unknown keys and malformed values raise ParseError; out-of-range values
/// raise ValidationError naming the offending field.
inline RunConfig parse_config(const std::string& subcommand, const std::string& path,
                              const std::map<std::string, std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("config", "cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno), "expected key=value");
    kv[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
  }
  for (const auto& [k, v] : overrides) kv[k] = v;

  RunConfig cfg;
  cfg.subcommand = subcommand;
  for (const auto& [k, v] : kv) {
    if (k == "domain") cfg.domain = v;
    else if (k == "s") cfg.s = detail::parse_double(k, v);
    else if (k == "eps") cfg.eps = detail::parse_double(k, v);
    else if (k == "eps_list") cfg.eps_list = detail::parse_list(k, v);
    else if (k == "n") cfg.n = detail::parse_long(k, v);
    else if (k == "T") cfg.T = detail::parse_double(k, v);
    else if (k == "dt") cfg.dt = detail::parse_double(k, v);
    else if (k == "grid_n") cfg.grid_n = detail::parse_long(k, v);
    else if (k == "bc") cfg.bc = v;
    else if (k == "method") cfg.method = v;
    else if (k == "seed") cfg.seed = detail::parse_u64(k, v);
    else if (k == "workers") cfg.workers = static_cast<int>(detail::parse_long(k, v));
    else if (k == "output_dir") cfg.output_dir = v;
    else throw ParseError(k, "unknown key");
  }

  if (!(cfg.s > 0.0 && cfg.s < 1.0))
    throw ValidationError("s", "must be in (0,1)");
  if (!(cfg.eps > 0.0)) throw ValidationError("eps", "must be positive");
  if (cfg.n < 1) throw ValidationError("n", "must be >= 1");
  if (!(cfg.T > 0.0)) throw ValidationError("T", "must be positive");
  if (!(cfg.dt > 0.0 && cfg.dt <= cfg.T))
    throw ValidationError("dt", "must satisfy 0 < dt <= T");
  if (cfg.grid_n < 1) throw ValidationError("grid_n", "must be >= 1");
  if (cfg.domain != "halfline" && cfg.domain != "disk")
    throw ValidationError("domain", "must be 'halfline' or 'disk'");
  if (cfg.bc != "specular" && cfg.bc != "absorb")
    throw ValidationError("bc", "must be 'specular' or 'absorb'");
  if (cfg.method != "implicit_euler")
    throw ValidationError("method", "only 'implicit_euler' is available");
  if (cfg.workers < 1) throw ValidationError("workers", "must be >= 1");
  for (double e : cfg.eps_list)
    if (!(e > 0.0)) throw ValidationError("eps_list", "entries must be positive");
  if (!cfg.eps_list.empty() &&
      !std::is_sorted(cfg.eps_list.begin(), cfg.eps_list.end(), std::greater<>())) {
    std::sort(cfg.eps_list.begin(), cfg.eps_list.end(), std::greater<>());
    cfg.warnings.push_back("eps_list was not sorted descending; sorted it");
  }

  // Canonical text: sorted keys from the merged view, used for the run hash.
  std::ostringstream canon;
  canon << "subcommand=" << subcommand << "\n";
  canon << "domain=" << cfg.domain << "\ns=" << cfg.s << "\neps=" << cfg.eps << "\n";
  canon << "eps_list=";
  for (size_t i = 0; i < cfg.eps_list.size(); ++i)
    canon << (i ? "," : "") << cfg.eps_list[i];
  canon << "\nn=" << cfg.n << "\nT=" << cfg.T << "\ndt=" << cfg.dt
        << "\ngrid_n=" << cfg.grid_n << "\nbc=" << cfg.bc
        << "\nmethod=" << cfg.method << "\nseed=" << cfg.seed
        << "\nworkers=" << cfg.workers << "\n";
  cfg.canonical = canon.str();
  return cfg;
}

}  // namespace specdiff
