#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace hsl::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ConfigError(where + ": expected a number, got '" + t + "'");
  return v;
}

// Splits "a, b, c" at top-level commas.
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::string unbracket(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw ConfigError(where + ": expected a [list]");
  return t.substr(1, t.size() - 2);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (c.raw_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    const std::string value = trim(line.substr(eq + 1));
    if (std::count(value.begin(), value.end(), '[') != std::count(value.begin(), value.end(), ']'))
      throw ConfigError(where + ": unbalanced brackets");
    c.raw_[key] = value;
  }
  return c;
}

Config Config::load(const std::string& path) {
  if (std::filesystem::is_directory(path)) throw ConfigError("config path '" + path + "' is a directory");
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

double Config::number(const std::string& key, double fallback) const {
  const auto it = raw_.find(key);
  return it == raw_.end() ? fallback : to_double(it->second, origin_ + ": " + key);
}

long long Config::integer(const std::string& key, long long fallback) const {
  const auto it = raw_.find(key);
  if (it == raw_.end()) return fallback;
  long long v = 0;
  const std::string& t = it->second;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ConfigError(origin_ + ": " + key + ": expected an integer, got '" + t + "'");
  return v;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto it = raw_.find(key);
  if (it == raw_.end()) return fallback;
  std::string v = it->second;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

std::vector<double> Config::list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = raw_.find(key);
  if (it == raw_.end()) return fallback;
  const std::string where = origin_ + ": " + key;
  std::vector<double> out;
  for (const auto& item : split_top(unbracket(it->second, where))) out.push_back(to_double(item, where));
  return out;
}

std::vector<std::vector<double>> Config::rows(const std::string& key) const {
  const auto it = raw_.find(key);
  if (it == raw_.end()) return {};
  const std::string where = origin_ + ": " + key;
  std::vector<std::vector<double>> out;
  for (const auto& row : split_top(unbracket(it->second, where))) {
    std::vector<double> r;
    for (const auto& item : split_top(unbracket(row, where))) r.push_back(to_double(item, where));
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "k", "R0", "rho_omega", "eta", "N0", "a_bar", "sources", "medium", "forward_n", "tol", "n_theta", "n_phi",
      "cgo_n", "cgo_t", "cgo_direction", "C_L", "data", "mode", "init", "search_n", "n_directions", "n_real",
      "n_complex", "t_complex", "peak_fraction", "eps", "seeds", "seed", "lattice_n", "carleman_eps",
      "carleman_outer", "carleman_fields", "carleman_taus", "carleman_radial", "carleman_angular"};
  return keys;
}

Vec3 vec3(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 3) throw ConfigError(key + ": expected three components");
  return {v[0], v[1], v[2]};
}

int positive(long long v, const std::string& key) {
  if (v <= 0 || v > 1 << 20) throw ConfigError(key + ": expected a positive integer");
  return static_cast<int>(v);
}

}  // namespace

Scenario make_scenario(const Config& cfg) {
  for (const auto& [key, value] : cfg.entries())
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");

  Scenario s;
  s.k = cfg.number("k", s.k);
  if (!(s.k > 0.0)) throw ConfigError("k must be positive");
  s.R0 = cfg.number("R0", s.R0);
  s.rho_omega = cfg.number("rho_omega", s.rho_omega);
  if (!(s.rho_omega > 0.0) || !(s.R0 > 0.0)) throw ConfigError("R0 and rho_omega must be positive");

  s.sources.eta = cfg.number("eta", s.sources.eta);
  s.sources.N0 = static_cast<int>(cfg.integer("N0", s.sources.N0));
  s.sources.a_bar = cfg.number("a_bar", s.sources.a_bar);
  for (const auto& r : cfg.rows("sources")) {
    if (r.size() != 4) throw ConfigError("sources: each entry is [a, z1, z2, z3]");
    s.sources.sources.push_back({r[0], Vec3(r[1], r[2], r[3])});
  }
  std::vector<Bump> bumps;
  for (const auto& r : cfg.rows("medium")) {
    if (r.size() != 5) throw ConfigError("medium: each entry is [amp, c1, c2, c3, radius]");
    bumps.push_back({r[0], Vec3(r[1], r[2], r[3]), r[4]});
  }
  try {
    s.medium = Medium(bumps);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  s.forward_n = positive(cfg.integer("forward_n", s.forward_n), "forward_n");
  s.tol = cfg.number("tol", s.tol);
  s.n_theta = positive(cfg.integer("n_theta", s.n_theta), "n_theta");
  s.n_phi = positive(cfg.integer("n_phi", s.n_phi), "n_phi");

  s.cgo_n = positive(cfg.integer("cgo_n", s.cgo_n), "cgo_n");
  s.cgo_t = cfg.list("cgo_t", s.cgo_t);
  s.cgo_direction = vec3(cfg.list("cgo_direction", {0, 0, 1}), "cgo_direction");
  if (!(s.cgo_direction.norm() > 0.0)) throw ConfigError("cgo_direction must be nonzero");
  s.cgo_direction.normalize();
  s.C_L = cfg.number("C_L", s.C_L);

  s.data = cfg.text("data", s.data);
  s.mode = cfg.text("mode", s.mode);
  if (s.mode != "single" && s.mode != "multi") throw ConfigError("mode must be 'single' or 'multi'");
  s.init = vec3(cfg.list("init", {0, 0, 0}), "init");
  auto& ro = s.recovery;
  ro.search.half_width = ro.search.ball_radius = s.rho_omega;
  ro.search.n = positive(cfg.integer("search_n", ro.search.n), "search_n");
  ro.n_directions = static_cast<int>(cfg.integer("n_directions", ro.n_directions));
  ro.fit.n_real = positive(cfg.integer("n_real", ro.fit.n_real), "n_real");
  ro.fit.n_complex = static_cast<int>(cfg.integer("n_complex", ro.fit.n_complex));
  ro.fit.t_complex = cfg.number("t_complex", ro.fit.t_complex);
  ro.fit.cgo_R0 = s.R0;
  ro.peak_fraction = cfg.number("peak_fraction", ro.peak_fraction);
  ro.N0 = s.sources.N0;

  s.eps = cfg.list("eps", s.eps);
  for (double e : s.eps)
    if (!(e >= 0.0)) throw ConfigError("eps entries must be non-negative");
  s.seeds = positive(cfg.integer("seeds", s.seeds), "seeds");
  s.seed = static_cast<std::uint64_t>(cfg.integer("seed", static_cast<long long>(s.seed)));
  s.lattice_n = static_cast<int>(cfg.integer("lattice_n", s.lattice_n));

  s.carleman_eps = cfg.number("carleman_eps", s.carleman_eps);
  s.carleman_outer = cfg.number("carleman_outer", s.carleman_outer);
  s.carleman_fields = positive(cfg.integer("carleman_fields", s.carleman_fields), "carleman_fields");
  s.carleman_taus = positive(cfg.integer("carleman_taus", s.carleman_taus), "carleman_taus");
  s.carleman_radial = positive(cfg.integer("carleman_radial", s.carleman_radial), "carleman_radial");
  s.carleman_angular = positive(cfg.integer("carleman_angular", s.carleman_angular), "carleman_angular");

  if (!s.sources.empty()) {
    const AdmissibilityReport rep = check_admissible(s.sources, s.rho_omega);
    if (!rep) {
      std::string msg = "source set is not admissible:";
      for (const auto& v : rep.violations) msg += " " + v + ";";
      throw ConfigError(msg);
    }
  }
  return s;
}

void apply_quick(Scenario& s) {
  s.forward_n = std::min(s.forward_n, 24);
  s.cgo_n = std::min(s.cgo_n, 16);
  s.n_theta = std::min(s.n_theta, 16);
  s.n_phi = std::min(s.n_phi, 32);
  if (s.eps.size() > 2) s.eps.resize(2);
  s.seeds = std::min(s.seeds, 1);
  s.lattice_n = std::min(s.lattice_n, 16);
  s.carleman_fields = std::min(s.carleman_fields, 3);
  s.carleman_taus = std::min(s.carleman_taus, 3);
  s.carleman_radial = std::min(s.carleman_radial, 32);
  s.carleman_angular = std::min(s.carleman_angular, 12);
  s.recovery.search.n = std::min(s.recovery.search.n, 25);
}

}  // namespace hsl::cli
