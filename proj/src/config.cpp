#include "brwpe/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "brwpe/errors.hpp"

namespace brwpe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value) {
  throw ConfigError("bad value for '" + key + "': '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(key, v);
  return x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(key, v);
  return x;
}

Site to_site(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.empty() || parts.size() > kMaxDim) bad(key, v);
  Site s;
  for (std::size_t i = 0; i < parts.size(); ++i) s.x[i] = to_int<std::int32_t>(key, parts[i]);
  return s;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_site(const Site& s, int d) { return format_site(s, d, ','); }

template <class T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) out += fmt(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

std::string canonical(const RunConfig& c, bool with_volatile) {
  std::ostringstream o;
  o << "d = " << c.d << '\n';
  o << "alpha = " << fmt(c.alpha) << '\n';
  o << "seed = " << c.seed << '\n';
  if (with_volatile) o << "workers = " << c.workers << '\n';
  o << "T = " << fmt_list(c.T_grid) << '\n';
  o << "t = " << fmt(c.t) << '\n';
  o << "env_seeds = " << fmt_list(c.env_seeds) << '\n';
  o << "replicas = " << c.replicas << '\n';
  o << "window_radius = " << fmt(c.window_radius) << '\n';
  o << "snapshot.center = " << fmt_site(c.snapshot_center, c.d) << '\n';
  o << "snapshot.radius = " << fmt(c.snapshot_radius) << '\n';
  o << "box_radius = " << c.box_radius << '\n';
  o << "horizon = " << fmt(c.horizon) << '\n';
  o << "population_cap = " << c.population_cap << '\n';
  o << "lineage_cap = " << c.lineage_cap << '\n';
  o << "start = " << fmt_site(c.start, c.d) << '\n';
  o << "y = " << (c.y ? fmt_site(*c.y, c.d) : std::string()) << '\n';
  o << "theta = " << fmt(c.theta) << '\n';
  o << "planted_xi = " << (c.planted_xi ? fmt(*c.planted_xi) : std::string()) << '\n';
  o << "pam.times = " << fmt_list(c.pam_times) << '\n';
  o << "target_local_error = " << fmt(c.target_local_error) << '\n';
  o << "splitting_order = " << c.splitting_order << '\n';
  o << "top_k = " << c.top_k << '\n';
  if (with_volatile) o << "out = " << c.out << '\n';
  o << "verify.instances = " << c.verify_instances << '\n';
  o << "verify.mc_replicas = " << c.verify_mc_replicas << '\n';
  o << "verify.m2o_replicas = " << c.verify_m2o_replicas << '\n';
  o << "verify.m2o_t = " << fmt(c.verify_m2o_t) << '\n';
  o << "verify.bd_replicas = " << c.verify_bd_replicas << '\n';
  o << "verify.chernoff_replicas = " << c.verify_chernoff_replicas << '\n';
  o << "verify.ks_replicas = " << c.verify_ks_replicas << '\n';
  return o.str();
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), v = trim(value_in);
  if (key == "d") c.d = to_int<int>(key, v);
  else if (key == "alpha") c.alpha = to_double(key, v);
  else if (key == "seed") c.seed = to_int<std::uint64_t>(key, v);
  else if (key == "workers") c.workers = to_int<unsigned>(key, v);
  else if (key == "T") {
    c.T_grid.clear();
    for (const auto& p : split(v, ',')) c.T_grid.push_back(to_double(key, p));
  } else if (key == "t") c.t = to_double(key, v);
  else if (key == "env_seeds") {
    c.env_seeds.clear();
    for (const auto& p : split(v, ',')) c.env_seeds.push_back(to_int<std::uint64_t>(key, p));
  } else if (key == "replicas") c.replicas = to_int<std::uint64_t>(key, v);
  else if (key == "window_radius") c.window_radius = to_double(key, v);
  else if (key == "snapshot.center") c.snapshot_center = to_site(key, v);
  else if (key == "snapshot.radius") c.snapshot_radius = to_double(key, v);
  else if (key == "box_radius") c.box_radius = to_int<int>(key, v);
  else if (key == "horizon") c.horizon = to_double(key, v);
  else if (key == "population_cap") c.population_cap = to_int<std::uint64_t>(key, v);
  else if (key == "lineage_cap") c.lineage_cap = to_int<std::uint64_t>(key, v);
  else if (key == "start") c.start = to_site(key, v);
  else if (key == "y") c.y = v.empty() ? std::nullopt : std::optional<Site>(to_site(key, v));
  else if (key == "theta") c.theta = to_double(key, v);
  else if (key == "planted_xi") c.planted_xi = v.empty() ? std::nullopt : std::optional<double>(to_double(key, v));
  else if (key == "pam.times") {
    c.pam_times.clear();
    for (const auto& p : split(v, ',')) c.pam_times.push_back(to_double(key, p));
  } else if (key == "target_local_error") c.target_local_error = to_double(key, v);
  else if (key == "splitting_order") c.splitting_order = to_int<int>(key, v);
  else if (key == "top_k") c.top_k = to_int<std::uint64_t>(key, v);
  else if (key == "out") c.out = v;
  else if (key == "verify.instances") c.verify_instances = to_int<std::uint64_t>(key, v);
  else if (key == "verify.mc_replicas") c.verify_mc_replicas = to_int<std::uint64_t>(key, v);
  else if (key == "verify.m2o_replicas") c.verify_m2o_replicas = to_int<std::uint64_t>(key, v);
  else if (key == "verify.m2o_t") c.verify_m2o_t = to_double(key, v);
  else if (key == "verify.bd_replicas") c.verify_bd_replicas = to_int<std::uint64_t>(key, v);
  else if (key == "verify.chernoff_replicas") c.verify_chernoff_replicas = to_int<std::uint64_t>(key, v);
  else if (key == "verify.ks_replicas") c.verify_ks_replicas = to_int<std::uint64_t>(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

void validate_config(const RunConfig& c) {
  if (c.d < 1 || c.d > kMaxDim) throw ConfigError("d must be in [1, 4]");
  if (!(c.alpha > c.d)) throw ConfigError("alpha must exceed d");
  if (c.workers == 0) throw ConfigError("workers must be positive");
  for (double T : c.T_grid)
    if (!(T > 2.718281828459045)) throw ConfigError("every T must exceed e");
  if (!(c.t > 0)) throw ConfigError("t must be positive");
  if (c.window_radius < 0 || c.snapshot_radius < 0) throw ConfigError("radii must be non-negative");
  if (c.box_radius < 0) throw ConfigError("box_radius must be non-negative");
  if (!(c.horizon >= 0)) throw ConfigError("horizon must be non-negative");
  if (c.population_cap == 0 || c.lineage_cap == 0) throw ConfigError("caps must be positive");
  if (c.theta < 0) throw ConfigError("theta must be non-negative");
  for (double s : c.pam_times)
    if (!(s >= 0)) throw ConfigError("pam.times must be non-negative");
  if (!(c.target_local_error > 0)) throw ConfigError("target_local_error must be positive");
  if (c.splitting_order != 1 && c.splitting_order != 2) throw ConfigError("splitting_order must be 1 or 2");
  if (c.verify_instances == 0 || c.verify_mc_replicas == 0 || c.verify_m2o_replicas == 0 ||
      c.verify_bd_replicas == 0 || c.verify_chernoff_replicas == 0 || c.verify_ks_replicas == 0)
    throw ConfigError("verify counts must be positive");
  if (!(c.verify_m2o_t > 0)) throw ConfigError("verify.m2o_t must be positive");
  auto in_dim = [&](const Site& s) {
    for (int k = c.d; k < kMaxDim; ++k)
      if (s[k] != 0) return false;
    return true;
  };
  if (!in_dim(c.start) || !in_dim(c.snapshot_center) || (c.y && !in_dim(*c.y)))
    throw ConfigError("site has more coordinates than d");
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + " lacks '='");
    set_config_value(c, t.substr(0, eq), t.substr(eq + 1));
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const RunConfig& cfg) { return canonical(cfg, true); }

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config '" + path + "'");
  out << serialize_config(cfg);
}

std::uint64_t config_digest(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical(cfg, false)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace brwpe
