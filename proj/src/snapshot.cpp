#include "brwpe/snapshot.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "brwpe/errors.hpp"

namespace brwpe {

namespace {

constexpr const char* kMagic = "BRWPE-SNAPSHOT";

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

SnapshotError corrupt(const std::string& why) { return SnapshotError(SnapshotError::Kind::Corrupt, "corrupt snapshot: " + why); }

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw corrupt("bad number '" + s + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& s) {
  Int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw corrupt("bad integer '" + s + "'");
  return v;
}

}  // namespace

EnvironmentSnapshot make_snapshot(const PotentialField& field, const Window& window) {
  EnvironmentSnapshot s;
  s.d = field.dimension();
  s.alpha = field.alpha();
  s.seed = field.seed();
  s.center = window.center;
  s.radius = window.radius;
  s.records.reserve(window.sites.size());
  for (std::size_t i = 0; i < window.sites.size(); ++i) s.records.emplace_back(window.sites[i], window.values[i]);
  return s;
}

void write_snapshot(std::ostream& os, const EnvironmentSnapshot& snap) {
  os << kMagic << ' ' << snap.version << " d=" << snap.d << " alpha=" << format_double(snap.alpha)
     << " seed=" << snap.seed << " window=l1ball center=" << format_site(snap.center, snap.d, ',')
     << " radius=" << format_double(snap.radius) << " count=" << snap.records.size();
  if (!snap.tool.empty()) os << " tool=" << snap.tool;
  if (!snap.digest.empty()) os << " digest=" << snap.digest;
  os << '\n';
  for (const auto& [site, value] : snap.records) os << format_site(site, snap.d) << ' ' << format_double(value) << '\n';
  os << "END\n";
}

EnvironmentSnapshot read_snapshot(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw corrupt("missing header");
  std::istringstream hs(line);
  std::string magic, version_tok;
  hs >> magic >> version_tok;
  if (magic != kMagic) throw corrupt("bad magic");
  EnvironmentSnapshot snap;
  snap.version = parse_int<int>(version_tok);
  if (snap.version != kSnapshotVersion)
    throw SnapshotError(SnapshotError::Kind::VersionMismatch,
                        "snapshot version " + version_tok + " (expected " + std::to_string(kSnapshotVersion) + ")");

  std::map<std::string, std::string> kv;
  for (std::string tok; hs >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw corrupt("bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"d", "alpha", "seed", "window", "center", "radius", "count"})
    if (!kv.count(key)) throw corrupt(std::string("header missing ") + key);
  if (kv["window"] != "l1ball") throw corrupt("unknown window kind");
  snap.d = parse_int<int>(kv["d"]);
  if (snap.d < 1 || snap.d > kMaxDim) throw corrupt("bad dimension");
  snap.alpha = parse_double(kv["alpha"]);
  snap.seed = parse_int<std::uint64_t>(kv["seed"]);
  snap.radius = parse_double(kv["radius"]);
  snap.tool = kv.count("tool") ? kv["tool"] : "";
  snap.digest = kv.count("digest") ? kv["digest"] : "";
  {
    std::istringstream cs(kv["center"]);
    std::string part;
    int i = 0;
    while (std::getline(cs, part, ',')) {
      if (i >= snap.d) throw corrupt("center has too many coordinates");
      snap.center[i++] = parse_int<std::int32_t>(part);
    }
    if (i != snap.d) throw corrupt("center has too few coordinates");
  }
  const auto count = parse_int<std::uint64_t>(kv["count"]);

  snap.records.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    if (!std::getline(is, line)) throw corrupt("truncated after " + std::to_string(n) + " records");
    std::istringstream rs(line);
    Site s;
    std::string tok;
    for (int i = 0; i < snap.d; ++i) {
      if (!(rs >> tok)) throw corrupt("short record");
      s[i] = parse_int<std::int32_t>(tok);
    }
    if (!(rs >> tok)) throw corrupt("record missing value");
    const double v = parse_double(tok);
    if (rs >> tok) throw corrupt("trailing data in record");
    snap.records.emplace_back(s, v);
  }
  if (!std::getline(is, line) || line != "END") throw corrupt("missing END marker");
  return snap;
}

void save_snapshot(const std::filesystem::path& path, const EnvironmentSnapshot& snap) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw SnapshotError(SnapshotError::Kind::Io, "cannot open " + path.string() + " for writing");
  write_snapshot(os, snap);
  if (!os) throw SnapshotError(SnapshotError::Kind::Io, "write failed for " + path.string());
}

EnvironmentSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError(SnapshotError::Kind::Io, "cannot open " + path.string());
  return read_snapshot(is);
}

EnvironmentSnapshot load_snapshot(const std::filesystem::path& path, const PotentialField& expected) {
  auto snap = load_snapshot(path);
  if (snap.d != expected.dimension() || snap.alpha != expected.alpha() || snap.seed != expected.seed())
    throw SnapshotError(SnapshotError::Kind::IdentityMismatch,
                        "snapshot identity (d, alpha, seed) does not match the requested field");
  return snap;
}

}  // namespace brwpe
