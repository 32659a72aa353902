#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "brwpe/errors.hpp"
#include "brwpe/snapshot.hpp"

using namespace brwpe;

namespace {

EnvironmentSnapshot sample() {
  const PotentialField f(2, 3.5, 77);
  auto s = make_snapshot(f, materialize_window(f, Site{{1, -1, 0, 0}}, 4.0));
  s.tool = "brwpe/test";
  s.digest = "00ff";
  return s;
}

std::string text(const EnvironmentSnapshot& s) {
  std::ostringstream os;
  write_snapshot(os, s);
  return os.str();
}

SnapshotError::Kind kind_of(const std::string& body) {
  std::istringstream is(body);
  try {
    read_snapshot(is);
  } catch (const SnapshotError& e) {
    return e.kind();
  }
  FAIL("snapshot unexpectedly parsed");
  return SnapshotError::Kind::Io;
}

}  // namespace

TEST_CASE("snapshot round trip is exact") {
  const auto s = sample();
  std::istringstream is(text(s));
  const auto r = read_snapshot(is);
  CHECK(r.d == s.d);
  CHECK(r.alpha == s.alpha);
  CHECK(r.seed == s.seed);
  CHECK(r.center == s.center);
  CHECK(r.radius == s.radius);
  CHECK(r.tool == s.tool);
  CHECK(r.digest == s.digest);
  REQUIRE(r.records.size() == s.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    CHECK(r.records[i].first == s.records[i].first);
    CHECK(r.records[i].second == s.records[i].second);
  }
  CHECK(text(r) == text(s));
}

TEST_CASE("snapshot values reproduce the field") {
  const PotentialField f(2, 3.5, 77);
  for (const auto& [z, v] : sample().records) CHECK(f.at(z) == v);
}

TEST_CASE("malformed snapshots are rejected with the right kind") {
  const auto good = text(sample());
  CHECK(kind_of("") == SnapshotError::Kind::Corrupt);
  CHECK(kind_of("NOT-A-SNAPSHOT 1\n") == SnapshotError::Kind::Corrupt);
  std::string v2 = good;
  v2.replace(v2.find(" 1 "), 3, " 2 ");
  CHECK(kind_of(v2) == SnapshotError::Kind::VersionMismatch);
  CHECK(kind_of(good.substr(0, good.size() - 4)) == SnapshotError::Kind::Corrupt);
  const auto nl = good.find('\n');
  CHECK(kind_of(good.substr(0, nl + 1) + "END\n") == SnapshotError::Kind::Corrupt);
  std::string bad_value = good;
  bad_value.insert(good.find('\n', nl + 1), "x");
  CHECK(kind_of(bad_value) == SnapshotError::Kind::Corrupt);
}

TEST_CASE("file helpers check identity") {
  const auto path = std::filesystem::temp_directory_path() / "brwpe_snapshot_test.txt";
  save_snapshot(path, sample());
  CHECK_NOTHROW(load_snapshot(path, PotentialField(2, 3.5, 77)));
  try {
    load_snapshot(path, PotentialField(2, 3.5, 78));
    FAIL("identity mismatch not detected");
  } catch (const SnapshotError& e) {
    CHECK(e.kind() == SnapshotError::Kind::IdentityMismatch);
  }
  std::filesystem::remove(path);
  try {
    load_snapshot(path);
    FAIL("missing file not detected");
  } catch (const SnapshotError& e) {
    CHECK(e.kind() == SnapshotError::Kind::Io);
  }
}
