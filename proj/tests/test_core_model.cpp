#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prefpol/core_model.hpp"
#include "support.hpp"

using namespace prefpol;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("slice_segment views the requested steps") {
  auto d = testsupport::synth_dataset(3, 100, 2, 1, 7);

  Segment s = slice_segment(d, 1, 0, 16);
  CHECK(s.length == 16);
  CHECK(s.state(0) == d.state(1, 0));
  CHECK(s.state(15) == d.state(1, 15));

  Segment tail = slice_segment(d, 2, 84, 16);
  CHECK(tail.state(15) == d.state(2, 99));

  CHECK_THROWS_AS(slice_segment(d, 0, 90, 16), ConfigError);
  CHECK_THROWS_AS(slice_segment(d, 0, -1, 16), ConfigError);
  CHECK_THROWS_AS(slice_segment(d, 0, 0, 0), ConfigError);
  CHECK_THROWS_AS(slice_segment(d, 5, 0, 16), ConfigError);
}

TEST_CASE("slice_segment bounds error names the episode") {
  auto d = testsupport::synth_dataset(3, 100, 2, 1, 7);
  try {
    slice_segment(d, 2, 90, 16);
    FAIL("expected bounds error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("episode 2") != std::string::npos);
  }
}

TEST_CASE("sample_pairs draws n valid distinct slices") {
  auto d = testsupport::synth_dataset(40, 50, 2, 1, 3);
  auto pairs = sample_pairs(d, 500, 16, 11);
  REQUIRE(pairs.size() == 500);
  for (const auto& [a, b] : pairs) {
    CHECK(a.episode >= 0);
    CHECK(a.episode < 40);
    CHECK(a.start >= 0);
    CHECK(a.start + 16 <= 50);
    CHECK(b.start + 16 <= 50);
    CHECK(!(a == b));
    // slice invariants hold for every sampled ref
    Segment sa = slice_segment(d, a.episode, a.start, 16);
    CHECK(sa.length == 16);
  }
}

TEST_CASE("sample_pairs is deterministic in the seed") {
  auto d = testsupport::synth_dataset(10, 40, 2, 1, 3);
  auto p1 = sample_pairs(d, 200, 8, 42);
  auto p2 = sample_pairs(d, 200, 8, 42);
  CHECK(p1 == p2);
  auto p3 = sample_pairs(d, 200, 8, 43);
  CHECK(p1 != p3);
}

TEST_CASE("sample_pairs rejects impossible configurations") {
  auto d = testsupport::synth_dataset(1, 16, 2, 1, 3);
  // exactly one valid start: a distinct pair cannot exist
  CHECK_THROWS_AS(sample_pairs(d, 1, 16, 0), ConfigError);
  CHECK_THROWS_AS(sample_pairs(d, 0, 8, 0), ConfigError);
  CHECK_THROWS_AS(sample_pairs(d, 10, 17, 0), ConfigError);
  EpisodeDataset empty;
  empty.meta.horizon = 100;
  CHECK_THROWS_AS(sample_pairs(empty, 10, 16, 0), ConfigError);
}

TEST_CASE("episode dataset round-trips losslessly") {
  auto d = testsupport::synth_dataset(12, 30, 4, 2, 99);
  d.meta.env = "point_reach";
  d.meta.frames_available = true;
  const std::string path = temp_path("prefpol_ds_test.ppd");
  save_dataset(d, path);
  EpisodeDataset back = load_dataset(path);
  CHECK(back == d);
  std::remove(path.c_str());
}

TEST_CASE("episode container reports distinct error kinds") {
  auto d = testsupport::synth_dataset(4, 20, 3, 2, 5);
  const std::string path = temp_path("prefpol_ds_err.ppd");
  save_dataset(d, path);
  const std::string bytes = read_all(path);

  SUBCASE("corrupted payload byte fails the checksum") {
    std::string bad = bytes;
    bad[bad.size() / 2] ^= 0x01;
    write_all(path, bad);
    CHECK_THROWS_AS(load_dataset(path), ChecksumError);
  }
  SUBCASE("truncated file") {
    write_all(path, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_dataset(path), TruncatedError);
  }
  SUBCASE("wrong magic") {
    std::string bad = bytes;
    bad[3] = '9';
    write_all(path, bad);
    CHECK_THROWS_AS(load_dataset(path), VersionError);
  }
  std::remove(path.c_str());
}

TEST_CASE("preference dataset round-trips, including escapes") {
  PreferenceDataset p;
  p.meta.env = "point_reach";
  p.meta.segment_len = 16;
  p.meta.seed = 123;
  p.meta.teacher_hash = "abcdef0123456789";

  SUBCASE("empty dataset") {
    p.meta.pair_count = 0;
    const std::string path = temp_path("prefpol_pref_empty.ppt");
    save_pref(p, path);
    CHECK(load_pref(path) == p);
    std::remove(path.c_str());
  }

  SUBCASE("10k pairs with awkward raw responses") {
    prefpol::Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
      PreferencePair pair;
      pair.query_id = i;
      pair.episode_a = static_cast<int>(rng.below(2500));
      pair.start_a = static_cast<int>(rng.below(85));
      pair.episode_b = static_cast<int>(rng.below(2500));
      pair.start_b = static_cast<int>(rng.below(85));
      double r = rng.uniform();
      pair.label = r < 0.4 ? 0.0 : r < 0.8 ? 1.0 : 0.5;
      pair.teacher = TeacherKind::vlm_mock;
      if (i % 7 == 0) pair.raw_response = "line one\nline two, with commas\\";
      p.pairs.push_back(pair);
    }
    p.meta.pair_count = p.pairs.size();
    const std::string path = temp_path("prefpol_pref_10k.ppt");
    save_pref(p, path);
    CHECK(load_pref(path) == p);
    std::remove(path.c_str());
  }
}

TEST_CASE("preference file errors are distinguished") {
  PreferenceDataset p;
  p.meta.env = "e";
  p.meta.segment_len = 4;
  p.meta.pair_count = 1;
  p.pairs.push_back({0, 1, 2, 3, 4, 0.5, TeacherKind::oracle, ""});
  const std::string path = temp_path("prefpol_pref_err.ppt");
  save_pref(p, path);
  const std::string bytes = read_all(path);

  SUBCASE("flipped record byte") {
    std::string bad = bytes;
    bad[bytes.find("0,1,2")] = '7';
    write_all(path, bad);
    CHECK_THROWS_AS(load_pref(path), ChecksumError);
  }
  SUBCASE("missing checksum line") {
    write_all(path, bytes.substr(0, bytes.rfind("# crc32")));
    CHECK_THROWS_AS(load_pref(path), TruncatedError);
  }
  SUBCASE("wrong magic") {
    write_all(path, "XXXX\n" + bytes.substr(5));
    CHECK_THROWS_AS(load_pref(path), VersionError);
  }
  std::remove(path.c_str());
}

TEST_CASE("property: persistence is lossless on random datasets") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    prefpol::Rng rng(seed);
    auto d = testsupport::synth_dataset(2 + static_cast<int>(rng.below(8)),
                                        10 + static_cast<int>(rng.below(30)),
                                        1 + static_cast<int>(rng.below(5)),
                                        1 + static_cast<int>(rng.below(3)),
                                        seed * 31 + 1);
    const std::string path = temp_path("prefpol_prop.ppd");
    save_dataset(d, path);
    CHECK(load_dataset(path) == d);
    std::remove(path.c_str());
  }
}
