#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "veinforge/augment.hpp"
#include "veinforge/pipeline.hpp"
#include "veinforge/similarity.hpp"

using namespace veinforge;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "veinforge_test_pipeline" / name;
  fs::remove_all(dir);
  return dir;
}

GenerateOptions quiet(std::vector<std::string>* sink = nullptr) {
  GenerateOptions o;
  o.threads = 2;
  o.log = [sink](std::string_view m) {
    if (sink) sink->emplace_back(m);
  };
  return o;
}

}  // namespace

TEST_CASE("similarity identity, symmetry and distinct subjects") {
  const auto dir = fresh_dir("similarity");
  const auto rep = generate_database(20, GeneratorKind::Physarum, 3, dir, quiet());
  std::vector<GrayImage> imgs;
  for (const auto& s : rep.manifest.subjects) imgs.push_back(read_image(dir / s.files[0]));
  CHECK(similarity_score(imgs[0], imgs[0]) == doctest::Approx(1.0));
  int low = 0, pairs = 0;
  for (std::size_t i = 0; i < imgs.size(); ++i)
    for (std::size_t j = i + 1; j < imgs.size(); ++j) {
      const double a = similarity_score(imgs[i], imgs[j]);
      CHECK(a == similarity_score(imgs[j], imgs[i]));
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      low += a <= kUniquenessThreshold;
      ++pairs;
    }
  CHECK(low == pairs);
  CHECK_THROWS(similarity_score(imgs[0], GrayImage(64, 64, 1.0)));
  const VeinMap empty = vein_map(GrayImage(64, 64, 1.0));
  CHECK(empty.on.empty());
  CHECK(map_similarity(empty, empty) == 0.0);
}

TEST_CASE("thinning leaves a one pixel line") {
  const int w = 20, h = 9;
  std::vector<std::uint8_t> mask(w * h, 0);
  for (int y = 3; y <= 5; ++y)
    for (int x = 2; x < 18; ++x) mask[y * w + x] = 1;
  const auto t = thin(mask, w, h);
  for (int x = 5; x < 15; ++x) {
    int column = 0;
    for (int y = 0; y < h; ++y) column += t[y * w + x];
    CHECK(column == 1);
  }
}

TEST_CASE("uniqueness check") {
  const auto a = generate_candidate(GeneratorKind::Physarum, 11).image;
  const auto b = generate_candidate(GeneratorKind::Physarum, 12).image;
  PrimaryIndex empty;
  CHECK(empty.check(vein_map(a)).accepted);
  PrimaryIndex idx;
  idx.add(4, vein_map(b));
  idx.add(7, vein_map(a));
  const auto r1 = idx.check(vein_map(a), kUniquenessThreshold, 1);
  CHECK_FALSE(r1.accepted);
  CHECK(r1.matching_id == 7);
  CHECK(r1.max_score == doctest::Approx(1.0));
  const auto r3 = idx.check(vein_map(a), kUniquenessThreshold, 3);
  CHECK(r3.matching_id == r1.matching_id);
  CHECK(r3.max_score == r1.max_score);
}

TEST_CASE("sample augmentation") {
  const auto primary = generate_candidate(GeneratorKind::Physarum, 21).image;
  AugmentConfig cfg;
  cfg.rng_seed = 5;
  const auto samples = vsa_augment(primary, cfg);
  REQUIRE(samples.size() == 6);
  std::set<std::vector<unsigned char>> distinct;
  for (const auto& s : samples) {
    distinct.insert(s.to_bytes());
    CHECK(similarity_score(s, primary) > kUniquenessThreshold);
  }
  CHECK(distinct.size() == 6);
  CHECK(vsa_augment(primary, cfg) == samples);

  const auto same = vsa_augment(primary, AugmentConfig::identity());
  REQUIRE(same.size() == 6);
  for (const auto& s : same) CHECK(s == primary);

  AugmentConfig bad;
  bad.rotation_deg = {-20.0, 20.0};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("ROI crops") {
  const GrayImage raw(300, 300, 0.5);
  CHECK(roi_crop_count({}) == 87);
  const auto crops = roi_augment(raw);
  CHECK(crops.size() == 87);
  for (const auto& c : crops) {
    CHECK(c.width() == 128);
    CHECK(c.height() == 128);
  }
  RoiAugmentParams one;
  one.shift_extent = 0;
  one.angle_max = 0;
  CHECK(roi_crop_count(one) == 1);
  CHECK(roi_augment(raw, one).size() == 1);
  CHECK_THROWS_AS(roi_augment(GrayImage(130, 130, 0.5)), std::invalid_argument);
}

TEST_CASE("generate_database writes a verifiable dataset") {
  const auto dir = fresh_dir("one");
  const auto rep = generate_database(1, GeneratorKind::Physarum, 9, dir, quiet());
  CHECK(rep.admitted == 1);
  REQUIRE(rep.manifest.subjects.size() == 1);
  const auto& s = rep.manifest.subjects[0];
  CHECK(s.files.size() == 7);
  CHECK(s.files[0] == "00001/primary.png");
  CHECK_NOTHROW(verify_manifest(DatasetManifest::load(dir), dir));

  const auto primary = read_image(dir / s.files[0]);
  const auto verdict = iud_check(primary, rep.manifest, dir);
  CHECK_FALSE(verdict.accepted);
  CHECK(verdict.matching_id == 1);
  CHECK(iud_check(generate_candidate(GeneratorKind::Physarum, 999).image, DatasetManifest{}, dir).accepted);

  // Corrupt one sample.
  {
    std::ofstream(dir / s.files[3], std::ios::binary | std::ios::app) << "x";
  }
  CHECK_THROWS_AS(verify_manifest(DatasetManifest::load(dir), dir), CorruptDataset);
  fs::remove(dir / s.files[0]);
  CHECK_THROWS_AS(iud_check(primary, rep.manifest, dir), CorruptDataset);
}

TEST_CASE("resumed generation matches a one-shot run") {
  const auto a = fresh_dir("resume"), b = fresh_dir("oneshot");
  generate_database(10, GeneratorKind::Physarum, 77, a, quiet());
  const auto resumed = generate_database(20, GeneratorKind::Physarum, 77, a, quiet());
  CHECK(resumed.admitted == 10);
  const auto single = generate_database(20, GeneratorKind::Physarum, 77, b, quiet());
  const auto ma = DatasetManifest::load(a), mb = DatasetManifest::load(b);
  REQUIRE(ma.subjects.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(ma.subjects[i].seed == mb.subjects[i].seed);
    CHECK(ma.subjects[i].sha256 == mb.subjects[i].sha256);
  }
  CHECK_THROWS(generate_database(21, GeneratorKind::Dla, 77, a, quiet()));
}

TEST_CASE("rejections are logged and exhaustion is reported") {
  const auto dir = fresh_dir("exhaust");
  generate_database(1, GeneratorKind::Physarum, 5, dir, quiet());
  auto m = DatasetManifest::load(dir);
  m.uniqueness_threshold = 0.0;  // every candidate now collides
  m.save(dir);
  std::vector<std::string> log;
  auto opts = quiet(&log);
  opts.max_consecutive_rejections = 3;
  try {
    generate_database(2, GeneratorKind::Physarum, 5, dir, opts);
    FAIL("expected GeneratorExhausted");
  } catch (const GeneratorExhausted& e) {
    CHECK(e.rejection_rate == doctest::Approx(1.0));
  }
  CHECK(log.size() >= 3);
  CHECK(log[0].find("rejected: matches subject 1") != std::string::npos);
  const auto after = DatasetManifest::load(dir);
  CHECK(after.rejections.size() == 3);
  CHECK(after.subjects.size() == 1);
}

TEST_CASE("manifest JSON round trip") {
  DatasetManifest m;
  m.name = "x";
  m.generator = GeneratorKind::Colonization;
  m.master_seed = 0xFFFFFFFFFFFFFFFFULL;
  m.subjects.push_back({3, GeneratorKind::Colonization, 42, 7, {{"k", 1}}, {"00003/primary.png"}, {"ab"}});
  m.rejections.push_back({2, 3, 0.5});
  const auto back = DatasetManifest::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(back.master_seed == m.master_seed);
  CHECK_THROWS_AS(DatasetManifest::from_json(nlohmann::json{{"name", 3}}), CorruptDataset);
  CHECK(parse_generator("dla") == GeneratorKind::Dla);
  CHECK_THROWS(parse_generator("gan"));
  CHECK(sha256_hex(std::vector<unsigned char>{'a', 'b', 'c'}) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("all generators produce images") {
  for (auto k : {GeneratorKind::Physarum, GeneratorKind::Colonization, GeneratorKind::Dla}) {
    const auto c = generate_candidate(k, 3, 96);
    CHECK(c.image.width() == 96);
    CHECK(c.image.min() >= 0.0);
    CHECK(c.image.max() <= 1.0);
    CHECK(generate_candidate(k, 3, 96).image == c.image);
  }
}
