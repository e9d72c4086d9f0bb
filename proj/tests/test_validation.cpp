#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "veinforge/pipeline.hpp"
#include "veinforge/random.hpp"
#include "veinforge/validation.hpp"

using namespace veinforge;
namespace fs = std::filesystem;

namespace {

GrayImage laplace_noise(std::uint64_t seed, double scale) {
  Rng rng(seed);
  GrayImage img(128, 128);
  for (double& v : img.pixels()) {
    const double u = rng.uniform() - 0.5;
    v = 0.5 - scale * std::copysign(std::log(1.0 - 2.0 * std::abs(u)), u);
  }
  return img;
}

}  // namespace

TEST_CASE("metric list parsing") {
  const auto all = parse_metrics("fid,nnloo,kform");
  CHECK(all.fid);
  CHECK(all.nnloo);
  CHECK(all.kform);
  const auto one = parse_metrics("kform");
  CHECK_FALSE(one.fid);
  CHECK(one.kform);
  CHECK_THROWS_AS(parse_metrics("fid,psnr"), std::invalid_argument);
  CHECK_THROWS_AS(parse_metrics(""), std::invalid_argument);
}

TEST_CASE("seeded path sampling") {
  std::vector<fs::path> paths;
  for (int i = 0; i < 50; ++i) paths.push_back("img" + std::to_string(100 + i) + ".png");
  const auto a = sample_paths(paths, 0.1, 4);
  CHECK(a.size() == 5);
  CHECK(a == sample_paths(paths, 0.1, 4));
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<fs::path>(a.begin(), a.end()).size() == 5);
  CHECK(sample_paths(paths, 0.01, 4).size() == 2);
  CHECK(sample_paths(paths, 1.0, 4) == paths);
  CHECK_THROWS(sample_paths(paths, 0.0, 1));
}

TEST_CASE("image listing") {
  const fs::path dir = fs::temp_directory_path() / "veinforge_test_validation";
  fs::remove_all(dir);
  fs::create_directories(dir / "b");
  write_png(GrayImage(4, 4, 0.5), dir / "b" / "x.png");
  write_pgm(GrayImage(4, 4, 0.5), dir / "a.pgm");
  std::ofstream(dir / "notes.txt") << "skip";
  const auto files = list_images(dir);
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a.pgm");
  CHECK_THROWS_AS(list_images(dir / "nope"), ImageIoError);
}

TEST_CASE("distance matrix is symmetric with a zero diagonal") {
  const std::vector<KFormParams> ps{{0.5, 2.0}, {1.0, 1.0}, {3.0, 0.3}};
  for (auto kind : {KFormDistance::KL, KFormDistance::L2}) {
    const auto d = kform_distance_matrix(ps, kind, 2);
    for (int i = 0; i < 3; ++i) {
      CHECK(d(i, i) == 0.0);
      for (int j = 0; j < 3; ++j) CHECK(d(i, j) == d(j, i));
    }
  }
  const auto d = kform_distance_matrix(ps, KFormDistance::L2, 1);
  CHECK(d(0, 1) == doctest::Approx(kform_distance(ps[0], ps[1], KFormDistance::L2)).epsilon(1e-12));
}

TEST_CASE("set comparison and CSV report") {
  std::vector<GrayImage> real, synth;
  for (std::uint64_t s = 0; s < 6; ++s) {
    real.push_back(generate_candidate(GeneratorKind::Physarum, candidate_seed(1, s)).image);
    synth.push_back(generate_candidate(GeneratorKind::Physarum, candidate_seed(2, s)).image);
  }
  auto self = compare_sets(real, real, parse_metrics("fid,nnloo,kform"), 2);
  REQUIRE(self.fid);
  CHECK(std::abs(*self.fid) < 1e-8);
  CHECK(*self.accuracy == 0.0);
  auto row = compare_sets(real, synth, parse_metrics("nnloo"), 2);
  CHECK_FALSE(row.fid);
  CHECK(row.accuracy);
  CHECK_FALSE(row.mean_kl);
  row.real = "ref,a";
  row.synthetic = "syn";
  std::ostringstream out;
  write_report_csv(out, {row});
  const std::string csv = out.str();
  CHECK(csv.rfind("real,synthetic,fid,accuracy,mean_d_kl,mean_d_i\r\n", 0) == 0);
  CHECK(csv.find("\"ref,a\",syn,,") != std::string::npos);
}

TEST_CASE("clustering separates vein images from flat noise") {
  std::vector<ClusterInput> in;
  for (std::uint64_t s = 0; s < 4; ++s) {
    in.push_back({"v" + std::to_string(s), "veins",
                  generate_candidate(GeneratorKind::Physarum, candidate_seed(8, s)).image});
    in.push_back({"n" + std::to_string(s), "noise", laplace_noise(500 + s, 0.003)});
  }
  in.push_back({"flat", "noise", GrayImage(128, 128, 0.5)});
  const auto r = cluster_images(in, KFormDistance::KL, 2);
  CHECK(r.skipped == std::vector<std::string>{"flat"});
  REQUIRE(r.tree.leaves == 8);
  const int root = 2 * r.tree.leaves - 2;
  const auto& top = r.tree.merges.back();
  CHECK(top.size == 8);
  for (int side : {top.left, top.right}) {
    std::set<std::string> groups;
    for (int leaf : r.tree.members(side)) groups.insert(r.groups[leaf]);
    CHECK(groups.size() == 1);
  }
  CHECK(r.to_json()["tree"]["id"] == root);
  CHECK_THROWS_AS(cluster_images({in.back()}, KFormDistance::KL), std::runtime_error);
}
