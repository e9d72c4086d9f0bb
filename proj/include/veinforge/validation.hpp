#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "veinforge/cluster.hpp"
#include "veinforge/image.hpp"
#include "veinforge/kform.hpp"

namespace veinforge {

/// Log-Gabor response followed by the moment fit. Throws NonLeptokurticError.
KFormParams fit_kform(const GrayImage& image);

/// Pairwise K-form distances, filled in parallel. Symmetric with a zero diagonal.
Eigen::MatrixXd kform_distance_matrix(const std::vector<KFormParams>& params, KFormDistance kind,
                                      int threads = 1);

/// .png and .pgm files below `dir`, recursively, in sorted order.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Seeded subset of round(fraction * n) items (at least two when n allows), in input order.
std::vector<std::filesystem::path> sample_paths(const std::vector<std::filesystem::path>& paths,
                                                double fraction, std::uint64_t seed);

struct MetricSelection {
  bool fid = false;
  bool nnloo = false;
  bool kform = false;
};

/// Parses a comma list such as "fid,nnloo,kform". Throws std::invalid_argument.
MetricSelection parse_metrics(const std::string& list);

struct ValidationRow {
  std::string real;
  std::string synthetic;
  std::optional<double> fid;
  std::optional<double> accuracy;
  std::optional<double> mean_kl;
  std::optional<double> mean_l2;
  int skipped_kform = 0;  // images without a leptokurtic response
  int divergent_l2 = 0;   // pairs left out of mean_l2 because d_I is infinite
};

ValidationRow compare_sets(const std::vector<GrayImage>& real, const std::vector<GrayImage>& synthetic,
                           const MetricSelection& metrics, int threads = 1);

/// Header: real,synthetic,fid,accuracy,mean_d_kl,mean_d_i. Unselected metrics are empty cells.
void write_report_csv(std::ostream& out, const std::vector<ValidationRow>& rows);

struct ClusterInput {
  std::string label;
  std::string group;
  GrayImage image;
};

struct ClusterResult {
  Dendrogram tree;
  std::vector<std::string> labels;
  std::vector<std::string> groups;
  std::vector<std::string> skipped;
  nlohmann::json to_json() const;
};

/// Fits a K-form per image and clusters the usable ones. Non-leptokurtic
/// images are skipped, and for L2 so are fits with p <= 1/4.
/// Throws std::runtime_error if fewer than two images remain.
ClusterResult cluster_images(const std::vector<ClusterInput>& inputs, KFormDistance kind,
                             int threads = 1);

}  // namespace veinforge
