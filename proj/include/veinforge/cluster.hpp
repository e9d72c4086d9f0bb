#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>
#include <vector>

namespace veinforge {

/// One agglomeration step. Leaves are 0..n-1; merge k creates cluster n + k.
struct Merge {
  int left = 0;
  int right = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  int leaves = 0;
  std::vector<Merge> merges;

  /// Leaf ids in left-to-right drawing order.
  std::vector<int> leaf_order() const;
  /// Leaf ids under the given cluster id.
  std::vector<int> members(int cluster) const;
};

/// Average-linkage agglomerative clustering. The input must be square,
/// symmetric, non-negative, with a zero diagonal. Ties go to the pair with the
/// smallest cluster ids; the smaller id is reported as `left`.
Dendrogram hcluster(const Eigen::MatrixXd& distances);

/// Nested merge tree. Internal nodes carry id, height, size and two children;
/// leaves carry id and, when given, a label and group.
nlohmann::json dendrogram_json(const Dendrogram& tree, const std::vector<std::string>& labels = {},
                               const std::vector<std::string>& groups = {});

}  // namespace veinforge
