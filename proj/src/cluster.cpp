#include "veinforge/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace veinforge {

Dendrogram hcluster(const Eigen::MatrixXd& distances) {
  const auto n = static_cast<int>(distances.rows());
  if (distances.cols() != n) throw std::invalid_argument("hcluster: distance matrix must be square");
  for (int i = 0; i < n; ++i) {
    if (distances(i, i) != 0.0) throw std::invalid_argument("hcluster: diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      const double d = distances(i, j);
      if (!std::isfinite(d) || d < 0.0) {
        throw std::invalid_argument("hcluster: distances must be finite and non-negative");
      }
      if (d != distances(j, i)) throw std::invalid_argument("hcluster: matrix is not symmetric");
    }
  }

  Dendrogram tree;
  tree.leaves = n;
  if (n < 2) return tree;

  // Working distances between active clusters, keyed by cluster id.
  std::map<int, int> size;
  std::map<std::pair<int, int>, double> dist;
  for (int i = 0; i < n; ++i) {
    size[i] = 1;
    for (int j = i + 1; j < n; ++j) dist[{i, j}] = distances(i, j);
  }
  double last = 0.0;
  for (int step = 0; step < n - 1; ++step) {
    auto best = dist.begin();
    for (auto it = dist.begin(); it != dist.end(); ++it) {
      if (it->second < best->second) best = it;
    }
    const auto [a, b] = best->first;
    const int merged = n + step;
    const int na = size[a], nb = size[b];
    // Average linkage is monotone; the max only absorbs rounding.
    last = std::max(last, best->second);
    tree.merges.push_back({a, b, last, na + nb});

    std::map<int, double> to_a, to_b;
    for (auto it = dist.begin(); it != dist.end();) {
      const auto [i, j] = it->first;
      if (i == a || j == a || i == b || j == b) {
        const int other = (i == a || i == b) ? j : i;
        if (other != a && other != b) ((i == a || j == a) ? to_a : to_b)[other] = it->second;
        it = dist.erase(it);
      } else {
        ++it;
      }
    }
    size.erase(a);
    size.erase(b);
    for (const auto& [k, sz] : size) {
      (void)sz;
      dist[{k, merged}] = (na * to_a.at(k) + nb * to_b.at(k)) / static_cast<double>(na + nb);
    }
    size[merged] = na + nb;
  }
  return tree;
}

std::vector<int> Dendrogram::members(int cluster) const {
  std::vector<int> out;
  std::vector<int> stack{cluster};
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    if (c < leaves) {
      out.push_back(c);
      continue;
    }
    const Merge& m = merges.at(static_cast<std::size_t>(c - leaves));
    stack.push_back(m.right);
    stack.push_back(m.left);
  }
  return out;
}

std::vector<int> Dendrogram::leaf_order() const {
  if (leaves == 0) return {};
  if (merges.empty()) {
    std::vector<int> out(static_cast<std::size_t>(leaves));
    for (int i = 0; i < leaves; ++i) out[static_cast<std::size_t>(i)] = i;
    return out;
  }
  return members(leaves + static_cast<int>(merges.size()) - 1);
}

namespace {

nlohmann::json node_json(const Dendrogram& tree, int id, const std::vector<std::string>& labels,
                         const std::vector<std::string>& groups) {
  nlohmann::json node;
  node["id"] = id;
  if (id < tree.leaves) {
    const auto i = static_cast<std::size_t>(id);
    if (i < labels.size()) node["label"] = labels[i];
    if (i < groups.size()) node["group"] = groups[i];
    return node;
  }
  const Merge& m = tree.merges.at(static_cast<std::size_t>(id - tree.leaves));
  node["height"] = m.height;
  node["size"] = m.size;
  node["children"] = {node_json(tree, m.left, labels, groups), node_json(tree, m.right, labels, groups)};
  return node;
}

}  // namespace

nlohmann::json dendrogram_json(const Dendrogram& tree, const std::vector<std::string>& labels,
                               const std::vector<std::string>& groups) {
  const auto n = static_cast<std::size_t>(tree.leaves);
  if ((!labels.empty() && labels.size() != n) || (!groups.empty() && groups.size() != n)) {
    throw std::invalid_argument("dendrogram_json: labels and groups need one entry per leaf");
  }
  nlohmann::json out;
  out["leaves"] = tree.leaves;
  out["linkage"] = "average";
  nlohmann::json merges = nlohmann::json::array();
  for (const Merge& m : tree.merges) {
    merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
  }
  out["merges"] = merges;
  if (tree.leaves == 1) out["tree"] = node_json(tree, 0, labels, groups);
  if (tree.leaves > 1) {
    out["tree"] = node_json(tree, tree.leaves + static_cast<int>(tree.merges.size()) - 1, labels, groups);
  }
  return out;
}

}  // namespace veinforge
