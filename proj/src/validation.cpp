#include "veinforge/validation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "veinforge/features.hpp"
#include "veinforge/parallel.hpp"
#include "veinforge/random.hpp"

namespace veinforge {

KFormParams fit_kform(const GrayImage& image) { return estimate_kform(log_gabor_filter(image)); }

Eigen::MatrixXd kform_distance_matrix(const std::vector<KFormParams>& params, KFormDistance kind,
                                      int threads) {
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    double v = kform_distance(params[static_cast<std::size_t>(i)], params[static_cast<std::size_t>(j)], kind);
    if (kind == KFormDistance::KL) {
      // KL is asymmetric; the clustering input uses the symmetrised form.
      v = 0.5 * (v + kform_distance(params[static_cast<std::size_t>(j)], params[static_cast<std::size_t>(i)], kind));
    }
    d(i, j) = v;
    d(j, i) = v;
  });
  return d;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ImageIoError("not a readable directory: " + dir.string());
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pgm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::filesystem::path> sample_paths(const std::vector<std::filesystem::path>& paths,
                                                double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("sample fraction must lie in (0, 1]");
  }
  const std::size_t n = paths.size();
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  k = std::min(n, std::max<std::size_t>(k, 2));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<std::filesystem::path> out;
  for (auto i : idx) out.push_back(paths[i]);
  return out;
}

MetricSelection parse_metrics(const std::string& list) {
  MetricSelection sel;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "fid") sel.fid = true;
    else if (item == "nnloo") sel.nnloo = true;
    else if (item == "kform") sel.kform = true;
    else throw std::invalid_argument("unknown metric '" + item + "' (expected fid, nnloo, kform)");
  }
  if (!sel.fid && !sel.nnloo && !sel.kform) throw std::invalid_argument("no metrics selected");
  return sel;
}

ValidationRow compare_sets(const std::vector<GrayImage>& real, const std::vector<GrayImage>& synthetic,
                           const MetricSelection& metrics, int threads) {
  if (real.empty() || synthetic.empty()) throw std::invalid_argument("compare_sets: empty image set");
  ValidationRow row;
  if (metrics.fid || metrics.nnloo) {
    const Eigen::MatrixXd fa = feature_matrix(real, threads);
    const Eigen::MatrixXd fb = feature_matrix(synthetic, threads);
    if (metrics.fid) row.fid = fid(FeatureStats::from_samples(fa), FeatureStats::from_samples(fb));
    if (metrics.nnloo) row.accuracy = nn_loo_accuracy(fa, fb);
  }
  if (metrics.kform) {
    auto fit_all = [&](const std::vector<GrayImage>& images) {
      std::vector<std::optional<KFormParams>> fits(images.size());
      parallel_for(images.size(), threads, [&](std::size_t i) {
        try {
          fits[i] = fit_kform(images[i]);
        } catch (const NonLeptokurticError&) {
        }
      });
      std::vector<KFormParams> ok;
      for (const auto& f : fits) {
        if (f) ok.push_back(*f);
        else ++row.skipped_kform;
      }
      return ok;
    };
    const auto ka = fit_all(real);
    const auto kb = fit_all(synthetic);
    if (!ka.empty() && !kb.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      std::vector<double> kl(ka.size() * kb.size()), l2(ka.size() * kb.size(), nan);
      parallel_for(kl.size(), threads, [&](std::size_t k) {
        const auto& a = ka[k / kb.size()];
        const auto& b = kb[k % kb.size()];
        kl[k] = kform_distance(a, b, KFormDistance::KL);
        try {
          l2[k] = kform_distance(a, b, KFormDistance::L2);
        } catch (const DivergentDistance&) {
        }
      });
      double skl = 0.0, sl2 = 0.0;
      std::size_t nl2 = 0;
      for (std::size_t k = 0; k < kl.size(); ++k) {
        skl += kl[k];
        if (std::isnan(l2[k])) continue;
        sl2 += l2[k];
        ++nl2;
      }
      row.mean_kl = skl / static_cast<double>(kl.size());
      if (nl2 > 0) row.mean_l2 = sl2 / static_cast<double>(nl2);
      row.divergent_l2 = static_cast<int>(l2.size() - nl2);
    }
  }
  return row;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(10) << *v;
  return os.str();
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<ValidationRow>& rows) {
  out << "real,synthetic,fid,accuracy,mean_d_kl,mean_d_i\r\n";
  for (const auto& r : rows) {
    out << csv_field(r.real) << ',' << csv_field(r.synthetic) << ',' << csv_number(r.fid) << ','
        << csv_number(r.accuracy) << ',' << csv_number(r.mean_kl) << ',' << csv_number(r.mean_l2)
        << "\r\n";
  }
}

nlohmann::json ClusterResult::to_json() const {
  nlohmann::json j = dendrogram_json(tree, labels, groups);
  j["skipped"] = skipped;
  return j;
}

ClusterResult cluster_images(const std::vector<ClusterInput>& inputs, KFormDistance kind, int threads) {
  std::vector<std::optional<KFormParams>> fits(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t i) {
    try {
      fits[i] = fit_kform(inputs[i].image);
    } catch (const NonLeptokurticError&) {
    }
  });
  ClusterResult result;
  std::vector<KFormParams> params;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (fits[i] && kind == KFormDistance::L2 && fits[i]->p <= kMinL2Shape) fits[i].reset();
    if (!fits[i]) {
      result.skipped.push_back(inputs[i].label);
      continue;
    }
    params.push_back(*fits[i]);
    result.labels.push_back(inputs[i].label);
    result.groups.push_back(inputs[i].group);
  }
  if (params.size() < 2) {
    throw std::runtime_error("clustering needs at least two images with a leptokurtic response");
  }
  result.tree = hcluster(kform_distance_matrix(params, kind, threads));
  return result;
}

}  // namespace veinforge
