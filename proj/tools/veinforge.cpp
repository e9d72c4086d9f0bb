// veinforge command-line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 generator exhausted.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "veinforge/augment.hpp"
#include "veinforge/pipeline.hpp"
#include "veinforge/validation.hpp"

namespace fs = std::filesystem;
using namespace veinforge;

namespace {

enum Exit { kOk = 0, kConfig = 1, kIo = 2, kExhausted = 3 };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::uint64_t pick_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

std::vector<GrayImage> load_images(const std::vector<fs::path>& paths) {
  std::vector<GrayImage> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(read_image(p));
  return out;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  int subjects = 0;
  std::string generator = "physarum";
  std::optional<std::uint64_t> seed;
  std::string out;
  int size = 128;
  std::string name = "veinforge";
};

int run_generate(const GenerateArgs& a, int threads) {
  const GeneratorKind kind = parse_generator(a.generator);
  if (a.subjects < 1) throw ConfigError("--subjects must be at least 1");
  if (a.size < 16) throw ConfigError("--size must be at least 16");
  const std::uint64_t seed = pick_seed(a.seed);
  std::cerr << "seed " << seed << "\n"
            << "invocation: veinforge generate --subjects " << a.subjects << " --generator "
            << to_string(kind) << " --seed " << seed << " --out " << a.out << " --size " << a.size
            << "\n";
  GenerateOptions opt;
  opt.image_size = a.size;
  opt.threads = threads;
  opt.name = a.name;
  opt.log = [](std::string_view s) { std::cerr << s << '\n'; };
  const auto t0 = std::chrono::steady_clock::now();
  const GenerateReport rep = generate_database(a.subjects, kind, seed, a.out, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "seed " << seed << " admitted " << rep.admitted << " rejected " << rep.rejected
            << " subjects " << rep.manifest.subjects.size() << " elapsed " << std::fixed
            << std::setprecision(2) << secs << "s\n";
  return kOk;
}

// --- validate ---------------------------------------------------------------

struct ValidateArgs {
  std::string real;
  std::string synthetic;
  std::string metrics = "fid,nnloo,kform";
  double sample_frac = 0.10;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_validate(const ValidateArgs& a, int threads) {
  const MetricSelection sel = parse_metrics(a.metrics);
  if (!(a.sample_frac > 0.0 && a.sample_frac <= 1.0)) throw ConfigError("--sample-frac must lie in (0, 1]");
  const std::uint64_t seed = pick_seed(a.seed);
  std::cerr << "seed " << seed << "\n"
            << "invocation: veinforge validate --real " << a.real << " --synthetic " << a.synthetic
            << " --metrics " << a.metrics << " --sample-frac " << a.sample_frac << " --seed " << seed
            << " --out " << a.out << "\n";

  const auto real_all = list_images(a.real);
  const auto synth_all = list_images(a.synthetic);
  if (real_all.empty() || synth_all.empty()) throw ImageIoError("no .png/.pgm images found");
  // One seed for both sides: comparing a directory with itself draws the same subset.
  const auto real_paths = sample_paths(real_all, a.sample_frac, seed);
  const auto synth_paths = sample_paths(synth_all, a.sample_frac, seed);
  if ((sel.fid || sel.nnloo) && (real_paths.size() < 2 || synth_paths.size() < 2)) {
    throw ConfigError("fid and nnloo need at least two sampled images per set");
  }
  std::cerr << "sampled " << real_paths.size() << " of " << real_all.size() << " real, "
            << synth_paths.size() << " of " << synth_all.size() << " synthetic\n";

  const auto real = load_images(real_paths);
  const auto synth = load_images(synth_paths);
  ValidationRow row = compare_sets(real, synth, sel, threads);
  row.real = a.real;
  row.synthetic = a.synthetic;
  if (row.skipped_kform > 0) {
    std::cerr << "warning: " << row.skipped_kform << " images had no leptokurtic response\n";
  }
  if (row.divergent_l2 > 0) {
    std::cerr << "warning: " << row.divergent_l2 << " pairs have infinite d_I (p <= 0.25)\n";
  }

  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ImageIoError("cannot write " + out.string());
  write_report_csv(f, {row});
  if (!f) throw ImageIoError("write failed for " + out.string());
  return kOk;
}

// --- cluster ----------------------------------------------------------------

struct ClusterArgs {
  std::vector<std::string> groups;
  std::string distance = "l2";
  std::string out;
};

int run_cluster(const ClusterArgs& a, int threads) {
  const KFormDistance kind = parse_kform_distance(a.distance);
  std::vector<std::pair<std::string, fs::path>> groups;
  for (const auto& g : a.groups) {
    const auto eq = g.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == g.size()) {
      throw ConfigError("--group expects name=dir, got '" + g + "'");
    }
    groups.emplace_back(g.substr(0, eq), fs::path(g.substr(eq + 1)));
  }
  std::cerr << "seed none (clustering is deterministic)\ninvocation: veinforge cluster";
  for (const auto& g : a.groups) std::cerr << " --group " << g;
  std::cerr << " --distance " << a.distance << " --out " << a.out << "\n";

  std::vector<ClusterInput> inputs;
  for (const auto& [name, dir] : groups) {
    for (const auto& p : list_images(dir)) {
      inputs.push_back({name + "/" + fs::relative(p, dir).generic_string(), name, read_image(p)});
    }
  }
  if (inputs.size() < 2) throw ConfigError("clustering needs at least two images");
  ClusterResult res;
  try {
    res = cluster_images(inputs, kind, threads);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& s : res.skipped) std::cerr << "warning: skipped " << s << " (no usable K-form fit)\n";

  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ImageIoError("cannot write " + out.string());
  f << res.to_json().dump(2) << '\n';
  if (!f) throw ImageIoError("write failed for " + out.string());
  std::cout << "clustered " << res.labels.size() << " images, skipped " << res.skipped.size() << "\n";
  return kOk;
}

// --- augment ----------------------------------------------------------------

struct AugmentArgs {
  std::string in;
  std::string out;
  RoiAugmentParams params;
};

int run_augment(const AugmentArgs& a) {
  std::cerr << "seed none (ROI augmentation is deterministic)\n";
  const GrayImage raw = read_image(a.in);
  const auto crops = roi_augment(raw, a.params);
  fs::create_directories(a.out);
  for (std::size_t i = 0; i < crops.size(); ++i) {
    std::ostringstream name;
    name << "roi_" << std::setw(3) << std::setfill('0') << i << ".png";
    write_png(crops[i], fs::path(a.out) / name.str());
  }
  std::cout << "wrote " << crops.size() << " crops\n";
  return kOk;
}

// --- inspect ----------------------------------------------------------------

struct InspectArgs {
  std::string generator = "physarum";
  std::uint64_t seed = 0;
  std::string out;
  int size = 128;
};

int run_inspect(const InspectArgs& a) {
  const GeneratorKind kind = parse_generator(a.generator);
  std::cerr << "seed " << a.seed << "\n";
  const Candidate c = generate_candidate(kind, a.seed, a.size);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_png(c.image, dir / "primary.png");
  write_png(c.veins, dir / "pattern.png");
  if (c.network) {
    std::ofstream f(dir / "pattern.graph");
    write_graph(f, *c.network);
    if (!f) throw ImageIoError("write failed for pattern.graph");
  }
  if (c.aggregate) {
    std::ofstream f(dir / "pattern.pbm");
    write_pbm(f, *c.aggregate);
    if (!f) throw ImageIoError("write failed for pattern.pbm");
  }
  std::ofstream f(dir / "params.json");
  f << c.params.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"veinforge: synthetic palm-vein database generation and validation"};
  app.require_subcommand(1);
  int threads_flag = 0;
  app.add_option("--threads", threads_flag, "Worker threads (default: VEINFORGE_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Create or extend a synthetic dataset");
  g->add_option("--subjects", gen.subjects, "Number of subjects in the finished dataset")->required();
  g->add_option("--generator", gen.generator, "physarum, colonization or dla")->capture_default_str();
  g->add_option("--seed", gen.seed, "Master seed (random and printed when omitted)");
  g->add_option("--out", gen.out, "Dataset directory")->required();
  g->add_option("--size", gen.size, "Image side in pixels")->capture_default_str();
  g->add_option("--name", gen.name, "Dataset name stored in the manifest")->capture_default_str();

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Compare a synthetic image set against a reference set");
  v->add_option("--real", val.real, "Reference image directory")->required();
  v->add_option("--synthetic", val.synthetic, "Synthetic image directory")->required();
  v->add_option("--metrics", val.metrics, "Comma list of fid, nnloo, kform")->capture_default_str();
  v->add_option("--sample-frac", val.sample_frac, "Fraction of each set to sample")->capture_default_str();
  v->add_option("--seed", val.seed, "Sampling seed (random and printed when omitted)");
  v->add_option("--out", val.out, "CSV report path")->required();

  ClusterArgs clu;
  auto* c = app.add_subcommand("cluster", "Average-linkage dendrogram over per-image K-form fits");
  c->add_option("--group", clu.groups, "Labelled image directory, name=dir (repeatable)")->required();
  c->add_option("--distance", clu.distance, "kl or l2")->capture_default_str();
  c->add_option("--out", clu.out, "Dendrogram JSON path")->required();

  AugmentArgs aug;
  auto* a = app.add_subcommand("augment", "Cut the 87 ROI crops out of a raw image");
  a->add_option("--in", aug.in, "Raw image (PNG or PGM)")->required();
  a->add_option("--out", aug.out, "Output directory")->required();
  a->add_option("--roi-side", aug.params.roi_side, "Crop side in pixels")->capture_default_str();

  InspectArgs ins;
  auto* i = app.add_subcommand("inspect", "Dump one candidate with its vein graph or aggregate");
  i->add_option("--generator", ins.generator, "physarum, colonization or dla")->capture_default_str();
  i->add_option("--seed", ins.seed, "Candidate seed (as recorded per subject)")->required();
  i->add_option("--out", ins.out, "Output directory")->required();
  i->add_option("--size", ins.size, "Image side in pixels")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kConfig;
  }

  try {
    const int threads = resolve_threads(threads_flag);
    if (*g) return run_generate(gen, threads);
    if (*v) return run_validate(val, threads);
    if (*c) return run_cluster(clu, threads);
    if (*a) return run_augment(aug);
    if (*i) return run_inspect(ins);
  } catch (const GeneratorExhausted& e) {
    log_line(std::string("error: ") + e.what());
    return kExhausted;
  } catch (const std::invalid_argument& e) {
    log_line(std::string("error: ") + e.what());
    return kConfig;
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return kIo;
  }
  return kConfig;
}
