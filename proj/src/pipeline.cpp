#include "veinforge/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "veinforge/colonization.hpp"
#include "veinforge/dla.hpp"
#include "veinforge/parallel.hpp"
#include "veinforge/physarum.hpp"
#include "veinforge/random.hpp"
#include "veinforge/raster.hpp"

namespace veinforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Physarum: return "physarum";
    case GeneratorKind::Colonization: return "colonization";
    case GeneratorKind::Dla: return "dla";
  }
  return "unknown";
}

GeneratorKind parse_generator(std::string_view name) {
  if (name == "physarum") return GeneratorKind::Physarum;
  if (name == "colonization") return GeneratorKind::Colonization;
  if (name == "dla") return GeneratorKind::Dla;
  throw std::invalid_argument("unknown generator: " + std::string(name));
}

std::uint64_t candidate_seed(std::uint64_t master_seed, std::uint64_t index) {
  return derive_seed(master_seed, index);
}

Candidate generate_candidate(GeneratorKind kind, std::uint64_t seed, int size) {
  if (size < 16) throw std::invalid_argument("generate_candidate: image size must be >= 16");
  Candidate out;
  GrayImage veins;
  json& p = out.params;
  p["seed"] = seed;
  switch (kind) {
    case GeneratorKind::Physarum: {
      const auto cfg = PhysarumConfig::with_drawn_iterations(derive_seed(seed, 1));
      out.network = run_physarum(cfg);
      veins = rasterize(*out.network, size, size);
      p["network"] = {{"node_count", cfg.node_count},
                      {"iterations", cfg.iterations},
                      {"dt", cfg.dt},
                      {"flux_response", cfg.flux_response.kind == FluxResponse::Kind::Linear ? "linear" : "saturating"},
                      {"flux_exponent", cfg.flux_response.exponent},
                      {"extraction_fraction", cfg.extraction_fraction},
                      {"total_flux", cfg.total_flux},
                      {"extra_terminal_pairs", cfg.extra_terminal_pairs},
                      {"max_radius", cfg.max_radius},
                      {"rng_seed", cfg.rng_seed}};
      break;
    }
    case GeneratorKind::Colonization: {
      ColonizationConfig cfg;
      cfg.rng_seed = derive_seed(seed, 1);
      out.network = run_colonization(cfg).to_network();
      veins = rasterize(*out.network, size, size);
      p["network"] = {{"attractor_count", cfg.attractor_count},
                      {"attraction_distance", cfg.attraction_distance},
                      {"kill_distance", cfg.kill_distance},
                      {"segment_length", cfg.segment_length},
                      {"max_steps", cfg.max_steps},
                      {"terminal_radius", cfg.terminal_radius},
                      {"rng_seed", cfg.rng_seed}};
      break;
    }
    case GeneratorKind::Dla: {
      DlaConfig cfg;
      cfg.rng_seed = derive_seed(seed, 1);
      out.aggregate = run_dla(cfg);
      const Aggregate& agg = *out.aggregate;
      veins = rasterize(agg, size, size);
      p["network"] = {{"particle_count", cfg.particle_count},
                      {"lattice_size", cfg.lattice_size},
                      {"sticking_probability", cfg.sticking_probability},
                      {"launch_radius_margin", cfg.launch_radius_margin},
                      {"truncated", agg.truncated},
                      {"rng_seed", cfg.rng_seed}};
      break;
    }
  }
  const auto enh = EnhanceConfig::draw(derive_seed(seed, 2));
  const std::uint64_t texture_seed = derive_seed(seed, 3);
  p["enhance"] = {{"brightness_factor", enh.brightness_factor},
                  {"blur_radius", enh.blur_radius},
                  {"blur_passes", enh.blur_passes}};
  p["texture_seed"] = texture_seed;
  const GrayImage img = blend(enhance(veins, enh), gen_texture(size, size, texture_seed));
  out.image = GrayImage::from_bytes(size, size, img.to_bytes());
  out.veins = std::move(veins);
  return out;
}

void PrimaryIndex::add(int subject_id, VeinMap map) {
  ids_.push_back(subject_id);
  maps_.push_back(std::move(map));
}

IudResult PrimaryIndex::check(const VeinMap& candidate, double threshold, int threads) const {
  std::vector<double> scores(maps_.size(), 0.0);
  parallel_for(maps_.size(), threads, [&](std::size_t i) { scores[i] = map_similarity(candidate, maps_[i]); });
  IudResult r;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    r.max_score = std::max(r.max_score, scores[i]);
    if (scores[i] > threshold && (r.matching_id < 0 || ids_[i] < r.matching_id)) {
      r.accepted = false;
      r.matching_id = ids_[i];
    }
  }
  return r;
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

json DatasetManifest::to_json() const {
  json subj = json::array();
  for (const auto& s : subjects) {
    subj.push_back({{"id", s.id},
                    {"generator", to_string(s.generator)},
                    {"seed", s.seed},
                    {"candidate", s.candidate},
                    {"params", s.params},
                    {"files", s.files},
                    {"sha256", s.sha256}});
  }
  json rej = json::array();
  for (const auto& r : rejections) {
    rej.push_back({{"candidate", r.candidate}, {"matched_subject", r.matched_subject}, {"score", r.score}});
  }
  return {{"name", name},
          {"format_version", 1},
          {"generator", to_string(generator)},
          {"master_seed", master_seed},
          {"image_size", image_size},
          {"uniqueness_threshold", uniqueness_threshold},
          {"samples_per_subject", AugmentConfig::kSamplesPerSubject},
          {"next_candidate", next_candidate},
          {"created", created},
          {"subjects", subj},
          {"rejections", rej}};
}

namespace {

DatasetManifest parse_manifest(const json& j) {
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  m.generator = parse_generator(j.at("generator").get<std::string>());
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.image_size = j.at("image_size").get<int>();
  m.uniqueness_threshold = j.at("uniqueness_threshold").get<double>();
  m.next_candidate = j.at("next_candidate").get<std::uint64_t>();
  m.created = j.value("created", "");
  for (const auto& s : j.at("subjects")) {
    SubjectEntry e;
    e.id = s.at("id").get<int>();
    e.generator = parse_generator(s.at("generator").get<std::string>());
    e.seed = s.at("seed").get<std::uint64_t>();
    e.candidate = s.at("candidate").get<std::uint64_t>();
    e.params = s.value("params", json::object());
    e.files = s.at("files").get<std::vector<std::string>>();
    e.sha256 = s.at("sha256").get<std::vector<std::string>>();
    if (e.files.size() != e.sha256.size() || e.files.empty()) {
      throw CorruptDataset("manifest: files and sha256 lists differ for subject " + std::to_string(e.id));
    }
    m.subjects.push_back(std::move(e));
  }
  for (const auto& r : j.value("rejections", json::array())) {
    m.rejections.push_back({r.at("candidate").get<std::uint64_t>(), r.at("matched_subject").get<int>(),
                            r.at("score").get<double>()});
  }
  return m;
}

}  // namespace

DatasetManifest DatasetManifest::from_json(const json& j) {
  try {
    return parse_manifest(j);
  } catch (const json::exception& e) {
    throw CorruptDataset(std::string("manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptDataset(std::string("manifest: ") + e.what());
  }
}

void DatasetManifest::save(const fs::path& dir) const {
  const fs::path tmp = dir / (std::string(kFileName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << to_json().dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, dir / kFileName);
}

DatasetManifest DatasetManifest::load(const fs::path& dir) {
  std::ifstream in(dir / kFileName);
  if (!in) throw std::runtime_error("cannot read " + (dir / kFileName).string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CorruptDataset(std::string("manifest: ") + e.what());
  }
  return from_json(j);
}

void verify_manifest(const DatasetManifest& manifest, const fs::path& dir) {
  for (const auto& s : manifest.subjects) {
    for (std::size_t i = 0; i < s.files.size(); ++i) {
      const fs::path p = dir / s.files[i];
      if (!fs::exists(p)) throw CorruptDataset("missing dataset file " + p.string());
      if (sha256_file(p) != s.sha256[i]) throw CorruptDataset("hash mismatch for " + p.string());
    }
  }
}

namespace {

GrayImage load_primary(const SubjectEntry& s, const fs::path& dir) {
  const fs::path p = dir / s.files.front();
  if (!fs::exists(p)) throw CorruptDataset("missing primary " + p.string());
  if (sha256_file(p) != s.sha256.front()) throw CorruptDataset("hash mismatch for " + p.string());
  return read_image(p);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string subject_dir(int id) {
  std::ostringstream s;
  s << std::setw(5) << std::setfill('0') << id;
  return s.str();
}

}  // namespace

IudResult iud_check(const GrayImage& candidate, const DatasetManifest& manifest, const fs::path& dir,
                    int threads) {
  PrimaryIndex index;
  for (const auto& s : manifest.subjects) {
    const GrayImage primary = load_primary(s, dir);
    if (primary.width() != candidate.width() || primary.height() != candidate.height()) {
      throw std::invalid_argument("iud_check: candidate size differs from dataset images");
    }
    index.add(s.id, vein_map(primary));
  }
  return index.check(vein_map(candidate), manifest.uniqueness_threshold, resolve_threads(threads));
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VEINFORGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

GenerateReport generate_database(int count, GeneratorKind kind, std::uint64_t seed, const fs::path& dir,
                                 const GenerateOptions& options) {
  if (count < 1) throw std::invalid_argument("generate_database: count must be >= 1");
  const auto log = options.log ? options.log : [](std::string_view msg) { std::cerr << msg << '\n'; };
  const int threads = resolve_threads(options.threads);
  fs::create_directories(dir);

  GenerateReport report;
  DatasetManifest& m = report.manifest;
  PrimaryIndex index;
  if (fs::exists(dir / DatasetManifest::kFileName)) {
    m = DatasetManifest::load(dir);
    if (m.generator != kind || m.master_seed != seed || m.image_size != options.image_size) {
      throw std::invalid_argument("existing dataset was created with a different generator, seed or size");
    }
    verify_manifest(m, dir);
    for (const auto& s : m.subjects) index.add(s.id, vein_map(load_primary(s, dir)));
  } else {
    m.name = options.name;
    m.generator = kind;
    m.master_seed = seed;
    m.image_size = options.image_size;
    m.created = utc_timestamp();
  }

  int consecutive = 0;
  std::uint64_t evaluated = 0;
  while (static_cast<int>(m.subjects.size()) < count) {
    // Candidates are generated speculatively in parallel and admitted in order.
    const std::size_t batch = static_cast<std::size_t>(std::max(1, threads));
    const std::uint64_t first = m.next_candidate;
    std::vector<std::optional<Candidate>> cands(batch);
    std::vector<std::string> failures(batch);
    parallel_for(batch, threads, [&](std::size_t i) {
      try {
        cands[i] = generate_candidate(kind, candidate_seed(seed, first + i), options.image_size);
      } catch (const std::runtime_error& e) {
        failures[i] = e.what();
      }
    });

    for (std::size_t i = 0; i < batch && static_cast<int>(m.subjects.size()) < count; ++i) {
      const std::uint64_t cand_index = first + i;
      m.next_candidate = cand_index + 1;
      ++evaluated;
      IudResult verdict;
      VeinMap map;
      if (cands[i]) {
        map = vein_map(cands[i]->image);
        verdict = index.check(map, m.uniqueness_threshold, threads);
      } else {
        verdict.accepted = false;
        log("candidate " + std::to_string(cand_index) + " failed: " + failures[i]);
      }

      if (!verdict.accepted) {
        ++report.rejected;
        ++consecutive;
        if (cands[i]) {
          m.rejections.push_back({cand_index, verdict.matching_id, verdict.max_score});
          std::ostringstream msg;
          msg << "candidate " << cand_index << " rejected: matches subject " << verdict.matching_id
              << " (score " << std::setprecision(4) << verdict.max_score << ")";
          log(msg.str());
        }
        if (consecutive >= options.max_consecutive_rejections) {
          m.save(dir);
          const double rate = static_cast<double>(report.rejected) / static_cast<double>(evaluated);
          std::ostringstream msg;
          msg << "generator exhausted: " << consecutive << " consecutive rejections (rejection rate "
              << std::setprecision(3) << rate << ")";
          throw GeneratorExhausted(msg.str(), rate);
        }
        continue;
      }

      consecutive = 0;
      SubjectEntry entry;
      entry.id = m.subjects.empty() ? 1 : m.subjects.back().id + 1;
      entry.generator = kind;
      entry.seed = candidate_seed(seed, cand_index);
      entry.candidate = cand_index;
      entry.params = cands[i]->params;

      AugmentConfig aug = options.augment;
      aug.rng_seed = derive_seed(entry.seed, 4);
      const auto samples = vsa_augment(cands[i]->image, aug);

      const std::string sub = subject_dir(entry.id);
      fs::create_directories(dir / sub);
      auto store = [&](const GrayImage& img, const std::string& file) {
        const std::string rel = sub + "/" + file;
        write_png(img, dir / rel);
        entry.files.push_back(rel);
        entry.sha256.push_back(sha256_file(dir / rel));
      };
      store(cands[i]->image, "primary.png");
      for (std::size_t k = 0; k < samples.size(); ++k) store(samples[k], "sample_" + std::to_string(k + 1) + ".png");

      index.add(entry.id, std::move(map));
      m.subjects.push_back(std::move(entry));
      ++report.admitted;
      m.save(dir);
    }
  }
  m.save(dir);
  return report;
}

}  // namespace veinforge
