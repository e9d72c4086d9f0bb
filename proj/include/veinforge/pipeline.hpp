#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "veinforge/augment.hpp"
#include "veinforge/dla.hpp"
#include "veinforge/image.hpp"
#include "veinforge/network.hpp"
#include "veinforge/similarity.hpp"

namespace veinforge {

enum class GeneratorKind { Physarum, Colonization, Dla };

std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator(std::string_view name);

/// One vein image generator run: network growth, raster, enhancement and
/// texture blend, all derived from `seed`.
struct Candidate {
  GrayImage image;  // 8-bit quantized, identical to what is written to disk
  nlohmann::json params;
  GrayImage veins;  // rendered pattern before enhancement and texture
  std::optional<VeinNetwork> network;  // physarum and colonization
  std::optional<Aggregate> aggregate;  // dla
};

Candidate generate_candidate(GeneratorKind kind, std::uint64_t seed, int size = 128);

/// Seed of the n-th candidate drawn from a master seed.
std::uint64_t candidate_seed(std::uint64_t master_seed, std::uint64_t index);

inline constexpr double kUniquenessThreshold = 0.1;

struct IudResult {
  bool accepted = true;
  int matching_id = -1;    // lowest subject id whose score exceeded the threshold
  double max_score = 0.0;  // largest score over all stored primaries
};

/// Vein maps of the admitted primaries, keyed by subject id.
class PrimaryIndex {
 public:
  void add(int subject_id, VeinMap map);
  std::size_t size() const { return maps_.size(); }
  /// Exhaustive comparison, split across `threads` workers. The result does
  /// not depend on the worker count or comparison order.
  IudResult check(const VeinMap& candidate, double threshold = kUniquenessThreshold,
                  int threads = 1) const;

 private:
  std::vector<int> ids_;
  std::vector<VeinMap> maps_;
};

class CorruptDataset : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeneratorExhausted : public std::runtime_error {
 public:
  GeneratorExhausted(const std::string& what, double rejection_rate)
      : std::runtime_error(what), rejection_rate(rejection_rate) {}
  double rejection_rate;
};

struct SubjectEntry {
  int id = 0;
  GeneratorKind generator = GeneratorKind::Physarum;
  std::uint64_t seed = 0;
  std::uint64_t candidate = 0;
  nlohmann::json params;
  std::vector<std::string> files;   // relative to the dataset root; primary first
  std::vector<std::string> sha256;  // aligned with files
};

struct RejectionEvent {
  std::uint64_t candidate = 0;
  int matched_subject = 0;
  double score = 0.0;
};

struct DatasetManifest {
  std::string name;
  GeneratorKind generator = GeneratorKind::Physarum;
  std::uint64_t master_seed = 0;
  int image_size = 128;
  double uniqueness_threshold = kUniquenessThreshold;
  std::uint64_t next_candidate = 0;
  std::string created;
  std::vector<SubjectEntry> subjects;
  std::vector<RejectionEvent> rejections;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);

  static constexpr const char* kFileName = "manifest.json";
  void save(const std::filesystem::path& dir) const;
  static DatasetManifest load(const std::filesystem::path& dir);
};

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Re-hashes every listed file. Throws CorruptDataset on a missing file or mismatch.
void verify_manifest(const DatasetManifest& manifest, const std::filesystem::path& dir);

/// Loads and hash-checks every primary, then runs the uniqueness check.
IudResult iud_check(const GrayImage& candidate, const DatasetManifest& manifest,
                    const std::filesystem::path& dir, int threads = 1);

/// Worker count: explicit value if > 0, else VEINFORGE_THREADS, else hardware concurrency.
int resolve_threads(int requested = 0);

struct GenerateOptions {
  int image_size = 128;
  int threads = 0;
  int max_consecutive_rejections = 50;
  AugmentConfig augment{};  // rng_seed is replaced per subject
  std::string name = "veinforge";
  std::function<void(std::string_view)> log;  // defaults to standard error
};

struct GenerateReport {
  DatasetManifest manifest;
  int admitted = 0;  // subjects added by this call
  int rejected = 0;  // candidates rejected by this call
};

/// Grows (or creates) the dataset under output_dir until it holds `count`
/// subjects. Admission follows the seed-derived candidate order, so a
/// resumed run reproduces exactly the subjects of a one-shot run.
GenerateReport generate_database(int count, GeneratorKind kind, std::uint64_t seed,
                                 const std::filesystem::path& output_dir,
                                 const GenerateOptions& options = {});

}  // namespace veinforge
