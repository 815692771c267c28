#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "msa/labels.hpp"

namespace msa::data {

// Feature dimensions of the segment container schema. Frame-rate vocal and
// visual descriptors plus word-rate 300-d embeddings.
constexpr std::size_t kVocalDim = 74;
constexpr std::size_t kVisualDim = 46;
constexpr std::size_t kVerbalDim = 300;

struct Word {
  std::string token;
  double start = 0.0;  // seconds
  double end = 0.0;
  std::vector<double> embedding;  // kVerbalDim
};

struct Frame {
  double time = 0.0;  // seconds
  std::vector<double> features;
};

// One opinion segment as stored on disk.
struct SegmentRecord {
  std::string video_id;
  std::string segment_id;
  std::vector<Word> words;           // ordered, non-overlapping intervals
  std::vector<Frame> vocal_frames;   // kVocalDim features each
  std::vector<Frame> visual_frames;  // kVisualDim features each
  double gold_score = 0.0;           // in [-3, +3]

  std::string key() const { return video_id + "/" + segment_id; }
};

/// Throws ParseError / SchemaError / DomainError naming the segment key and
/// the offending field.
void validate_record(const SegmentRecord& record);

/// Reads a "msa.segments" container; every record is validated and input
/// order is preserved. Duplicate segment keys are rejected.
std::vector<SegmentRecord> load_dataset(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path,
                  std::span<const SegmentRecord> records);

// Word-aligned feature matrices (row-major [length × dim]) plus labels.
// Dimensions are carried explicitly; records loaded from disk always have
// the schema dimensions above.
struct AlignedSegment {
  std::string key;
  std::size_t length = 0;
  std::size_t verbal_dim = 0, vocal_dim = 0, visual_dim = 0;
  std::vector<double> verbal, vocal, visual;
  labels::LabelBundle labels{0.0, labels::Polarity::Positive,
                             labels::Intensity::Neutral};

  std::span<const double> verbal_row(std::size_t i) const {
    return {verbal.data() + i * verbal_dim, verbal_dim};
  }
  std::span<const double> vocal_row(std::size_t i) const {
    return {vocal.data() + i * vocal_dim, vocal_dim};
  }
  std::span<const double> visual_row(std::size_t i) const {
    return {visual.data() + i * visual_dim, visual_dim};
  }
};

struct AlignDiagnostics {
  std::size_t words_without_vocal_frames = 0;
  std::size_t words_without_visual_frames = 0;
};

/// Word-level alignment: each word's vocal/visual row is the arithmetic mean
/// of frames with word.start <= frame.time < word.end; words covering no
/// frames get a zero row and a diagnostic count.
AlignedSegment align_to_words(const SegmentRecord& record,
                              AlignDiagnostics* diag = nullptr);

/// Mean over the word axis of a row-major [rows × cols] matrix.
std::vector<double> pool_segment(std::span<const double> matrix,
                                 std::size_t rows, std::size_t cols);

enum class Fold { Train, Validation, Test };

const char* to_string(Fold f);
Fold fold_from_string(const std::string& name);

// Maps segment keys to folds. File format: one "key<TAB>fold" line per entry
// (fold is train/validation/test); '#' lines are comments.
struct SplitManifest {
  std::map<std::string, Fold> entries;

  static SplitManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

struct SplitFolds {
  std::vector<std::size_t> train, validation, test;  // indices, order-stable
};

/// Partitions `keys` by manifest fold. Every key must appear in the manifest;
/// an unknown key raises an error naming it.
SplitFolds split_dataset(std::span<const std::string> keys,
                         const SplitManifest& manifest);

// Synthetic desk-scale datasets with planted signal. Every selected component
// is planted along its own direction (orthonormal within a modality), so e.g.
// polarity can live in a channel disjoint from the score channel:
//   feature(word) = sum over selected components of coef(component) * u_comp
//                   + 0.05 * N(0,1) per-dimension jitter
// with coef(Score) = S*, coef(Polarity) = sign(S*), coef(Intensity) = |S*|,
// S* ~ U(-3,3) per segment. The gold score is clamp(S* + noise_level * N(0,1))
// to [-3,+3]. All stored values are quantized to 1e-6 (exact round-trip,
// smaller files). Identical config+seed yields a byte-identical file.
enum class SignalComponent { Score, Polarity, Intensity };

struct SignalSpec {
  std::vector<SignalComponent> verbal, vocal, visual;
};

struct SyntheticConfig {
  std::size_t n_segments = 100;
  std::size_t max_words = 6;  // words per segment drawn uniform in 1..max
  SignalSpec signal;
  double noise_level = 0.1;
};

std::vector<SegmentRecord> generate_synthetic(const SyntheticConfig& config,
                                              std::uint64_t seed);

}  // namespace msa::data
