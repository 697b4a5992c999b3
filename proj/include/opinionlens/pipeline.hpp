#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "opinionlens/embedder.hpp"
#include "opinionlens/mlp.hpp"
#include "opinionlens/textproc.hpp"

namespace opinionlens {

enum class Mode { kOneStep, kTwoStep };
enum class VerdictLabel { kLeft, kRight, kAbstain };
enum class Fusion { kReembed, kMeanPool };

std::string_view to_string(Mode m);
std::string_view to_string(VerdictLabel l);
std::string_view to_string(Fusion f);
std::optional<Mode> parse_mode(std::string_view s);
std::optional<Fusion> parse_fusion(std::string_view s);

// Class order of the two heads.
inline constexpr int kPoliticalClass = 0;
inline constexpr int kNeutralClass = 1;
inline constexpr int kLeftClass = 0;
inline constexpr int kRightClass = 1;

struct PipelineConfig {
  double tau = 0.5;  // drop a sentence when P(neutral) >= tau
  Fusion fusion = Fusion::kReembed;
  // When the filter removes everything, score the whole text instead of abstaining.
  bool fallback_one_step = false;
  NormalizationRules normalization;
  AbbreviationList abbreviations = AbbreviationList::defaults();
};

struct SentenceTrace {
  SentenceSpan span;  // offsets into the normalized text
  double p_neutral = 0.0;
  bool is_neutral = false;  // final decision, after any overrides
  bool kept = true;
  bool overridden = false;
  std::optional<double> sentence_score;  // display only, never feeds the verdict
};

struct PolarityVerdict {
  double score = 0.0;  // P(right) - P(left)
  VerdictLabel label = VerdictLabel::kAbstain;
  Mode mode = Mode::kTwoStep;
  std::vector<SentenceTrace> sentences;
  double kept_fraction = 1.0;
  bool fell_back = false;
};

nlohmann::ordered_json to_json(const PolarityVerdict& v);

VerdictLabel label_for_score(double score);

struct FilterResult {
  std::vector<SentenceSpan> kept;
  std::vector<SentenceSpan> dropped;
  std::vector<double> p_neutral;  // per input span
};

// Drops span i iff p_neutral[i] >= tau; order is preserved on both sides.
FilterResult filter_neutral(const std::vector<SentenceSpan>& spans, std::span<const double> p_neutral,
                            double tau);

struct SentenceOverride {
  std::size_t index = 0;
  bool keep = true;
};

class Pipeline {
 public:
  // Both heads must be binary, take the embedder's dimension and carry its id.
  // Throws kEmbedderMismatch, kDimensionMismatch, kBadDims or kInvalidSpec.
  Pipeline(std::shared_ptr<const Embedder> embedder, MlpModel detector, MlpModel polarity,
           PipelineConfig config = {});

  PolarityVerdict predict_one_step(std::string_view text) const;
  PolarityVerdict predict_two_step(std::string_view text) const;
  PolarityVerdict predict(std::string_view text, Mode mode) const;
  // Two-step scoring where each override replaces the detector's decision for
  // its sentence. Without overrides this is predict(text, mode). Throws
  // kBadOverrideIndex for out-of-range or repeated indices.
  PolarityVerdict explain(std::string_view text, Mode mode,
                          std::span<const SentenceOverride> overrides) const;

  double p_neutral(std::string_view sentence) const;
  FilterResult filter_neutral(const std::vector<SentenceSpan>& spans) const;
  // P(right) - P(left) for an already-normalized text.
  double polarity_score(std::string_view text) const;

  const Embedder& embedder() const { return *embedder_; }
  std::shared_ptr<const Embedder> embedder_ptr() const { return embedder_; }
  const MlpModel& detector() const { return detector_; }
  const MlpModel& polarity() const { return polarity_; }
  const PipelineConfig& config() const { return config_; }

 private:
  struct Prepared {
    std::string normalized;
    std::vector<SentenceSpan> spans;
    std::vector<EmbeddingVector> sentence_vectors;
    std::vector<double> p_neutral;
  };

  Prepared prepare(std::string_view text) const;
  double score_vector(const EmbeddingVector& v) const;
  PolarityVerdict score_kept(const Prepared& prep, std::vector<bool> keep,
                             const std::vector<bool>& overridden, Mode mode) const;

  std::shared_ptr<const Embedder> embedder_;
  MlpModel detector_;
  MlpModel polarity_;
  PipelineConfig config_;
};

// On-disk bundle: a directory holding manifest.json, embedder.json,
// detector.olmlp, polarity.olmlp, abbreviations.txt (and vectors.tsv for a
// precomputed embedder). The manifest records each part's sha256.
struct Bundle {
  std::shared_ptr<const Pipeline> pipeline;
  std::string model_version;  // sha256 of manifest.json
  std::string path;
};

std::string save_bundle(const std::string& dir, const Pipeline& pipeline);
// Throws kIoError for missing parts, kChecksumMismatch when a part's hash
// differs from the manifest.
Bundle load_bundle(const std::string& dir);

}  // namespace opinionlens
