#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "opinionlens/corpus.hpp"
#include "opinionlens/pipeline.hpp"

namespace opinionlens {

// correct / n with abstentions counted as errors. Throws kLengthMismatch, kEmpty.
double accuracy(std::span<const VerdictLabel> predictions, std::span<const Polarity> gold);

// Average (fractional) 1-based ranks; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of the average ranks. Throws kLengthMismatch, kEmpty for
// n < 2 and kDegenerateRanks when either input is constant.
double spearman_rho(std::span<const double> x, std::span<const double> y);

struct ModeMetrics {
  std::optional<double> accuracy;  // over documents with a left/right gold label
  std::size_t n_labeled = 0;
  std::optional<double> spearman_rho;  // against crowd scores, when defined
  std::size_t n_crowd = 0;
  double kept_fraction_mean = 0.0;
};

struct DocumentScores {
  std::string id;
  double one_step = 0.0;
  double two_step = 0.0;
};

struct MetricReport {
  std::size_t n = 0;
  ModeMetrics one_step;
  ModeMetrics two_step;
  std::vector<DocumentScores> documents;

  nlohmann::ordered_json to_json() const;
};

// Runs both modes over `test`. Crowd scores come from `crowd` (by document id)
// when given, otherwise from each document's crowd_score field.
MetricReport compare_modes(const Pipeline& pipeline, const Corpus& test,
                           const std::map<std::string, double>* crowd = nullptr);

// JSON object {"id": score} or CSV with columns id,crowd_score.
std::map<std::string, double> load_crowd_scores(const std::string& path);

enum class Placement { kInterleave, kAppend };
std::optional<Placement> parse_placement(std::string_view s);
std::string_view to_string(Placement p);

struct DilutionSweepSpec {
  std::vector<double> ratios{0.0, 0.2, 0.4, 0.6, 0.75};
  Corpus neutral_pool;
  std::uint64_t seed = 0;
  Placement placement = Placement::kInterleave;

  void validate() const;
};

struct SweepRow {
  double ratio = 0.0;
  Mode mode = Mode::kOneStep;
  std::size_t n = 0;
  double accuracy = 0.0;
  double kept_fraction_mean = 0.0;
  std::uint64_t seed = 0;
};

// The document with round(r * k / (1 - r)) neutral sentences added to its k
// sentences, so that a fraction r of the result is augmented filler. Ratio 0
// (or a rounded count of 0) returns the text unchanged.
std::string dilute(std::string_view text, double ratio, const std::vector<std::string>& pool_sentences,
                   Placement placement, std::uint64_t seed, const PipelineConfig& segmentation);

// Flattens pool documents into their segmented sentences.
std::vector<std::string> pool_sentences(const Corpus& pool, const PipelineConfig& segmentation);

// Rows sorted by (ratio, mode). Requires every document to carry a left/right
// label. Throws kPoolExhausted when a positive ratio meets an empty pool.
std::vector<SweepRow> dilution_sweep(const Pipeline& pipeline, const Corpus& political_test,
                                     const DilutionSweepSpec& spec);

// Header "ratio,mode,n,accuracy,kept_fraction_mean,seed".
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace opinionlens
