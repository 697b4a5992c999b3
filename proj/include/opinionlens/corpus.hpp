#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace opinionlens {

enum class Polarity { kLeft, kRight, kNeutral };
enum class SourceKind { kShortForm, kLongForm };

std::string_view to_string(Polarity p);
std::string_view to_string(SourceKind s);
std::optional<Polarity> parse_polarity(std::string_view s);
std::optional<SourceKind> parse_source_kind(std::string_view s);

struct Document {
  std::string id;
  std::string text;
  SourceKind source = SourceKind::kShortForm;
  std::optional<std::string> author;
  std::optional<Polarity> label;
  std::optional<double> crowd_score;  // in [-1, +1]

  bool operator==(const Document&) const = default;
};

using Corpus = std::vector<Document>;

nlohmann::ordered_json to_json(const Document& doc);
// Validates every field; throws Error(kMalformedRecord / kEmptyText).
Document document_from_json(const nlohmann::json& j, std::size_t line_no);

enum class CorpusFormat { kJsonl, kCsv };

struct LoadOptions {
  // Skip bad records (reported through `issues`) instead of failing.
  bool lenient = false;
};

struct LoadIssue {
  std::size_t line_no = 0;
  std::string reason;
};

struct CsvRow {
  std::size_t line_no = 0;  // physical line the row starts on
  std::vector<std::string> fields;
};

// RFC 4180 records: quoted fields may hold commas, doubled quotes and newlines.
std::vector<CsvRow> parse_csv(std::string_view content);

Corpus parse_corpus(std::string_view content, CorpusFormat format, const LoadOptions& options = {},
                    std::vector<LoadIssue>* issues = nullptr);
Corpus load_corpus(const std::string& path, CorpusFormat format, const LoadOptions& options = {},
                   std::vector<LoadIssue>* issues = nullptr);
// Picks the format from the file extension (.csv → csv, anything else → jsonl).
Corpus load_corpus(const std::string& path, const LoadOptions& options = {},
                   std::vector<LoadIssue>* issues = nullptr);

std::string to_jsonl(const Corpus& corpus);
void save_corpus_jsonl(const Corpus& corpus, const std::string& path);

// Author handle → side. Handles are stored lowercase.
class AuthorMap {
 public:
  AuthorMap() = default;

  // Throws kInvalidSpec if `side` is neutral or the handle already maps elsewhere.
  void add(std::string_view handle, Polarity side);
  std::optional<Polarity> lookup(std::string_view handle) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Polarity>& entries() const { return entries_; }

  // JSON object {"@handle": "left"|"right", ...}.
  static AuthorMap from_json(const nlohmann::json& j);
  static AuthorMap load(const std::string& path);
  nlohmann::ordered_json to_json() const;

 private:
  std::map<std::string, Polarity> entries_;
};

Corpus label_by_authorship(const Corpus& corpus, const AuthorMap& map);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Corpus train;
  Corpus test;
};

// Seeded shuffle then prefix cut of round(train_fraction * N). Both sides keep
// the corpus's original relative order. Throws kCorpusTooSmall when either
// side would be empty.
SplitResult split(const Corpus& corpus, const SplitSpec& spec);

struct SyntheticSpec {
  std::size_t n_polar_per_class = 2000;
  std::size_t n_neutral = 2000;
  std::vector<std::string> lexicon_left;
  std::vector<std::string> lexicon_right;
  std::vector<std::string> lexicon_neutral;
  std::vector<std::string> function_words;
  std::pair<std::size_t, std::size_t> sentence_length_range{6, 14};
  // Probability that a word slot draws from the topical lexicon rather than
  // the function words. Every sentence carries at least one topical word.
  double topic_word_fraction = 0.4;
  // Authors per side; polar documents are attributed round-robin.
  std::size_t authors_per_side = 14;
  std::uint64_t seed = 42;

  static SyntheticSpec defaults();
  static SyntheticSpec from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
  void validate() const;
};

struct SyntheticCorpora {
  Corpus polar;
  Corpus neutral;
  AuthorMap authors;
};

SyntheticCorpora synthesize(const SyntheticSpec& spec);

// One synthetic sentence from `lexicon` mixed with the spec's function words.
std::string synthesize_sentence(const SyntheticSpec& spec, const std::vector<std::string>& lexicon,
                                std::uint64_t seed);

struct ArticleSpec {
  std::size_t n_articles = 40;
  std::pair<std::size_t, std::size_t> polar_sentences_range{3, 7};
  // Fraction of each article's sentences that are neutral filler.
  std::pair<double, double> neutral_fraction_range{0.55, 0.8};
  double crowd_noise_sd = 0.15;
  std::uint64_t seed = 7;
};

// Long-form documents mixing left/right sentences from `polar` with neutral
// filler from `neutral`. Gold label is the majority side (ties redrawn);
// crowd_score = clamp((R - L) / (R + L) + noise, -1, 1).
Corpus synthesize_articles(const Corpus& polar, const Corpus& neutral, const ArticleSpec& spec);

}  // namespace opinionlens
