#include "opinionlens/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "opinionlens/error.hpp"
#include "opinionlens/util.hpp"

namespace opinionlens {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::kLeft: return "left";
    case Polarity::kRight: return "right";
    case Polarity::kNeutral: return "neutral";
  }
  return "?";
}

std::string_view to_string(SourceKind s) {
  return s == SourceKind::kShortForm ? "short_form" : "long_form";
}

std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "left") return Polarity::kLeft;
  if (s == "right") return Polarity::kRight;
  if (s == "neutral") return Polarity::kNeutral;
  return std::nullopt;
}

std::optional<SourceKind> parse_source_kind(std::string_view s) {
  if (s == "short_form") return SourceKind::kShortForm;
  if (s == "long_form") return SourceKind::kLongForm;
  return std::nullopt;
}

ordered_json to_json(const Document& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  j["source"] = to_string(doc.source);
  if (doc.author) j["author"] = *doc.author;
  if (doc.label) j["label"] = to_string(*doc.label);
  if (doc.crowd_score) j["crowd_score"] = *doc.crowd_score;
  return j;
}

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::kMalformedRecord,
              "malformed record at line " + std::to_string(line_no) + ": " + why);
}

const json* optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

}  // namespace

Document document_from_json(const json& j, std::size_t line_no) {
  if (!j.is_object()) malformed(line_no, "expected object");
  Document doc;
  const json* id = optional_field(j, "id");
  if (!id || !id->is_string() || id->get<std::string>().empty()) malformed(line_no, "missing id");
  doc.id = id->get<std::string>();
  const json* text = optional_field(j, "text");
  if (!text || !text->is_string()) malformed(line_no, "missing text");
  doc.text = text->get<std::string>();
  if (trim(doc.text).empty()) {
    throw Error(ErrorCode::kEmptyText,
                "empty text for id " + doc.id + " at line " + std::to_string(line_no));
  }
  if (const json* src = optional_field(j, "source")) {
    auto kind = src->is_string() ? parse_source_kind(src->get<std::string>()) : std::nullopt;
    if (!kind) malformed(line_no, "bad source");
    doc.source = *kind;
  }
  if (const json* author = optional_field(j, "author")) {
    if (!author->is_string()) malformed(line_no, "bad author");
    doc.author = author->get<std::string>();
  }
  if (const json* label = optional_field(j, "label")) {
    auto p = label->is_string() ? parse_polarity(label->get<std::string>()) : std::nullopt;
    if (!p) malformed(line_no, "bad label");
    doc.label = *p;
  }
  if (const json* crowd = optional_field(j, "crowd_score")) {
    if (!crowd->is_number()) malformed(line_no, "bad crowd_score");
    const double v = crowd->get<double>();
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) malformed(line_no, "crowd_score outside [-1, 1]");
    doc.crowd_score = v;
  }
  return doc;
}

std::vector<CsvRow> parse_csv(std::string_view s) {
  std::vector<CsvRow> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1, row_line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back({row_line, std::move(row)});
    row.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // tolerated before \n
    } else if (c == '\n') {
      end_row();
      ++line;
      row_line = line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kMalformedRecord, "unterminated quoted CSV field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

namespace {

template <typename Fn>
void with_policy(const LoadOptions& options, std::vector<LoadIssue>* issues, std::size_t line_no,
                 Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (!options.lenient) throw;
    if (issues) issues->push_back({line_no, e.what()});
  }
}

}  // namespace

Corpus parse_corpus(std::string_view content, CorpusFormat format, const LoadOptions& options,
                    std::vector<LoadIssue>* issues) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  auto accept = [&](json record, std::size_t line_no) {
    Document doc = document_from_json(record, line_no);
    if (!seen.insert(doc.id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id " + doc.id);
    }
    corpus.push_back(std::move(doc));
  };

  if (format == CorpusFormat::kJsonl) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
      std::size_t nl = content.find('\n', pos);
      if (nl == std::string_view::npos) nl = content.size();
      const std::string_view line = content.substr(pos, nl - pos);
      ++line_no;
      pos = nl + 1;
      if (trim(line).empty()) continue;
      with_policy(options, issues, line_no, [&] {
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) malformed(line_no, "invalid JSON");
        accept(std::move(record), line_no);
      });
    }
    return corpus;
  }

  const auto rows = parse_csv(content);
  if (rows.empty()) throw Error(ErrorCode::kMalformedRecord, "CSV header row required");
  const std::vector<std::string>& header = rows.front().fields;
  static const std::set<std::string> kKnown = {"id", "text", "author", "label", "crowd_score",
                                               "source"};
  for (const auto& name : header) {
    if (!kKnown.count(name)) malformed(1, "unknown CSV column '" + name + "'");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line_no, fields] = rows[r];
    with_policy(options, issues, line_no, [&] {
      if (fields.size() != header.size()) malformed(line_no, "column count mismatch");
      json record = json::object();
      for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        const std::string& value = fields[c];
        if (value.empty() && name != "text" && name != "id") continue;
        if (name == "crowd_score") {
          double v;
          if (!parse_double(trim(value), v)) malformed(line_no, "bad crowd_score");
          record[name] = v;
        } else {
          record[name] = value;
        }
      }
      accept(std::move(record), line_no);
    });
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, CorpusFormat format, const LoadOptions& options,
                   std::vector<LoadIssue>* issues) {
  return parse_corpus(read_file(path), format, options, issues);
}

Corpus load_corpus(const std::string& path, const LoadOptions& options,
                   std::vector<LoadIssue>* issues) {
  const bool csv = path.size() >= 4 && to_lower_ascii(path.substr(path.size() - 4)) == ".csv";
  return load_corpus(path, csv ? CorpusFormat::kCsv : CorpusFormat::kJsonl, options, issues);
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus) {
    out += to_json(doc).dump();
    out += '\n';
  }
  return out;
}

void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
  write_file(path, to_jsonl(corpus));
}

// ---------------------------------------------------------------------------

void AuthorMap::add(std::string_view handle, Polarity side) {
  if (side == Polarity::kNeutral) {
    throw Error(ErrorCode::kInvalidSpec, "author map entries must be left or right");
  }
  std::string key = to_lower_ascii(trim(handle));
  if (key.empty()) throw Error(ErrorCode::kInvalidSpec, "empty author handle");
  auto [it, inserted] = entries_.emplace(key, side);
  if (!inserted && it->second != side) {
    throw Error(ErrorCode::kInvalidSpec, "author " + key + " mapped to both sides");
  }
}

std::optional<Polarity> AuthorMap::lookup(std::string_view handle) const {
  auto it = entries_.find(to_lower_ascii(trim(handle)));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

AuthorMap AuthorMap::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidSpec, "author map must be a JSON object");
  AuthorMap map;
  for (const auto& [handle, side] : j.items()) {
    auto p = side.is_string() ? parse_polarity(side.get<std::string>()) : std::nullopt;
    if (!p) throw Error(ErrorCode::kInvalidSpec, "bad side for author " + handle);
    map.add(handle, *p);
  }
  return map;
}

AuthorMap AuthorMap::load(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kInvalidSpec, "author map is not valid JSON");
  return from_json(j);
}

ordered_json AuthorMap::to_json() const {
  ordered_json j = ordered_json::object();
  for (const auto& [handle, side] : entries_) j[handle] = to_string(side);
  return j;
}

Corpus label_by_authorship(const Corpus& corpus, const AuthorMap& map) {
  Corpus out = corpus;
  for (auto& doc : out) {
    if (!doc.author) continue;
    if (auto side = map.lookup(*doc.author)) doc.label = *side;
  }
  return out;
}

SplitResult split(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "train_fraction must be in (0, 1)");
  }
  const std::size_t n = corpus.size();
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  if (n < 2 || n_train == 0 || n_train >= n) {
    throw Error(ErrorCode::kCorpusTooSmall,
                "corpus of " + std::to_string(n) + " documents cannot be split with both sides non-empty");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  SplitResult result;
  result.train.reserve(train_idx.size());
  result.test.reserve(test_idx.size());
  for (auto i : train_idx) result.train.push_back(corpus[i]);
  for (auto i : test_idx) result.test.push_back(corpus[i]);
  return result;
}

// ---------------------------------------------------------------------------

SyntheticSpec SyntheticSpec::defaults() {
  SyntheticSpec spec;
  spec.lexicon_left = {
      "medicare",   "unions",      "climate",     "equality",    "healthcare",  "immigrants",
      "wages",      "renewable",   "diversity",   "abortion",    "welfare",     "progressive",
      "regulation", "minimum",     "students",    "forgiveness", "voting",      "inclusion",
      "justice",    "solidarity",  "workers",     "pensions",    "housing",     "affordable",
      "emissions",  "solar",       "greenhouse",  "refugees",    "asylum",      "tolerance",
      "feminism",   "reparations", "inequality",  "billionaires", "corporate",  "greed",
      "pollution",  "transit",     "childcare",   "paidleave",   "daycare",     "teachers",
      "medicaid",   "lgbtq",       "sanctuary",   "wealthtax",   "universal",   "dreamers",
      "organizing", "activists"};
  spec.lexicon_right = {
      "taxes",      "border",      "wall",        "freedom",     "liberty",     "guns",
      "amendment",  "military",    "veterans",    "police",      "lawful",      "patriots",
      "constitution", "deregulation", "markets",  "business",    "jobs",        "growth",
      "faith",      "church",      "family",      "values",      "prolife",     "unborn",
      "sovereignty", "security",   "illegal",     "deportation", "tariffs",     "coal",
      "oil",        "drilling",    "pipeline",    "fracking",    "traditional", "conservative",
      "spending",   "deficit",     "capitalism",  "enterprise",  "entrepreneurs", "religious",
      "militia",    "sheriff",     "homeland",    "patriotism",  "flag",        "anthem",
      "ranchers",   "taxpayers"};
  spec.lexicon_neutral = {
      "weather",   "coffee",   "breakfast", "sunshine",  "puppy",     "kitten",   "movie",
      "concert",   "pizza",    "birthday",  "vacation",  "beach",     "mountain", "garden",
      "flowers",   "recipe",   "cookies",   "football",  "basketball", "playlist", "music",
      "guitar",    "painting", "weekend",   "morning",   "sunset",    "rainbow",  "picnic",
      "bicycle",   "hiking",   "camping",   "chocolate", "pancakes",  "sandwich", "laundry",
      "homework",  "library",  "novel",     "podcast",   "selfie",    "friends",  "party",
      "dinner",    "lunch",    "dessert",   "icecream",  "tea",       "soup",     "snow",
      "autumn"};
  spec.function_words = {"the",  "a",    "of",    "and",   "to",   "in",    "is",    "that",
                         "for",  "it",   "on",    "with",  "as",   "this",  "was",   "be",
                         "at",   "by",   "we",    "our",   "they", "their", "will",  "should",
                         "more", "all",  "not",   "about", "from", "very",  "just",  "now",
                         "so",   "really", "what", "when",  "how",  "here",  "there", "some"};
  return spec;
}

SyntheticSpec SyntheticSpec::from_json(const json& j) {
  SyntheticSpec spec = defaults();
  if (!j.is_object()) throw Error(ErrorCode::kInvalidSpec, "synthetic spec must be a JSON object");
  try {
    if (j.contains("n_polar_per_class")) spec.n_polar_per_class = j.at("n_polar_per_class").get<std::size_t>();
    if (j.contains("n_neutral")) spec.n_neutral = j.at("n_neutral").get<std::size_t>();
    if (j.contains("lexicon_left")) spec.lexicon_left = j.at("lexicon_left").get<std::vector<std::string>>();
    if (j.contains("lexicon_right")) spec.lexicon_right = j.at("lexicon_right").get<std::vector<std::string>>();
    if (j.contains("lexicon_neutral")) spec.lexicon_neutral = j.at("lexicon_neutral").get<std::vector<std::string>>();
    if (j.contains("function_words")) spec.function_words = j.at("function_words").get<std::vector<std::string>>();
    if (j.contains("sentence_length_range")) {
      const auto r = j.at("sentence_length_range").get<std::vector<std::size_t>>();
      if (r.size() != 2) throw Error(ErrorCode::kInvalidSpec, "sentence_length_range needs [min, max]");
      spec.sentence_length_range = {r[0], r[1]};
    }
    if (j.contains("topic_word_fraction")) spec.topic_word_fraction = j.at("topic_word_fraction").get<double>();
    if (j.contains("authors_per_side")) spec.authors_per_side = j.at("authors_per_side").get<std::size_t>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ordered_json SyntheticSpec::to_json() const {
  ordered_json j;
  j["n_polar_per_class"] = n_polar_per_class;
  j["n_neutral"] = n_neutral;
  j["lexicon_left"] = lexicon_left;
  j["lexicon_right"] = lexicon_right;
  j["lexicon_neutral"] = lexicon_neutral;
  j["function_words"] = function_words;
  j["sentence_length_range"] = {sentence_length_range.first, sentence_length_range.second};
  j["topic_word_fraction"] = topic_word_fraction;
  j["authors_per_side"] = authors_per_side;
  j["seed"] = seed;
  return j;
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidSpec, why); };
  if (n_polar_per_class < 1) fail("n_polar_per_class must be >= 1");
  if (n_neutral < 1) fail("n_neutral must be >= 1");
  if (lexicon_left.empty() || lexicon_right.empty() || lexicon_neutral.empty()) {
    fail("lexicons must be non-empty");
  }
  if (sentence_length_range.first < 1 || sentence_length_range.first > sentence_length_range.second) {
    fail("sentence_length_range must satisfy 1 <= min <= max");
  }
  if (!(topic_word_fraction > 0.0 && topic_word_fraction <= 1.0)) {
    fail("topic_word_fraction must be in (0, 1]");
  }
  if (authors_per_side < 1) fail("authors_per_side must be >= 1");
  std::set<std::string> seen;
  for (const auto* lex : {&lexicon_left, &lexicon_right, &lexicon_neutral, &function_words}) {
    for (const auto& w : *lex) {
      if (w.empty() || w.find_first_of(" \t\n.!?") != std::string::npos) fail("bad lexicon word '" + w + "'");
      if (!seen.insert(to_lower_ascii(w)).second) fail("lexicons not disjoint at '" + w + "'");
    }
  }
}

std::string synthesize_sentence(const SyntheticSpec& spec, const std::vector<std::string>& lexicon,
                                std::uint64_t seed) {
  Rng rng(seed);
  const auto [lo, hi] = spec.sentence_length_range;
  const std::size_t len = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
  std::vector<std::string> words(len);
  std::vector<bool> topical(len);
  bool any_topical = false;
  for (std::size_t i = 0; i < len; ++i) {
    topical[i] = spec.function_words.empty() || rng.uniform01() < spec.topic_word_fraction;
    any_topical = any_topical || topical[i];
  }
  if (!any_topical) topical[rng.below(len)] = true;
  for (std::size_t i = 0; i < len; ++i) {
    const auto& pool = topical[i] ? lexicon : spec.function_words;
    words[i] = pool[rng.below(pool.size())];
  }
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  out += '.';
  return out;
}

namespace {

std::string padded(std::size_t i, int width = 5) {
  std::string s = std::to_string(i);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

}  // namespace

SyntheticCorpora synthesize(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticCorpora out;
  for (std::size_t a = 0; a < spec.authors_per_side; ++a) {
    out.authors.add("@left_voice_" + std::to_string(a), Polarity::kLeft);
    out.authors.add("@right_voice_" + std::to_string(a), Polarity::kRight);
  }
  // Alternate classes so any prefix of the corpus is balanced.
  for (std::size_t i = 0; i < spec.n_polar_per_class; ++i) {
    for (int side = 0; side < 2; ++side) {
      const bool left = side == 0;
      Document doc;
      doc.id = std::string(left ? "left-" : "right-") + padded(i);
      doc.text = synthesize_sentence(spec, left ? spec.lexicon_left : spec.lexicon_right,
                                     mix_seed(spec.seed, 1 + static_cast<std::uint64_t>(side), i));
      doc.author = std::string(left ? "@left_voice_" : "@right_voice_") +
                   std::to_string(i % spec.authors_per_side);
      doc.label = left ? Polarity::kLeft : Polarity::kRight;
      out.polar.push_back(std::move(doc));
    }
  }
  for (std::size_t i = 0; i < spec.n_neutral; ++i) {
    Document doc;
    doc.id = "neutral-" + padded(i);
    doc.text = synthesize_sentence(spec, spec.lexicon_neutral, mix_seed(spec.seed, 3, i));
    doc.author = "@general_stream";
    doc.label = Polarity::kNeutral;
    out.neutral.push_back(std::move(doc));
  }
  return out;
}

Corpus synthesize_articles(const Corpus& polar, const Corpus& neutral, const ArticleSpec& spec) {
  std::vector<const Document*> left, right;
  for (const auto& d : polar) {
    if (d.label == Polarity::kLeft) left.push_back(&d);
    if (d.label == Polarity::kRight) right.push_back(&d);
  }
  if (left.empty() || right.empty() || neutral.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "articles need left, right and neutral sentence pools");
  }
  const auto [p_lo, p_hi] = spec.polar_sentences_range;
  if (p_lo < 1 || p_lo > p_hi) throw Error(ErrorCode::kInvalidSpec, "bad polar_sentences_range");
  const auto [f_lo, f_hi] = spec.neutral_fraction_range;
  if (!(f_lo >= 0.0 && f_lo <= f_hi && f_hi < 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "bad neutral_fraction_range");
  }

  Corpus articles;
  for (std::size_t a = 0; a < spec.n_articles; ++a) {
    Rng rng(mix_seed(spec.seed, 0xa7, a));
    const std::size_t n_polar = p_lo + static_cast<std::size_t>(rng.below(p_hi - p_lo + 1));
    // Side bias per article so margins spread across the whole scale.
    const double p_right = rng.uniform01();
    std::size_t n_right = 0;
    do {
      n_right = 0;
      for (std::size_t i = 0; i < n_polar; ++i) n_right += rng.uniform01() < p_right ? 1 : 0;
    } while (2 * n_right == n_polar);
    const std::size_t n_left = n_polar - n_right;
    const double fraction = rng.uniform(f_lo, f_hi);
    const auto n_neutral = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(n_polar) / (1.0 - fraction)));

    std::vector<std::string> sentences;
    for (std::size_t i = 0; i < n_left; ++i) sentences.push_back(left[rng.below(left.size())]->text);
    for (std::size_t i = 0; i < n_right; ++i) sentences.push_back(right[rng.below(right.size())]->text);
    for (std::size_t i = 0; i < n_neutral; ++i) sentences.push_back(neutral[rng.below(neutral.size())].text);
    rng.shuffle(sentences);

    Document doc;
    doc.id = "article-" + padded(a, 4);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (i) doc.text += ' ';
      doc.text += sentences[i];
    }
    doc.source = SourceKind::kLongForm;
    doc.label = n_right > n_left ? Polarity::kRight : Polarity::kLeft;
    const double margin = (static_cast<double>(n_right) - static_cast<double>(n_left)) /
                          static_cast<double>(n_polar);
    doc.crowd_score = std::clamp(margin + spec.crowd_noise_sd * rng.normal(), -1.0, 1.0);
    articles.push_back(std::move(doc));
  }
  return articles;
}

}  // namespace opinionlens
