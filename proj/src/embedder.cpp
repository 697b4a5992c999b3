#include "opinionlens/embedder.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "opinionlens/error.hpp"
#include "opinionlens/textproc.hpp"
#include "opinionlens/util.hpp"

namespace opinionlens {

using nlohmann::json;
using nlohmann::ordered_json;

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const EmbeddingVector& v) { return std::sqrt(dot(v, v)); }

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<EmbeddingVector> Embedder::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(embed(texts[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "batch index " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void HashedNgramConfig::validate() const {
  if (dim < 16) throw Error(ErrorCode::kInvalidSpec, "embedder dim must be >= 16");
  if (word_ngrams.empty() || char_ngrams.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "embedder n-gram sets must be non-empty");
  }
  for (int n : word_ngrams) {
    if (n < 1) throw Error(ErrorCode::kInvalidSpec, "word n-gram order must be >= 1");
  }
  for (int n : char_ngrams) {
    if (n < 1) throw Error(ErrorCode::kInvalidSpec, "char n-gram order must be >= 1");
  }
}

ordered_json HashedNgramConfig::to_json() const {
  ordered_json j;
  j["kind"] = "hashed_ngram";
  j["dim"] = dim;
  j["word_ngrams"] = word_ngrams;
  j["char_ngrams"] = char_ngrams;
  j["hash_seed"] = hash_seed;
  j["signed"] = signed_hash;
  return j;
}

HashedNgramConfig HashedNgramConfig::from_json(const json& j) {
  HashedNgramConfig c;
  try {
    if (j.contains("dim")) c.dim = j.at("dim").get<std::size_t>();
    if (j.contains("word_ngrams")) c.word_ngrams = j.at("word_ngrams").get<std::set<int>>();
    if (j.contains("char_ngrams")) c.char_ngrams = j.at("char_ngrams").get<std::set<int>>();
    if (j.contains("hash_seed")) c.hash_seed = j.at("hash_seed").get<std::uint64_t>();
    if (j.contains("signed")) c.signed_hash = j.at("signed").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("embedder config: ") + e.what());
  }
  c.validate();
  return c;
}

HashedNgramEmbedder::HashedNgramEmbedder(HashedNgramConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::string HashedNgramEmbedder::id() const {
  std::ostringstream os;
  os << "hashed-ngram/v1:dim=" << config_.dim << ":w=";
  bool first = true;
  for (int n : config_.word_ngrams) os << (first ? "" : ",") << n, first = false;
  os << ":c=";
  first = true;
  for (int n : config_.char_ngrams) os << (first ? "" : ",") << n, first = false;
  os << ":seed=" << config_.hash_seed << ":signed=" << (config_.signed_hash ? 1 : 0);
  return os.str();
}

namespace {

// Lowercased whitespace tokens with leading/trailing ASCII punctuation
// removed; tokens that are pure punctuation are dropped.
std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  const std::string lowered = to_lower_ascii(text);
  std::size_t i = 0;
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  const auto is_punct = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u) && c != '<' && c != '>';
  };
  while (i < lowered.size()) {
    while (i < lowered.size() && is_space(lowered[i])) ++i;
    std::size_t j = i;
    while (j < lowered.size() && !is_space(lowered[j])) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(lowered[b])) ++b;
    while (e > b && is_punct(lowered[e - 1])) --e;
    if (e > b) tokens.emplace_back(lowered.substr(b, e - b));
    i = j;
  }
  return tokens;
}

}  // namespace

std::vector<std::string> HashedNgramEmbedder::features(std::string_view text) const {
  const auto tokens = word_tokens(text);
  std::vector<std::string> out;
  for (int n : config_.word_ngrams) {
    const auto order = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      std::string f = "w" + std::to_string(n) + ":";
      for (std::size_t k = 0; k < order; ++k) {
        if (k) f += ' ';
        f += tokens[i + k];
      }
      out.push_back(std::move(f));
    }
  }
  for (const auto& token : tokens) {
    const std::string marked = "<" + token + ">";
    for (int n : config_.char_ngrams) {
      const auto order = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i + order <= marked.size(); ++i) {
        out.push_back("c:" + marked.substr(i, order));
      }
    }
  }
  return out;
}

std::pair<std::size_t, double> HashedNgramEmbedder::bucket(std::string_view feature) const {
  const std::uint64_t h = splitmix64(fnv1a64(feature) ^ splitmix64(config_.hash_seed));
  const auto index = static_cast<std::size_t>((h & 0xffffffffULL) % config_.dim);
  const double sign = config_.signed_hash && (h >> 63) ? -1.0 : 1.0;
  return {index, sign};
}

EmbeddingVector HashedNgramEmbedder::embed(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
  EmbeddingVector v(config_.dim, 0.0);
  for (const auto& f : features(text)) {
    const auto [index, sign] = bucket(f);
    v[index] += sign;
  }
  double norm = l2_norm(v);
  if (norm == 0.0) {
    // Every feature cancelled out or the text was only punctuation: fall back
    // to a single feature for the whole trimmed text so the result stays unit norm.
    const auto [index, sign] = bucket("t:" + trim(text));
    v[index] = sign;
    norm = 1.0;
  }
  for (double& x : v) x /= norm;
  return v;
}

ordered_json HashedNgramEmbedder::config_json() const { return config_.to_json(); }

// ---------------------------------------------------------------------------

std::string text_digest(std::string_view text) {
  NormalizationRules whitespace_only;
  whitespace_only.replace_urls = false;
  whitespace_only.replace_mentions = false;
  whitespace_only.strip_hashtag_mark = false;
  return sha256_hex(normalize(text, whitespace_only));
}

PrecomputedStore::PrecomputedStore(std::size_t dim, std::string digest_algo)
    : dim_(dim), digest_algo_(std::move(digest_algo)) {
  if (dim_ == 0) throw Error(ErrorCode::kDimensionMismatch, "store dim must be positive");
  if (digest_algo_ != "sha256") {
    throw Error(ErrorCode::kMalformedRow, "unsupported digest algorithm " + digest_algo_);
  }
}

void PrecomputedStore::insert(const std::string& digest, EmbeddingVector v) {
  if (v.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "vector for " + digest + " has dim " +
                                                   std::to_string(v.size()) + ", store dim " +
                                                   std::to_string(dim_));
  }
  vectors_[digest] = std::move(v);
}

PrecomputedStore PrecomputedStore::parse(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedRow, "missing store header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t dim = 0;
  std::string algo;
  {
    std::istringstream header(line);
    std::string a, b;
    header >> a >> b;
    if (a.rfind("dim=", 0) != 0 || b.rfind("digest=", 0) != 0) {
      throw Error(ErrorCode::kMalformedRow, "store header must be 'dim=<D> digest=<algo>'");
    }
    try {
      dim = std::stoul(a.substr(4));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedRow, "bad dim in store header");
    }
    algo = b.substr(7);
  }
  PrecomputedStore store(dim, algo);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": expected <digest>\\t<values>");
    }
    std::string digest = line.substr(0, tab);
    EmbeddingVector v;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      while (pos < rest.size() && rest[pos] == ' ') ++pos;
      if (pos >= rest.size()) break;
      std::size_t end = rest.find(' ', pos);
      if (end == std::string_view::npos) end = rest.size();
      double x;
      if (!parse_double(rest.substr(pos, end - pos), x) || !std::isfinite(x)) {
        throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": bad value");
      }
      v.push_back(x);
      pos = end;
    }
    store.insert(digest, std::move(v));
  }
  return store;
}

PrecomputedStore PrecomputedStore::load(const std::string& path) {
  PrecomputedStore store = parse(read_file(path));
  store.set_path_hint(path);
  return store;
}

std::string PrecomputedStore::serialize() const {
  std::string out = "dim=" + std::to_string(dim_) + " digest=" + digest_algo_ + "\n";
  for (const auto& [digest, v] : vectors_) {
    out += digest;
    out += '\t';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ' ';
      out += format_double(v[i]);
    }
    out += '\n';
  }
  return out;
}

std::string PrecomputedStore::id() const {
  return "precomputed/v1:dim=" + std::to_string(dim_) + ":digest=" + digest_algo_;
}

EmbeddingVector PrecomputedStore::embed(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
  const std::string digest = text_digest(text);
  auto it = vectors_.find(digest);
  if (it == vectors_.end()) throw Error(ErrorCode::kMissingVector, "no vector for digest " + digest);
  return it->second;
}

ordered_json PrecomputedStore::config_json() const {
  ordered_json j;
  j["kind"] = "precomputed";
  j["dim"] = dim_;
  j["digest"] = digest_algo_;
  j["store"] = path_hint_.empty() ? "vectors.tsv"
                                  : std::filesystem::path(path_hint_).filename().string();
  return j;
}

std::shared_ptr<const Embedder> make_embedder(const json& config, const std::string& base_dir) {
  const std::string kind = config.value("kind", "hashed_ngram");
  if (kind == "hashed_ngram") {
    return std::make_shared<HashedNgramEmbedder>(HashedNgramConfig::from_json(config));
  }
  if (kind == "precomputed") {
    const std::string store = config.value("store", "vectors.tsv");
    auto loaded = std::make_shared<PrecomputedStore>(
        PrecomputedStore::load((std::filesystem::path(base_dir) / store).string()));
    if (config.contains("dim") && config.at("dim").get<std::size_t>() != loaded->dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "store dim differs from embedder config");
    }
    return loaded;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown embedder kind '" + kind + "'");
}

}  // namespace opinionlens
