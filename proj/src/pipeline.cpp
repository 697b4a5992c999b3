#include "opinionlens/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "opinionlens/error.hpp"
#include "opinionlens/util.hpp"

namespace opinionlens {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(Mode m) { return m == Mode::kOneStep ? "one_step" : "two_step"; }

std::string_view to_string(VerdictLabel l) {
  switch (l) {
    case VerdictLabel::kLeft: return "left";
    case VerdictLabel::kRight: return "right";
    case VerdictLabel::kAbstain: return "abstain";
  }
  return "?";
}

std::string_view to_string(Fusion f) { return f == Fusion::kReembed ? "reembed" : "mean_pool"; }

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "one_step") return Mode::kOneStep;
  if (s == "two_step") return Mode::kTwoStep;
  return std::nullopt;
}

std::optional<Fusion> parse_fusion(std::string_view s) {
  if (s == "reembed") return Fusion::kReembed;
  if (s == "mean_pool") return Fusion::kMeanPool;
  return std::nullopt;
}

VerdictLabel label_for_score(double score) {
  if (score < 0.0) return VerdictLabel::kLeft;
  if (score > 0.0) return VerdictLabel::kRight;
  return VerdictLabel::kAbstain;
}

ordered_json to_json(const PolarityVerdict& v) {
  ordered_json j;
  j["score"] = v.score;
  j["label"] = to_string(v.label);
  j["mode"] = to_string(v.mode);
  j["kept_fraction"] = v.kept_fraction;
  j["fell_back"] = v.fell_back;
  ordered_json sentences = ordered_json::array();
  for (std::size_t i = 0; i < v.sentences.size(); ++i) {
    const auto& s = v.sentences[i];
    ordered_json e;
    e["index"] = i;
    e["text"] = s.span.text;
    e["start"] = s.span.start;
    e["end"] = s.span.end;
    e["is_neutral"] = s.is_neutral;
    e["p_neutral"] = s.p_neutral;
    e["kept"] = s.kept;
    e["overridden"] = s.overridden;
    e["sentence_score"] = s.sentence_score ? ordered_json(*s.sentence_score) : ordered_json(nullptr);
    sentences.push_back(std::move(e));
  }
  j["sentences"] = std::move(sentences);
  return j;
}

FilterResult filter_neutral(const std::vector<SentenceSpan>& spans, std::span<const double> p_neutral,
                            double tau) {
  if (p_neutral.size() != spans.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one p_neutral per span required");
  }
  FilterResult out;
  out.p_neutral.assign(p_neutral.begin(), p_neutral.end());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    (p_neutral[i] >= tau ? out.dropped : out.kept).push_back(spans[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_head(const MlpModel& model, const Embedder& embedder, const char* name) {
  if (model.num_classes() != 2) {
    throw Error(ErrorCode::kBadDims, std::string(name) + " head must have 2 classes");
  }
  if (model.input_dim() != embedder.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + " input dim " + std::to_string(model.input_dim()) +
                    " != embedder dim " + std::to_string(embedder.dim()));
  }
  if (model.metadata().embedder_id != embedder.id()) {
    throw Error(ErrorCode::kEmbedderMismatch, std::string(name) + " was trained with embedder '" +
                                                  model.metadata().embedder_id + "', pipeline uses '" +
                                                  embedder.id() + "'");
  }
}

}  // namespace

Pipeline::Pipeline(std::shared_ptr<const Embedder> embedder, MlpModel detector, MlpModel polarity,
                   PipelineConfig config)
    : embedder_(std::move(embedder)),
      detector_(std::move(detector)),
      polarity_(std::move(polarity)),
      config_(std::move(config)) {
  if (!embedder_) throw Error(ErrorCode::kInvalidSpec, "pipeline needs an embedder");
  if (!(config_.tau > 0.0 && config_.tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "tau must be in (0, 1]");
  }
  check_head(detector_, *embedder_, "detector");
  check_head(polarity_, *embedder_, "polarity");
}

double Pipeline::score_vector(const EmbeddingVector& v) const {
  const auto p = polarity_.forward(v);
  return p[kRightClass] - p[kLeftClass];
}

double Pipeline::polarity_score(std::string_view text) const {
  return score_vector(embedder_->embed(text));
}

double Pipeline::p_neutral(std::string_view sentence) const {
  return detector_.forward(embedder_->embed(sentence))[kNeutralClass];
}

FilterResult Pipeline::filter_neutral(const std::vector<SentenceSpan>& spans) const {
  std::vector<double> p(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) p[i] = p_neutral(spans[i].text);
  return opinionlens::filter_neutral(spans, p, config_.tau);
}

Pipeline::Prepared Pipeline::prepare(std::string_view text) const {
  Prepared prep;
  prep.normalized = normalize(text, config_.normalization);
  if (trim(prep.normalized).empty()) throw Error(ErrorCode::kEmptyText, "document text is empty");
  prep.spans = segment(prep.normalized, config_.abbreviations);
  prep.sentence_vectors.reserve(prep.spans.size());
  prep.p_neutral.reserve(prep.spans.size());
  for (const auto& span : prep.spans) {
    prep.sentence_vectors.push_back(embedder_->embed(span.text));
    prep.p_neutral.push_back(detector_.forward(prep.sentence_vectors.back())[kNeutralClass]);
  }
  return prep;
}

PolarityVerdict Pipeline::predict_one_step(std::string_view text) const {
  const Prepared prep = prepare(text);
  PolarityVerdict v;
  v.mode = Mode::kOneStep;
  v.score = polarity_score(prep.normalized);
  v.label = label_for_score(v.score);
  v.kept_fraction = 1.0;
  for (std::size_t i = 0; i < prep.spans.size(); ++i) {
    SentenceTrace t;
    t.span = prep.spans[i];
    t.p_neutral = prep.p_neutral[i];
    t.is_neutral = t.p_neutral >= config_.tau;
    t.kept = true;
    t.sentence_score = score_vector(prep.sentence_vectors[i]);
    v.sentences.push_back(std::move(t));
  }
  return v;
}

PolarityVerdict Pipeline::score_kept(const Prepared& prep, std::vector<bool> keep,
                                     const std::vector<bool>& overridden, Mode mode) const {
  PolarityVerdict v;
  v.mode = mode;
  std::vector<SentenceSpan> kept_spans;
  std::vector<const EmbeddingVector*> kept_vectors;
  for (std::size_t i = 0; i < prep.spans.size(); ++i) {
    SentenceTrace t;
    t.span = prep.spans[i];
    t.p_neutral = prep.p_neutral[i];
    t.kept = keep[i];
    t.is_neutral = !keep[i];
    t.overridden = overridden[i];
    if (keep[i]) {
      t.sentence_score = score_vector(prep.sentence_vectors[i]);
      kept_spans.push_back(prep.spans[i]);
      kept_vectors.push_back(&prep.sentence_vectors[i]);
    }
    v.sentences.push_back(std::move(t));
  }
  const std::size_t total = prep.spans.size();
  v.kept_fraction = total == 0 ? 0.0 : static_cast<double>(kept_spans.size()) / static_cast<double>(total);

  if (kept_spans.empty()) {
    if (config_.fallback_one_step) {
      v.score = polarity_score(prep.normalized);
      v.label = label_for_score(v.score);
      v.fell_back = true;
    } else {
      v.score = 0.0;
      v.label = VerdictLabel::kAbstain;
    }
    return v;
  }

  if (config_.fusion == Fusion::kReembed) {
    v.score = polarity_score(fuse(kept_spans));
  } else {
    EmbeddingVector pooled(embedder_->dim(), 0.0);
    for (const auto* vec : kept_vectors) {
      for (std::size_t k = 0; k < pooled.size(); ++k) pooled[k] += (*vec)[k];
    }
    const double norm = l2_norm(pooled);
    if (norm > 0.0) {
      for (double& x : pooled) x /= norm;
    }
    v.score = score_vector(pooled);
  }
  v.label = label_for_score(v.score);
  return v;
}

PolarityVerdict Pipeline::predict_two_step(std::string_view text) const {
  const Prepared prep = prepare(text);
  std::vector<bool> keep(prep.spans.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = prep.p_neutral[i] < config_.tau;
  return score_kept(prep, std::move(keep), std::vector<bool>(prep.spans.size(), false), Mode::kTwoStep);
}

PolarityVerdict Pipeline::predict(std::string_view text, Mode mode) const {
  return mode == Mode::kOneStep ? predict_one_step(text) : predict_two_step(text);
}

PolarityVerdict Pipeline::explain(std::string_view text, Mode mode,
                                  std::span<const SentenceOverride> overrides) const {
  if (overrides.empty()) return predict(text, mode);
  const Prepared prep = prepare(text);
  std::vector<bool> keep(prep.spans.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = prep.p_neutral[i] < config_.tau;
  std::vector<bool> overridden(prep.spans.size(), false);
  for (const auto& o : overrides) {
    if (o.index >= prep.spans.size()) {
      throw Error(ErrorCode::kBadOverrideIndex, "override index " + std::to_string(o.index) +
                                                    " out of range for " +
                                                    std::to_string(prep.spans.size()) + " sentences");
    }
    if (overridden[o.index]) {
      throw Error(ErrorCode::kBadOverrideIndex, "override index " + std::to_string(o.index) + " repeated");
    }
    overridden[o.index] = true;
    keep[o.index] = o.keep;
  }
  return score_kept(prep, std::move(keep), overridden, Mode::kTwoStep);
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kBundleFormat = "opinionlens-bundle/v1";

ordered_json part(const fs::path& dir, const std::string& name) {
  return {{"path", name}, {"sha256", sha256_hex(read_file((dir / name).string()))}};
}

}  // namespace

std::string save_bundle(const std::string& dir, const Pipeline& pipeline) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create bundle directory " + dir);

  const Embedder& embedder = pipeline.embedder();
  ordered_json embedder_cfg = embedder.config_json();
  ordered_json manifest;
  manifest["format"] = kBundleFormat;
  if (const auto* store = dynamic_cast<const PrecomputedStore*>(&embedder)) {
    embedder_cfg["store"] = "vectors.tsv";
    write_file((root / "vectors.tsv").string(), store->serialize());
  }
  write_file((root / "embedder.json").string(), embedder_cfg.dump(2) + "\n");
  save(pipeline.detector(), (root / "detector.olmlp").string());
  save(pipeline.polarity(), (root / "polarity.olmlp").string());

  write_file((root / "abbreviations.txt").string(), pipeline.config().abbreviations.serialize());

  ordered_json parts;
  parts["embedder"] = part(root, "embedder.json");
  parts["detector"] = part(root, "detector.olmlp");
  parts["polarity"] = part(root, "polarity.olmlp");
  parts["abbreviations"] = part(root, "abbreviations.txt");
  if (fs::exists(root / "vectors.tsv") && embedder_cfg.value("kind", "") == "precomputed") {
    parts["vectors"] = part(root, "vectors.tsv");
  }
  manifest["parts"] = std::move(parts);
  const auto& cfg = pipeline.config();
  manifest["tau"] = cfg.tau;
  manifest["fusion"] = to_string(cfg.fusion);
  manifest["fallback_one_step"] = cfg.fallback_one_step;
  manifest["normalization"] = {{"replace_urls", cfg.normalization.replace_urls},
                               {"replace_mentions", cfg.normalization.replace_mentions},
                               {"strip_hashtag_mark", cfg.normalization.strip_hashtag_mark},
                               {"collapse_whitespace", cfg.normalization.collapse_whitespace},
                               {"lowercase", cfg.normalization.lowercase}};
  const std::string manifest_text = manifest.dump(2) + "\n";
  write_file((root / "manifest.json").string(), manifest_text);
  return sha256_hex(manifest_text);
}

Bundle load_bundle(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw Error(ErrorCode::kIoError, "bundle directory not found: " + dir);
  const std::string manifest_text = read_file((root / "manifest.json").string());
  const json manifest = json::parse(manifest_text, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw Error(ErrorCode::kFormatError, "bundle manifest is not valid JSON");
  }
  if (manifest.value("format", "") != kBundleFormat) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported bundle format");
  }
  try {
    for (const auto& [name, info] : manifest.at("parts").items()) {
      const std::string file = info.at("path").get<std::string>();
      if (sha256_hex(read_file((root / file).string())) != info.at("sha256").get<std::string>()) {
        throw Error(ErrorCode::kChecksumMismatch, "bundle part " + file + " does not match manifest hash");
      }
    }
    const auto& parts = manifest.at("parts");
    const json embedder_cfg =
        json::parse(read_file((root / parts.at("embedder").at("path").get<std::string>()).string()));
    auto embedder = make_embedder(embedder_cfg, root.string());

    PipelineConfig cfg;
    cfg.tau = manifest.at("tau").get<double>();
    auto fusion = parse_fusion(manifest.at("fusion").get<std::string>());
    if (!fusion) throw Error(ErrorCode::kFormatError, "bad fusion in manifest");
    cfg.fusion = *fusion;
    cfg.fallback_one_step = manifest.at("fallback_one_step").get<bool>();
    const auto& norm = manifest.at("normalization");
    cfg.normalization.replace_urls = norm.at("replace_urls").get<bool>();
    cfg.normalization.replace_mentions = norm.at("replace_mentions").get<bool>();
    cfg.normalization.strip_hashtag_mark = norm.at("strip_hashtag_mark").get<bool>();
    cfg.normalization.collapse_whitespace = norm.at("collapse_whitespace").get<bool>();
    cfg.normalization.lowercase = norm.at("lowercase").get<bool>();
    if (parts.contains("abbreviations")) {
      cfg.abbreviations = AbbreviationList::load(
          (root / parts.at("abbreviations").at("path").get<std::string>()).string());
    }

    Bundle bundle;
    bundle.pipeline = std::make_shared<const Pipeline>(
        std::move(embedder), load((root / parts.at("detector").at("path").get<std::string>()).string()),
        load((root / parts.at("polarity").at("path").get<std::string>()).string()), std::move(cfg));
    bundle.model_version = sha256_hex(manifest_text);
    bundle.path = dir;
    return bundle;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bundle manifest: ") + e.what());
  }
}

}  // namespace opinionlens
