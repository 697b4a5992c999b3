#include "opinionlens/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "opinionlens/error.hpp"
#include "opinionlens/util.hpp"

namespace opinionlens {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool matches(VerdictLabel predicted, Polarity gold) {
  return (predicted == VerdictLabel::kLeft && gold == Polarity::kLeft) ||
         (predicted == VerdictLabel::kRight && gold == Polarity::kRight);
}

}  // namespace

double accuracy(std::span<const VerdictLabel> predictions, std::span<const Polarity> gold) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorCode::kLengthMismatch, "predictions and gold differ in length");
  }
  if (predictions.empty()) throw Error(ErrorCode::kEmpty, "accuracy of an empty list");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += matches(predictions[i], gold[i]) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 share ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "spearman inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCode::kEmpty, "spearman needs at least 2 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;  // mean of any average-rank vector
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kDegenerateRanks, "constant input has no ranking");
  const double rho = sxy / std::sqrt(sxx * syy);
  return std::clamp(rho, -1.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

ordered_json mode_json(const ModeMetrics& m) {
  ordered_json j;
  j["accuracy"] = m.accuracy ? ordered_json(*m.accuracy) : ordered_json(nullptr);
  j["n_labeled"] = m.n_labeled;
  j["spearman_rho"] = m.spearman_rho ? ordered_json(*m.spearman_rho) : ordered_json(nullptr);
  j["n_crowd"] = m.n_crowd;
  j["kept_fraction_mean"] = m.kept_fraction_mean;
  return j;
}

std::optional<double> rho_if_defined(const std::vector<double>& scores, const std::vector<double>& crowd) {
  if (scores.size() < 2) return std::nullopt;
  try {
    return spearman_rho(scores, crowd);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegenerateRanks) return std::nullopt;
    throw;
  }
}

}  // namespace

ordered_json MetricReport::to_json() const {
  ordered_json j;
  j["n"] = n;
  j["one_step"] = mode_json(one_step);
  j["two_step"] = mode_json(two_step);
  ordered_json docs = ordered_json::array();
  for (const auto& d : documents) {
    docs.push_back({{"id", d.id}, {"one_step", d.one_step}, {"two_step", d.two_step}});
  }
  j["documents"] = std::move(docs);
  return j;
}

MetricReport compare_modes(const Pipeline& pipeline, const Corpus& test,
                           const std::map<std::string, double>* crowd) {
  MetricReport report;
  report.n = test.size();
  std::vector<VerdictLabel> pred_one, pred_two;
  std::vector<Polarity> gold;
  std::vector<double> crowd_values, crowd_one, crowd_two;
  double kept_one = 0.0, kept_two = 0.0;

  for (const auto& doc : test) {
    const PolarityVerdict one = pipeline.predict_one_step(doc.text);
    const PolarityVerdict two = pipeline.predict_two_step(doc.text);
    report.documents.push_back({doc.id, one.score, two.score});
    kept_one += one.kept_fraction;
    kept_two += two.kept_fraction;
    if (doc.label && *doc.label != Polarity::kNeutral) {
      gold.push_back(*doc.label);
      pred_one.push_back(one.label);
      pred_two.push_back(two.label);
    }
    std::optional<double> c;
    if (crowd) {
      if (auto it = crowd->find(doc.id); it != crowd->end()) c = it->second;
    } else {
      c = doc.crowd_score;
    }
    if (c) {
      crowd_values.push_back(*c);
      crowd_one.push_back(one.score);
      crowd_two.push_back(two.score);
    }
  }
  if (gold.empty() && crowd_values.empty()) {
    throw Error(ErrorCode::kEmpty, "evaluation corpus has no labeled or crowd-scored documents");
  }
  if (!gold.empty()) {
    report.one_step.accuracy = accuracy(pred_one, gold);
    report.two_step.accuracy = accuracy(pred_two, gold);
  }
  report.one_step.n_labeled = report.two_step.n_labeled = gold.size();
  report.one_step.n_crowd = report.two_step.n_crowd = crowd_values.size();
  report.one_step.spearman_rho = rho_if_defined(crowd_one, crowd_values);
  report.two_step.spearman_rho = rho_if_defined(crowd_two, crowd_values);
  if (!test.empty()) {
    report.one_step.kept_fraction_mean = kept_one / static_cast<double>(test.size());
    report.two_step.kept_fraction_mean = kept_two / static_cast<double>(test.size());
  }
  return report;
}

std::map<std::string, double> load_crowd_scores(const std::string& path) {
  const std::string content = read_file(path);
  std::map<std::string, double> out;
  const json j = json::parse(content, nullptr, false);
  if (!j.is_discarded() && j.is_object()) {
    for (const auto& [id, v] : j.items()) {
      if (!v.is_number()) throw Error(ErrorCode::kMalformedRecord, "crowd score for " + id + " is not a number");
      out[id] = v.get<double>();
    }
  } else {
    const auto rows = parse_csv(content);
    if (rows.empty()) throw Error(ErrorCode::kMalformedRecord, "crowd CSV needs a header row");
    const auto& header = rows.front().fields;
    const auto id_col = std::find(header.begin(), header.end(), "id") - header.begin();
    const auto score_col = std::find(header.begin(), header.end(), "crowd_score") - header.begin();
    if (id_col == static_cast<std::ptrdiff_t>(header.size()) ||
        score_col == static_cast<std::ptrdiff_t>(header.size())) {
      throw Error(ErrorCode::kMalformedRecord, "crowd CSV needs id and crowd_score columns");
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& f = rows[r].fields;
      double v;
      if (f.size() != header.size() || !parse_double(trim(f[static_cast<std::size_t>(score_col)]), v)) {
        throw Error(ErrorCode::kMalformedRecord, "bad crowd row at line " + std::to_string(rows[r].line_no));
      }
      out[f[static_cast<std::size_t>(id_col)]] = v;
    }
  }
  for (const auto& [id, v] : out) {
    if (!(v >= -1.0 && v <= 1.0)) throw Error(ErrorCode::kMalformedRecord, "crowd score for " + id + " outside [-1, 1]");
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<Placement> parse_placement(std::string_view s) {
  if (s == "interleave") return Placement::kInterleave;
  if (s == "append") return Placement::kAppend;
  return std::nullopt;
}

std::string_view to_string(Placement p) { return p == Placement::kInterleave ? "interleave" : "append"; }

void DilutionSweepSpec::validate() const {
  if (ratios.empty()) throw Error(ErrorCode::kInvalidSpec, "at least one ratio required");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] >= 0.0 && ratios[i] < 1.0)) throw Error(ErrorCode::kInvalidSpec, "ratios must lie in [0, 1)");
    if (i && ratios[i] < ratios[i - 1]) throw Error(ErrorCode::kInvalidSpec, "ratios must be sorted ascending");
  }
  const bool needs_pool = std::any_of(ratios.begin(), ratios.end(), [](double r) { return r > 0.0; });
  if (needs_pool && neutral_pool.empty()) {
    throw Error(ErrorCode::kPoolExhausted, "neutral pool is empty");
  }
}

std::vector<std::string> pool_sentences(const Corpus& pool, const PipelineConfig& segmentation) {
  std::vector<std::string> out;
  for (const auto& doc : pool) {
    for (auto& span : segment(normalize(doc.text, segmentation.normalization), segmentation.abbreviations)) {
      out.push_back(std::move(span.text));
    }
  }
  return out;
}

std::string dilute(std::string_view text, double ratio, const std::vector<std::string>& pool,
                   Placement placement, std::uint64_t seed, const PipelineConfig& segmentation) {
  if (ratio <= 0.0) return std::string(text);
  auto spans = segment(normalize(text, segmentation.normalization), segmentation.abbreviations);
  const double k = static_cast<double>(spans.size());
  const auto m = static_cast<std::size_t>(std::llround(ratio * k / (1.0 - ratio)));
  if (m == 0) return std::string(text);
  if (pool.empty()) throw Error(ErrorCode::kPoolExhausted, "neutral pool is empty");

  std::vector<std::string> sentences;
  for (auto& s : spans) sentences.push_back(std::move(s.text));
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::string filler = pool[rng.below(pool.size())];
    if (placement == Placement::kAppend) {
      sentences.push_back(std::move(filler));
    } else {
      const auto pos = static_cast<std::ptrdiff_t>(rng.below(sentences.size() + 1));
      sentences.insert(sentences.begin() + pos, std::move(filler));
    }
  }
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i) out += ' ';
    out += sentences[i];
  }
  return out;
}

std::vector<SweepRow> dilution_sweep(const Pipeline& pipeline, const Corpus& political_test,
                                     const DilutionSweepSpec& spec) {
  spec.validate();
  if (political_test.empty()) throw Error(ErrorCode::kEmpty, "empty political test corpus");
  std::vector<Polarity> gold;
  for (const auto& doc : political_test) {
    if (!doc.label || *doc.label == Polarity::kNeutral) {
      throw Error(ErrorCode::kBadLabel, "document " + doc.id + " lacks a left/right label");
    }
    gold.push_back(*doc.label);
  }
  const auto pool = pool_sentences(spec.neutral_pool, pipeline.config());

  std::vector<SweepRow> rows;
  for (std::size_t r = 0; r < spec.ratios.size(); ++r) {
    const double ratio = spec.ratios[r];
    std::vector<VerdictLabel> pred_one, pred_two;
    double kept_one = 0.0, kept_two = 0.0;
    for (std::size_t d = 0; d < political_test.size(); ++d) {
      const std::string text = dilute(political_test[d].text, ratio, pool, spec.placement,
                                      mix_seed(spec.seed, r, d), pipeline.config());
      const auto one = pipeline.predict_one_step(text);
      const auto two = pipeline.predict_two_step(text);
      pred_one.push_back(one.label);
      pred_two.push_back(two.label);
      kept_one += one.kept_fraction;
      kept_two += two.kept_fraction;
    }
    const double n = static_cast<double>(political_test.size());
    rows.push_back({ratio, Mode::kOneStep, political_test.size(), accuracy(pred_one, gold), kept_one / n, spec.seed});
    rows.push_back({ratio, Mode::kTwoStep, political_test.size(), accuracy(pred_two, gold), kept_two / n, spec.seed});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.ratio != b.ratio) return a.ratio < b.ratio;
    return static_cast<int>(a.mode) < static_cast<int>(b.mode);
  });
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "ratio,mode,n,accuracy,kept_fraction_mean,seed\n";
  for (const auto& row : rows) {
    out += format_double(row.ratio);
    out += ',';
    out += to_string(row.mode);
    out += ',';
    out += std::to_string(row.n);
    out += ',';
    out += format_double(row.accuracy);
    out += ',';
    out += format_double(row.kept_fraction_mean);
    out += ',';
    out += std::to_string(row.seed);
    out += '\n';
  }
  return out;
}

}  // namespace opinionlens
