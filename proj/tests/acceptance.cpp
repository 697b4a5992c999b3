// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "opinionlens/corpus.hpp"
#include "opinionlens/eval.hpp"
#include "opinionlens/mlp.hpp"
#include "opinionlens/pipeline.hpp"
#include "opinionlens/service.hpp"
#include "opinionlens/util.hpp"
#include "test_support.hpp"

using namespace opinionlens;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += " (over time limit " + format_double(limit_s) + " s)";
  }
  failures += o.pass ? 0 : 1;
  std::printf("[%s] %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// ---- 1 ---------------------------------------------------------------------

Outcome gradient_check() {
  const double h = 1e-5;
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    auto model = MlpModel::init({8, 5, 4, 2}, 1000 + trial);
    Rng rng(mix_seed(77, trial));
    // Nonzero biases keep pre-activations off the ReLU kink at exactly 0.
    for (auto& layer : model.layers()) {
      for (double& b : layer.bias) b = rng.uniform(-0.1, 0.1);
    }
    std::vector<LabeledVector> batch;
    for (int i = 0; i < 4; ++i) {
      LabeledVector v;
      for (int d = 0; d < 8; ++d) v.x.push_back(rng.uniform(-1, 1));
      v.label = static_cast<int>(rng.below(2));
      batch.push_back(std::move(v));
    }
    const double l2 = 1e-3;
    const auto analytic = loss_and_grad(model, batch, l2);
    std::vector<double> flat;
    for (const auto& g : analytic.grad) {
      flat.insert(flat.end(), g.weights.data.begin(), g.weights.data.end());
      flat.insert(flat.end(), g.bias.begin(), g.bias.end());
    }
    for (std::size_t i = 0; i < model.parameter_count(); ++i) {
      auto plus = model, minus = model;
      plus.parameter(i) += h;
      minus.parameter(i) -= h;
      const double numeric = (loss(plus, batch, l2) - loss(minus, batch, l2)) / (2 * h);
      const double denom = std::max({std::abs(flat[i]), std::abs(numeric), 1e-7});
      worst = std::max(worst, std::abs(flat[i] - numeric) / denom);
    }
  }
  return {worst < 1e-4, "max relative error " + sci(worst) + " (< 1e-4)"};
}

// ---- 2 ---------------------------------------------------------------------

std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> r;
  for (double x : v) {
    double less = 0, equal = 0;
    for (double y : v) {
      less += y < x;
      equal += y == x;
    }
    r.push_back(less + (equal + 1) / 2);
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

bool constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

Outcome spearman_oracle() {
  Rng rng(2024);
  double worst_ties = 0.0;
  int cases = 0;
  while (cases < 200) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(static_cast<double>(rng.below(12)));
      y.push_back(static_cast<double>(rng.below(12)));
    }
    if (constant(x) || constant(y)) continue;
    worst_ties = std::max(worst_ties, std::abs(spearman_rho(x, y) - pearson(brute_ranks(x), brute_ranks(y))));
    ++cases;
  }
  double worst_exact = 0.0;
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 0.0);
    std::iota(y.begin(), y.end(), 0.0);
    rng.shuffle(x);
    rng.shuffle(y);
    double d2 = 0;
    for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    const double nn = static_cast<double>(n);
    const double closed = 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
    worst_exact = std::max(worst_exact, std::abs(spearman_rho(x, y) - closed));
  }
  return {worst_ties < 1e-9 && worst_exact < 1e-12,
          "tie max diff " + sci(worst_ties) + " (< 1e-9), no-tie max diff " + sci(worst_exact) +
              " (< 1e-12)"};
}

// ---- shared synthetic setup (3, 4, 5, 7, 8) ---------------------------------

struct Trained {
  SyntheticCorpora corpora;
  SplitResult polar, neutral;
  std::shared_ptr<HashedNgramEmbedder> embedder;
  std::vector<LabeledVector> det_train, pol_train;
  std::shared_ptr<const Pipeline> pipeline;
  double det_acc = 0, pol_acc = 0;
};

std::vector<LabeledVector> embed_labeled(const Embedder& e, const Corpus& c, const std::function<int(const Document&)>& label) {
  std::vector<LabeledVector> out;
  for (const auto& d : c) out.push_back({e.embed(normalize(d.text)), label(d)});
  return out;
}

Trained train_default() {
  Trained t;
  t.corpora = synthesize(SyntheticSpec::defaults());
  t.polar = split(t.corpora.polar, {0.8, 1});
  t.neutral = split(t.corpora.neutral, {0.8, 2});
  t.embedder = std::make_shared<HashedNgramEmbedder>();
  auto political = [](const Document&) { return kPoliticalClass; };
  auto neutral = [](const Document&) { return kNeutralClass; };
  auto side = [](const Document& d) { return d.label == Polarity::kRight ? kRightClass : kLeftClass; };

  t.det_train = embed_labeled(*t.embedder, t.polar.train, political);
  auto n_train = embed_labeled(*t.embedder, t.neutral.train, neutral);
  t.det_train.insert(t.det_train.end(), n_train.begin(), n_train.end());
  auto det_test = embed_labeled(*t.embedder, t.polar.test, political);
  auto n_test = embed_labeled(*t.embedder, t.neutral.test, neutral);
  det_test.insert(det_test.end(), n_test.begin(), n_test.end());
  t.pol_train = embed_labeled(*t.embedder, t.polar.train, side);
  const auto pol_test = embed_labeled(*t.embedder, t.polar.test, side);

  TrainConfig cfg;
  cfg.seed = 3;
  auto det = train(t.det_train, cfg).model;
  auto pol = train(t.pol_train, cfg).model;
  t.det_acc = accuracy(det, det_test);
  t.pol_acc = accuracy(pol, pol_test);
  det.metadata().embedder_id = t.embedder->id();
  pol.metadata().embedder_id = t.embedder->id();
  t.pipeline = std::make_shared<const Pipeline>(t.embedder, std::move(det), std::move(pol));
  return t;
}

// ---- 4 ---------------------------------------------------------------------

Outcome dilution_shape(const Trained& t) {
  DilutionSweepSpec spec;
  spec.neutral_pool = t.neutral.test;
  spec.seed = 11;
  const auto rows = dilution_sweep(*t.pipeline, t.polar.test, spec);
  std::vector<double> one, two;
  for (const auto& r : rows) (r.mode == Mode::kOneStep ? one : two).push_back(r.accuracy);
  bool non_increasing = true;
  for (std::size_t i = 1; i < one.size(); ++i) non_increasing &= one[i] <= one[i - 1] + 0.02;
  const double gap = two.back() - one.back();
  const double graceful = two.front() - two.back();
  std::string detail = "one_step";
  for (double a : one) detail += " " + fmt(a);
  detail += "; two_step";
  for (double a : two) detail += " " + fmt(a);
  detail += "; gap@0.75 " + fmt(gap) + " (>= 0.10), two_step drop " + fmt(graceful) + " (<= 0.05)";
  return {non_increasing && gap >= 0.10 && graceful <= 0.05, detail};
}

// ---- 5 ---------------------------------------------------------------------

Outcome article_direction(const Trained& t) {
  const Corpus articles = synthesize_articles(t.polar.test, t.neutral.test, ArticleSpec{});
  const auto r = compare_modes(*t.pipeline, articles);
  const double a1 = *r.one_step.accuracy, a2 = *r.two_step.accuracy;
  const double r1 = *r.one_step.spearman_rho, r2 = *r.two_step.spearman_rho;
  return {a2 > a1 && r2 > r1, "accuracy " + fmt(a2) + " > " + fmt(a1) + ", rho " + fmt(r2) + " > " + fmt(r1) +
                                  " over " + std::to_string(articles.size()) + " articles"};
}

// ---- 6 ---------------------------------------------------------------------

Outcome determinism(const Trained& t) {
  std::vector<LabeledVector> subset(t.pol_train.begin(), t.pol_train.begin() + 600);
  TrainConfig cfg;
  cfg.seed = 21;
  cfg.max_epochs = 10;
  const auto a = serialize(train(subset, cfg).model);
  const auto b = serialize(train(subset, cfg).model);
  const bool models_equal = a == b;

  const std::string dir = opinionlens::testing::temp_dir("acceptance-rt");
  save(t.pipeline->polarity(), dir + "/p.olmlp");
  const auto loaded = load(dir + "/p.olmlp");
  Rng rng(5);
  bool forward_equal = true;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(loaded.input_dim());
    for (auto& v : x) v = rng.normal();
    forward_equal &= loaded.forward(x) == t.pipeline->polarity().forward(x);
  }

  DilutionSweepSpec spec;
  spec.neutral_pool = t.neutral.test;
  spec.seed = 13;
  const Corpus docs(t.polar.test.begin(), t.polar.test.begin() + 200);
  const bool csv_equal =
      sweep_to_csv(dilution_sweep(*t.pipeline, docs, spec)) == sweep_to_csv(dilution_sweep(*t.pipeline, docs, spec));
  return {models_equal && forward_equal && csv_equal,
          std::string("model bytes ") + (models_equal ? "identical" : "differ") + ", forward after reload " +
              (forward_equal ? "identical" : "differs") + ", sweep CSV " + (csv_equal ? "identical" : "differs")};
}

// ---- 7 ---------------------------------------------------------------------

Outcome single_sentence_identity(const Trained& t) {
  const auto spec = SyntheticSpec::defaults();
  const std::vector<std::string>* lexicons[] = {&spec.lexicon_left, &spec.lexicon_right, &spec.lexicon_neutral};
  std::size_t kept = 0, mismatches = 0, generated = 0;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const std::string sentence = synthesize_sentence(spec, *lexicons[i % 3], mix_seed(700, i));
    ++generated;
    const auto two = t.pipeline->predict_two_step(sentence);
    if (two.sentences.size() != 1 || !two.sentences[0].kept) continue;
    ++kept;
    const auto one = t.pipeline->predict_one_step(sentence);
    if (one.score != two.score || one.label != two.label) ++mismatches;
  }
  return {mismatches == 0 && kept > 0, std::to_string(kept) + " of " + std::to_string(generated) +
                                           " kept, " + std::to_string(mismatches) + " mismatches"};
}

// ---- 8 ---------------------------------------------------------------------

Outcome service_equivalence(const Trained& t) {
  const std::string dir = opinionlens::testing::temp_dir("acceptance-svc");
  save_bundle(dir, *t.pipeline);
  const Bundle bundle = load_bundle(dir);
  Service service(ServiceOptions{.bundle_path = dir});
  Rng rng(88);
  std::size_t mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    std::string text;
    const auto n = 1 + rng.below(6);
    for (std::uint64_t k = 0; k < n; ++k) {
      const Corpus& src = rng.below(2) ? t.polar.test : t.neutral.test;
      text += (k ? " " : "") + src[rng.below(src.size())].text;
    }
    const Mode mode = rng.below(2) ? Mode::kTwoStep : Mode::kOneStep;
    const auto reply = service.handle_predict(json{{"text", text}, {"mode", to_string(mode)}}.dump());
    if (reply.status != 200) {
      ++mismatches;
      continue;
    }
    const auto j = json::parse(reply.body);
    const auto lib = bundle.pipeline->predict(text, mode);
    bool same = j.at("score").get<double>() == lib.score && j.at("label") == to_string(lib.label) &&
                j.at("kept_fraction").get<double>() == lib.kept_fraction &&
                j.at("sentences").size() == lib.sentences.size();
    for (std::size_t s = 0; same && s < lib.sentences.size(); ++s) {
      same = j.at("sentences")[s].at("p_neutral").get<double>() == lib.sentences[s].p_neutral;
    }
    mismatches += same ? 0 : 1;
  }
  return {mismatches == 0, "100 requests, " + std::to_string(mismatches) + " mismatches"};
}

}  // namespace

int main() {
  report(1, "gradient correctness", 10, gradient_check);
  report(2, "spearman oracle equivalence", 5, spearman_oracle);

  Trained trained;
  report(3, "synthetic training magnitudes", 300, [&] {
    trained = train_default();
    return Outcome{trained.det_acc >= 0.95 && trained.pol_acc >= 0.80,
                   "detector " + fmt(trained.det_acc) + " (>= 0.95), polarity " + fmt(trained.pol_acc) + " (>= 0.80)"};
  });
  if (!trained.pipeline) {
    for (int id : {4, 5, 6, 7, 8}) {
      std::printf("[FAIL] %d skipped: no trained pipeline\n", id);
      ++failures;
    }
    return 1;
  }
  report(4, "dilution degradation", 600, [&] { return dilution_shape(trained); });
  report(5, "article ordering", 0, [&] { return article_direction(trained); });
  report(6, "determinism and round trips", 0, [&] { return determinism(trained); });
  report(7, "single-sentence identity", 0, [&] { return single_sentence_identity(trained); });
  report(8, "service/library equivalence", 0, [&] { return service_equivalence(trained); });

  std::printf("%s: %d failing\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
