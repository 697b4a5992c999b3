// opinionlens: corpus → training → bundle → evaluation → experiments → serving.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 training degeneracy, 5 I/O.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "opinionlens/corpus.hpp"
#include "opinionlens/embedder.hpp"
#include "opinionlens/error.hpp"
#include "opinionlens/eval.hpp"
#include "opinionlens/mlp.hpp"
#include "opinionlens/pipeline.hpp"
#include "opinionlens/service.hpp"
#include "opinionlens/util.hpp"

using namespace opinionlens;
using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDegenerate = 4;
constexpr int kExitIo = 5;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kDegenerateLabels: return kExitDegenerate;
    case ErrorCode::kIoError: return kExitIo;
    default: return kExitData;
  }
}

// Options that name files read by a subcommand; hashed into the run manifest.
const std::set<std::string> kInputOptions = {"political", "neutral", "corpus", "author-map", "spec",
                                             "embedder-config", "detector", "polarity", "pool",
                                             "crowd", "in", "abbreviations", "polar"};
const std::set<std::string> kOutputOptions = {"out", "out-polar", "out-neutral", "out-author-map",
                                              "report"};

// Expands a JSON config ({"key": value} or a run manifest with a "config"
// object) into argv entries for every key not already given on the command
// line, so explicit flags win.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  json cfg = json::parse(read_file(config_path), nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) {
    throw Error(ErrorCode::kInvalidSpec, "config file is not a JSON object: " + config_path);
  }
  if (cfg.contains("config") && cfg["config"].is_object()) cfg = cfg["config"];

  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  std::vector<std::string> out = args;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || given(key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + key);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      out.push_back("--" + key);
      out.push_back(joined);
    } else if (value.is_string()) {
      if (value.get<std::string>().empty()) continue;
      out.push_back("--" + key);
      out.push_back(value.get<std::string>());
    } else if (!value.is_null()) {
      out.push_back("--" + key);
      out.push_back(value.dump());
    }
  }
  return out;
}

// Resolved options of a subcommand (defaults materialized) plus input/output
// hashes. Written next to every artifact a run produces.
ordered_json run_manifest(const CLI::App& sub) {
  ordered_json config = ordered_json::object();
  ordered_json seeds = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->get_type_size() == 0) {
      config[name] = opt->count() > 0;
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
    } else {
      value = opt->get_default_str();
    }
    config[name] = value;
    if (name.find("seed") != std::string::npos) seeds[name] = value;
    if (kInputOptions.count(name) && !value.empty() && value != "-" && fs::is_regular_file(value)) {
      inputs[value] = sha256_hex(read_file(value));
    }
  }
  ordered_json m;
  m["tool"] = "opinionlens";
  m["version"] = OPINIONLENS_VERSION;
  m["subcommand"] = sub.get_name();
  m["config"] = std::move(config);
  m["seeds"] = std::move(seeds);
  m["inputs"] = std::move(inputs);
  return m;
}

void write_manifest(const CLI::App& sub, const std::string& path,
                    const std::vector<std::string>& outputs) {
  ordered_json m = run_manifest(sub);
  ordered_json out = ordered_json::object();
  for (const auto& o : outputs) {
    if (fs::is_regular_file(o)) out[o] = sha256_hex(read_file(o));
    if (fs::is_directory(o) && fs::is_regular_file(fs::path(o) / "manifest.json")) {
      out[o] = sha256_hex(read_file((fs::path(o) / "manifest.json").string()));
    }
  }
  m["outputs"] = std::move(out);
  write_file(path, m.dump(2) + "\n");
}

std::vector<double> parse_ratio_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_double(trim(item), v)) throw Error(ErrorCode::kInvalidSpec, "bad ratio '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::shared_ptr<const Embedder> embedder_from(const std::string& config_path) {
  if (config_path.empty()) return std::make_shared<HashedNgramEmbedder>();
  const json cfg = json::parse(read_file(config_path), nullptr, false);
  if (cfg.is_discarded()) throw Error(ErrorCode::kInvalidSpec, "embedder config is not JSON");
  return make_embedder(cfg, fs::path(config_path).parent_path().string());
}

struct TrainFlags {
  TrainConfig config;
  std::string optimizer = "adam";
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::string embedder_config;
  std::string created_at;
  std::string report;

  void add_to(CLI::App* sub) {
    sub->add_option("--lr", config.learning_rate, "Learning rate");
    sub->add_option("--batch-size", config.batch_size, "Minibatch size");
    sub->add_option("--max-epochs", config.max_epochs, "Maximum epochs");
    sub->add_option("--optimizer", optimizer, "adam or sgd")->check(CLI::IsMember({"adam", "sgd"}));
    sub->add_option("--patience", config.early_stop_patience, "Early-stopping patience (epochs)");
    sub->add_option("--val-fraction", config.val_fraction, "Validation share of the training split");
    sub->add_option("--seed", config.seed, "Training seed");
    sub->add_option("--l2", config.l2_penalty, "L2 penalty on weights");
    sub->add_option("--hidden1", config.hidden1, "First hidden layer width");
    sub->add_option("--hidden2", config.hidden2, "Second hidden layer width");
    sub->add_option("--test-fraction", test_fraction, "Held-out share for the reported accuracy");
    sub->add_option("--split-seed", split_seed, "Seed of the train/test split");
    sub->add_option("--embedder-config", embedder_config, "Embedder JSON (default: hashed n-grams, dim 512)");
    sub->add_option("--created-at", created_at, "Timestamp stamped into model metadata");
    sub->add_option("--report", report, "Also write the report JSON here");
  }

  TrainConfig resolved() const {
    TrainConfig c = config;
    c.optimizer = optimizer == "sgd" ? Optimizer::kSgd : Optimizer::kAdam;
    return c;
  }
};

std::vector<LabeledVector> embed_all(const Embedder& embedder, const Corpus& corpus, int label) {
  std::vector<LabeledVector> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus) out.push_back({embedder.embed(normalize(doc.text)), label});
  return out;
}

// Trains a head, writes model + report + manifest, prints the report.
int finish_training(const CLI::App& sub, const TrainFlags& flags, const Embedder& embedder,
                    std::vector<LabeledVector> train_set, const std::vector<LabeledVector>& test_set,
                    std::vector<std::string> class_names, const std::string& task, const std::string& out) {
  TrainResult result = train(train_set, flags.resolved());
  auto& meta = result.model.metadata();
  meta.embedder_id = embedder.id();
  meta.class_names = std::move(class_names);
  meta.created_at = flags.created_at;
  save(result.model, out);

  ordered_json report;
  report["task"] = task;
  report["model"] = out;
  report["embedder_id"] = embedder.id();
  report["n_train"] = train_set.size();
  report["n_test"] = test_set.size();
  report["heldout_accuracy"] = accuracy(result.model, test_set);
  report["train_report"] = result.report.to_json();
  const std::string text = report.dump(2) + "\n";
  std::vector<std::string> outputs{out};
  if (!flags.report.empty()) {
    write_file(flags.report, text);
    outputs.push_back(flags.report);
  }
  write_manifest(sub, out + ".manifest.json", outputs);
  std::cout << text;
  std::cerr << task << ": held-out accuracy " << report["heldout_accuracy"].get<double>() << "\n";
  return kExitOk;
}

std::string read_input(const std::string& in, const std::string& text) {
  if (!text.empty()) return text;
  if (in.empty() || in == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  return read_file(in);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }

  CLI::App app{"opinionlens: two-step political polarity classification for long documents"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string config_file;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON config or run manifest; explicit flags win");
  };

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic polar and neutral corpora");
  std::string synth_spec, out_polar, out_neutral, out_author_map;
  std::uint64_t synth_seed = 42;
  std::size_t synth_per_class = 0, synth_neutral = 0;
  synth_cmd->add_option("--spec", synth_spec, "SyntheticSpec JSON (defaults when omitted)");
  synth_cmd->add_option("--seed", synth_seed, "Generator seed (overrides the spec)");
  synth_cmd->add_option("--n-polar-per-class", synth_per_class, "Override n_polar_per_class (0 keeps spec)");
  synth_cmd->add_option("--n-neutral", synth_neutral, "Override n_neutral (0 keeps spec)");
  synth_cmd->add_option("--out-polar", out_polar, "Polar corpus JSONL")->required();
  synth_cmd->add_option("--out-neutral", out_neutral, "Neutral corpus JSONL")->required();
  synth_cmd->add_option("--out-author-map", out_author_map, "Author map JSON");
  add_config(synth_cmd);

  // synth-articles
  auto* articles_cmd = app.add_subcommand("synth-articles", "Build long diluted articles with crowd scores");
  std::string art_polar, art_neutral, art_out;
  ArticleSpec article_spec;
  articles_cmd->add_option("--polar", art_polar, "Polar sentence corpus")->required();
  articles_cmd->add_option("--neutral", art_neutral, "Neutral sentence corpus")->required();
  articles_cmd->add_option("--n", article_spec.n_articles, "Number of articles");
  articles_cmd->add_option("--noise", article_spec.crowd_noise_sd, "Crowd score noise (sd)");
  articles_cmd->add_option("--seed", article_spec.seed, "Seed");
  articles_cmd->add_option("--out", art_out, "Output JSONL")->required();
  add_config(articles_cmd);

  // train-neutral
  auto* tn_cmd = app.add_subcommand("train-neutral", "Train the neutral-sentence detector");
  std::string tn_political, tn_neutral, tn_out;
  TrainFlags tn_flags;
  tn_cmd->add_option("--political", tn_political, "Political corpus")->required();
  tn_cmd->add_option("--neutral", tn_neutral, "Neutral corpus")->required();
  tn_cmd->add_option("--out", tn_out, "Model file")->required();
  tn_flags.add_to(tn_cmd);
  add_config(tn_cmd);

  // train-polarity
  auto* tp_cmd = app.add_subcommand("train-polarity", "Train the left/right polarity classifier");
  std::string tp_corpus, tp_author_map, tp_out;
  TrainFlags tp_flags;
  tp_cmd->add_option("--corpus", tp_corpus, "Political corpus")->required();
  tp_cmd->add_option("--author-map", tp_author_map, "Author map JSON; labels documents by authorship");
  tp_cmd->add_option("--out", tp_out, "Model file")->required();
  tp_flags.add_to(tp_cmd);
  add_config(tp_cmd);

  // bundle
  auto* bundle_cmd = app.add_subcommand("bundle", "Assemble a pipeline bundle directory");
  std::string b_detector, b_polarity, b_out, b_embedder, b_fusion = "reembed", b_abbrev;
  double b_tau = 0.5;
  bool b_fallback = false;
  bundle_cmd->add_option("--detector", b_detector, "Neutral detector model")->required();
  bundle_cmd->add_option("--polarity", b_polarity, "Polarity model")->required();
  bundle_cmd->add_option("--out", b_out, "Bundle directory")->required();
  bundle_cmd->add_option("--embedder-config", b_embedder, "Embedder JSON (default: hashed n-grams)");
  bundle_cmd->add_option("--tau", b_tau, "Neutral threshold on P(neutral)");
  bundle_cmd->add_option("--fusion", b_fusion, "reembed or mean_pool")->check(CLI::IsMember({"reembed", "mean_pool"}));
  bundle_cmd->add_flag("--fallback-one-step", b_fallback, "Score the whole text when every sentence is filtered");
  bundle_cmd->add_option("--abbreviations", b_abbrev, "Abbreviation stop-list file");
  add_config(bundle_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Score one document; verdict JSON on stdout");
  std::string p_bundle, p_mode = "two_step", p_in, p_text;
  predict_cmd->add_option("--bundle", p_bundle, "Bundle directory")->required();
  predict_cmd->add_option("--mode", p_mode, "one_step or two_step")->check(CLI::IsMember({"one_step", "two_step"}));
  predict_cmd->add_option("--in", p_in, "Input file (default stdin)");
  predict_cmd->add_option("--text", p_text, "Inline text");
  add_config(predict_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "One-step vs two-step accuracy and Spearman rho");
  std::string e_bundle, e_corpus, e_crowd, e_out;
  eval_cmd->add_option("--bundle", e_bundle, "Bundle directory")->required();
  eval_cmd->add_option("--corpus", e_corpus, "Test corpus")->required();
  eval_cmd->add_option("--crowd", e_crowd, "Crowd scores (JSON object or CSV id,crowd_score)");
  eval_cmd->add_option("--out", e_out, "Also write the report JSON here");
  add_config(eval_cmd);

  // experiment-dilution
  auto* dil_cmd = app.add_subcommand("experiment-dilution", "Neutral-sentence augmentation sweep");
  std::string d_bundle, d_corpus, d_pool, d_ratios = "0,0.2,0.4,0.6,0.75", d_out, d_placement = "interleave";
  std::uint64_t d_seed = 0;
  dil_cmd->add_option("--bundle", d_bundle, "Bundle directory")->required();
  dil_cmd->add_option("--corpus", d_corpus, "Labeled political test corpus")->required();
  dil_cmd->add_option("--pool", d_pool, "Neutral sentence pool corpus")->required();
  dil_cmd->add_option("--ratios", d_ratios, "Comma-separated ratios in [0, 1)");
  dil_cmd->add_option("--seed", d_seed, "Augmentation seed");
  dil_cmd->add_option("--placement", d_placement, "interleave or append")->check(CLI::IsMember({"interleave", "append"}));
  dil_cmd->add_option("--out", d_out, "CSV output (stdout when omitted)");
  add_config(dil_cmd);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP inference service");
  ServiceOptions sopts;
  std::string bind_addr = "127.0.0.1:8080";
  serve_cmd->add_option("--bundle", sopts.bundle_path, "Bundle directory (env OPINIONLENS_BUNDLE)");
  serve_cmd->add_option("--bind", bind_addr, "addr:port");
  serve_cmd->add_option("--cap-bytes", sopts.cap_bytes, "Request body cap in bytes");
  serve_cmd->add_flag("--lazy", sopts.lazy, "Load the bundle on first request");
  serve_cmd->add_option("--ui-dir", sopts.ui_dir, "Serve static UI assets from this directory");
  serve_cmd->add_option("--allow-origin", sopts.allow_origin, "CORS origin for development");
  add_config(serve_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) {
      SyntheticSpec spec = SyntheticSpec::defaults();
      if (!synth_spec.empty()) {
        const json j = json::parse(read_file(synth_spec), nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::kInvalidSpec, "spec is not valid JSON");
        spec = SyntheticSpec::from_json(j);
      }
      if (synth_cmd->count("--seed")) spec.seed = synth_seed;
      if (synth_per_class) spec.n_polar_per_class = synth_per_class;
      if (synth_neutral) spec.n_neutral = synth_neutral;
      const auto corpora = synthesize(spec);
      save_corpus_jsonl(corpora.polar, out_polar);
      save_corpus_jsonl(corpora.neutral, out_neutral);
      std::vector<std::string> outputs{out_polar, out_neutral};
      if (!out_author_map.empty()) {
        write_file(out_author_map, corpora.authors.to_json().dump(2) + "\n");
        outputs.push_back(out_author_map);
      }
      write_manifest(*synth_cmd, out_polar + ".manifest.json", outputs);
      ordered_json summary{{"polar", corpora.polar.size()}, {"neutral", corpora.neutral.size()},
                           {"authors", corpora.authors.size()}, {"seed", spec.seed}};
      std::cout << summary.dump() << "\n";
      return kExitOk;
    }

    if (*articles_cmd) {
      const Corpus articles = synthesize_articles(load_corpus(art_polar), load_corpus(art_neutral), article_spec);
      save_corpus_jsonl(articles, art_out);
      write_manifest(*articles_cmd, art_out + ".manifest.json", {art_out});
      std::cout << ordered_json{{"articles", articles.size()}}.dump() << "\n";
      return kExitOk;
    }

    if (*tn_cmd) {
      const auto embedder = embedder_from(tn_flags.embedder_config);
      const Corpus political = load_corpus(tn_political);
      const Corpus neutral = load_corpus(tn_neutral);
      const SplitSpec split_spec{1.0 - tn_flags.test_fraction, tn_flags.split_seed};
      const auto ps = split(political, split_spec);
      const auto ns = split(neutral, {split_spec.train_fraction, mix_seed(split_spec.seed, 1)});
      auto train_set = embed_all(*embedder, ps.train, kPoliticalClass);
      auto neutral_train = embed_all(*embedder, ns.train, kNeutralClass);
      train_set.insert(train_set.end(), neutral_train.begin(), neutral_train.end());
      auto test_set = embed_all(*embedder, ps.test, kPoliticalClass);
      auto neutral_test = embed_all(*embedder, ns.test, kNeutralClass);
      test_set.insert(test_set.end(), neutral_test.begin(), neutral_test.end());
      return finish_training(*tn_cmd, tn_flags, *embedder, std::move(train_set), test_set,
                             {"political", "neutral"}, "neutral_detector", tn_out);
    }

    if (*tp_cmd) {
      const auto embedder = embedder_from(tp_flags.embedder_config);
      Corpus corpus = load_corpus(tp_corpus);
      if (!tp_author_map.empty()) corpus = label_by_authorship(corpus, AuthorMap::load(tp_author_map));
      Corpus labeled;
      bool seen_left = false, seen_right = false;
      for (const auto& doc : corpus) {
        if (doc.label == Polarity::kLeft || doc.label == Polarity::kRight) {
          seen_left = seen_left || doc.label == Polarity::kLeft;
          seen_right = seen_right || doc.label == Polarity::kRight;
          labeled.push_back(doc);
        }
      }
      if (!seen_left || !seen_right) {
        throw Error(ErrorCode::kDegenerateLabels, "polarity corpus needs both left and right documents");
      }
      const auto parts = split(labeled, {1.0 - tp_flags.test_fraction, tp_flags.split_seed});
      std::vector<LabeledVector> train_set, test_set;
      for (const auto& doc : parts.train) {
        train_set.push_back({embedder->embed(normalize(doc.text)), doc.label == Polarity::kRight ? kRightClass : kLeftClass});
      }
      for (const auto& doc : parts.test) {
        test_set.push_back({embedder->embed(normalize(doc.text)), doc.label == Polarity::kRight ? kRightClass : kLeftClass});
      }
      return finish_training(*tp_cmd, tp_flags, *embedder, std::move(train_set), test_set, {"left", "right"},
                             "polarity", tp_out);
    }

    if (*bundle_cmd) {
      PipelineConfig cfg;
      cfg.tau = b_tau;
      cfg.fusion = *parse_fusion(b_fusion);
      cfg.fallback_one_step = b_fallback;
      if (!b_abbrev.empty()) cfg.abbreviations = AbbreviationList::load(b_abbrev);
      const Pipeline pipeline(embedder_from(b_embedder), load(b_detector), load(b_polarity), cfg);
      const std::string version = save_bundle(b_out, pipeline);
      write_manifest(*bundle_cmd, b_out + ".manifest.json", {b_out});
      std::cout << ordered_json{{"bundle", b_out}, {"model_version", version}}.dump() << "\n";
      return kExitOk;
    }

    if (*predict_cmd) {
      const Bundle bundle = load_bundle(p_bundle);
      const std::string text = read_input(p_in, p_text);
      ordered_json j = to_json(bundle.pipeline->predict(text, *parse_mode(p_mode)));
      j["model_version"] = bundle.model_version;
      std::cout << j.dump() << "\n";
      return kExitOk;
    }

    if (*eval_cmd) {
      const Bundle bundle = load_bundle(e_bundle);
      const Corpus corpus = load_corpus(e_corpus);
      std::map<std::string, double> crowd;
      if (!e_crowd.empty()) crowd = load_crowd_scores(e_crowd);
      const MetricReport report = compare_modes(*bundle.pipeline, corpus, e_crowd.empty() ? nullptr : &crowd);
      ordered_json j = report.to_json();
      j["model_version"] = bundle.model_version;
      const std::string text = j.dump(2) + "\n";
      if (!e_out.empty()) {
        write_file(e_out, text);
        write_manifest(*eval_cmd, e_out + ".manifest.json", {e_out});
      }
      std::cout << text;
      return kExitOk;
    }

    if (*dil_cmd) {
      const Bundle bundle = load_bundle(d_bundle);
      DilutionSweepSpec spec;
      spec.ratios = parse_ratio_list(d_ratios);
      spec.seed = d_seed;
      spec.placement = *parse_placement(d_placement);
      spec.neutral_pool = load_corpus(d_pool);
      const std::string csv = sweep_to_csv(dilution_sweep(*bundle.pipeline, load_corpus(d_corpus), spec));
      if (d_out.empty()) {
        std::cout << csv;
      } else {
        write_file(d_out, csv);
        ordered_json m = run_manifest(*dil_cmd);
        m["ratio_definition"] = "fraction of each augmented document's sentences that are inserted neutral sentences";
        m["outputs"] = {{d_out, sha256_hex(csv)}};
        write_file(d_out + ".manifest.json", m.dump(2) + "\n");
        std::cout << csv;
      }
      return kExitOk;
    }

    if (*serve_cmd) {
      if (sopts.bundle_path.empty()) {
        if (const char* env = std::getenv("OPINIONLENS_BUNDLE")) sopts.bundle_path = env;
      }
      if (sopts.bundle_path.empty() && !sopts.lazy) {
        std::cerr << "error: --bundle or OPINIONLENS_BUNDLE required\n";
        return kExitUsage;
      }
      const auto colon = bind_addr.rfind(':');
      if (colon == std::string::npos) {
        std::cerr << "error: --bind expects addr:port\n";
        return kExitUsage;
      }
      sopts.host = bind_addr.substr(0, colon);
      sopts.port = std::stoi(bind_addr.substr(colon + 1));

      // Route SIGINT/SIGTERM to a watcher thread that stops the server;
      // in-flight requests finish before listen returns.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      Service service(sopts);
      const int port = service.bind();
      if (port < 0) {
        std::cerr << "error: cannot bind " << bind_addr << "\n";
        return kExitIo;
      }
      std::cerr << "serving on " << sopts.host << ":" << port << "\n";
      std::thread watcher([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
      });
      service.listen_after_bind();
      if (watcher.joinable()) {
        pthread_kill(watcher.native_handle(), SIGTERM);
        watcher.join();
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
