#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "converse/config.hpp"
#include "converse/csv.hpp"
#include "converse/error.hpp"
#include "converse/evaluation.hpp"
#include "converse/fingerprint.hpp"
#include "converse/report.hpp"
#include "converse/simd/kernels.hpp"
#include "converse/trainer.hpp"

#ifndef CONVERSE_VERSION
#define CONVERSE_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace converse;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;

// Flags shared by the commands that train models.
struct ModelFlags {
  std::string config;
  std::string profile = "semeval";
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<double> lambda;
  std::string gcn_variant;
  std::string rnn;
  bool no_stance_features = false;
  std::size_t jobs = 1;
  std::optional<std::size_t> epochs;
  std::string embeddings;
  std::string scheme = "auto";
  bool merge_dev = false;
};

struct IoFlags {
  std::string corpus;
  std::string outdir = ".";
  std::string dataset;
  std::string label;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--config", f.config, "INI run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--profile", f.profile, "Base profile: semeval (lr 0.001), pheme (lr 0.005) or desk")
      ->check(CLI::IsMember({"semeval", "pheme", "desk"}));
  cmd->add_option("--seed", f.seed, "Random seed (falls back to CONVERSE_VERIFY_SEED, then the config)");
  cmd->add_option("--mode", f.mode, "Training mode")->check(CLI::IsMember({"joint", "single-task", "stance-only"}));
  cmd->add_option("--lambda", f.lambda, "Stance loss weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--gcn-variant", f.gcn_variant, "Graph convolution")->check(CLI::IsMember({"original", "customized"}));
  cmd->add_option("--rnn", f.rnn, "Temporal layer of the veracity model")->check(CLI::IsMember({"gru", "cnn", "none"}));
  cmd->add_flag("--no-stance-features", f.no_stance_features, "Feed content features only to the veracity model");
  cmd->add_option("--jobs", f.jobs, "Folds trained in parallel")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", f.epochs, "Override max_epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--embeddings", f.embeddings, "Pretrained embedding file")->check(CLI::ExistingFile);
  cmd->add_option("--scheme", f.scheme, "Fold scheme; auto uses split tags when every thread has one")
      ->check(CLI::IsMember({"auto", "fixed", "loo"}));
  cmd->add_flag("--merge-dev", f.merge_dev, "Train on train+dev under the fixed split");
}

void add_io_flags(CLI::App* cmd, IoFlags& f, bool corpus_required) {
  auto* opt = cmd->add_option("--corpus", f.corpus, "Corpus JSONL")->check(CLI::ExistingFile);
  if (corpus_required) opt->required();
  cmd->add_option("--outdir", f.outdir, "Output directory");
  cmd->add_option("--dataset", f.dataset, "Dataset name used in tables (default: corpus file stem)");
  cmd->add_option("--label", f.label, "Method name used in tables");
}

std::uint64_t parse_seed_env(const char* text) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (text[used] != '\0') throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string("CONVERSE_VERIFY_SEED is not an integer: '") + text + "'");
  }
}

RunConfig resolve_config(const ModelFlags& f) {
  RunConfig c = profile_config(f.profile);
  if (!f.config.empty()) c = load_run_config(f.config, c);
  if (f.seed) {
    c.train.seed = *f.seed;
  } else if (const char* env = std::getenv("CONVERSE_VERIFY_SEED"); env && *env) {
    c.train.seed = parse_seed_env(env);
  }
  if (!f.mode.empty()) c.train.mode = *parse_train_mode(f.mode);
  if (f.lambda) c.train.lambda = *f.lambda;
  if (c.train.mode == TrainMode::single_task_veracity) c.train.lambda = 0.0;
  if (!f.gcn_variant.empty()) c.model.gcn.variant = *parse_adjacency_variant(f.gcn_variant);
  if (!f.rnn.empty()) c.model.veracity.rnn = *parse_rnn_variant(f.rnn);
  if (f.no_stance_features) c.model.veracity.use_stance_features = false;
  if (f.epochs) c.train.max_epochs = *f.epochs;
  validate(c.model);
  validate(c.train);
  return c;
}

std::string method_label(const RunConfig& c) {
  std::string name;
  switch (c.train.mode) {
    case TrainMode::joint: name = "Hierarchical-PSV"; break;
    case TrainMode::single_task_veracity: name = "Hierarchical GCN-RNN"; break;
    case TrainMode::stance_only: name = "Conversational-GCN"; break;
  }
  if (c.model.gcn.variant == AdjacencyVariant::original) name += " (original GCN)";
  if (c.train.mode != TrainMode::stance_only) {
    if (!c.model.veracity.use_stance_features) name += " - stance features";
    if (c.model.veracity.rnn == RnnVariant::cnn) name += " - GRU + CNN";
    if (c.model.veracity.rnn == RnnVariant::none) name += " - GRU";
  }
  return name;
}

FoldPlan resolve_folds(const Corpus& corpus, const ModelFlags& f) {
  FoldScheme scheme = FoldScheme::leave_one_event_out;
  if (f.scheme == "fixed") {
    scheme = FoldScheme::fixed_split;
  } else if (f.scheme == "auto") {
    const bool all_tagged = std::all_of(corpus.threads.begin(), corpus.threads.end(),
                                        [](const CorpusThread& t) { return t.split.has_value(); });
    if (all_tagged) scheme = FoldScheme::fixed_split;
  }
  return make_folds(corpus, scheme, f.merge_dev);
}

std::string version_string() { return std::string("converse ") + CONVERSE_VERSION; }

// Every command writes exactly one manifest into its output directory.
void write_manifest(const fs::path& outdir, const std::string& command, const std::vector<std::string>& argv,
                    const std::optional<RunConfig>& config, const std::optional<Corpus>& corpus,
                    std::optional<std::uint64_t> seed, json extra = json::object()) {
  json m;
  m["command"] = command;
  m["argv"] = argv;
  m["version"] = version_string();
  m["simd_backend"] = std::string(simd::backend_name(simd::active_backend()));
  m["config"] = config ? json(run_config_to_ini(*config)) : json(nullptr);
  m["corpus_fingerprint"] = corpus ? json(corpus_fingerprint(*corpus)) : json(nullptr);
  m["corpus_name"] = corpus ? json(corpus->name) : json(nullptr);
  m["seed"] = seed ? json(*seed) : json(nullptr);
  m["outdir"] = fs::absolute(outdir).lexically_normal().string();
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_text_file(outdir / "manifest.json", m.dump(2) + "\n");
}

json summary_json(const MetricSummary& s) {
  json j;
  j["macro_f1"] = s.macro_f1;
  j["per_class_f1"] = s.per_class_f1;
  j["accuracy"] = s.accuracy;
  j["items"] = s.items;
  return j;
}

std::optional<MetricSummary> try_summarize(const ConfusionMatrix& m) {
  if (m.total() == 0) return std::nullopt;
  return summarize(m);
}

// Prediction CSVs, metrics.json and the attribution rendering.
json write_evaluation(const fs::path& outdir, const std::vector<ThreadPrediction>& preds, const std::string& method,
                      const std::string& dataset) {
  write_text_file(outdir / "stance_predictions.csv", stance_predictions_csv(preds));
  write_text_file(outdir / "veracity_predictions.csv", veracity_predictions_csv(preds));
  write_text_file(outdir / "attribution.csv", attribution_csv(preds));

  json metrics;
  metrics["method"] = method;
  metrics["dataset"] = dataset;
  metrics["macro_average"] = "all classes, zero F1 for classes with no predictions or no gold items";
  const auto stance = try_summarize(stance_confusion(preds));
  const auto veracity = try_summarize(veracity_confusion(preds));
  metrics["stance"] = stance ? summary_json(*stance) : json(nullptr);
  metrics["veracity"] = veracity ? summary_json(*veracity) : json(nullptr);
  json depth = json::array();
  for (const auto& b : depth_bucket_eval(preds).buckets) {
    depth.push_back({{"bucket", b.bucket}, {"label", b.label}, {"items", b.metrics.items}, {"macro_f1", b.metrics.macro_f1}});
  }
  metrics["depth"] = depth;
  if (!preds.empty()) {
    const ThreadPrediction& p = preds.front();
    json tweets = json::array();
    for (std::size_t i = 0; i < p.tweet_ids.size() && i < p.dims_won.size(); ++i) {
      tweets.push_back({{"id", p.tweet_ids[i]}, {"stance", std::string(to_string(p.stances[i]))}, {"dims_won", p.dims_won[i]}});
    }
    metrics["attribution_example"] = {{"thread_id", p.thread_id}, {"veracity", std::string(to_string(p.veracity))}, {"tweets", tweets}};
    write_text_file(outdir / "attribution.svg", attribution_svg(p));
  }
  write_text_file(outdir / "metrics.json", metrics.dump(2) + "\n");
  return metrics;
}

void print_summary(const json& metrics) {
  std::cout << metrics["method"].get<std::string>() << " on " << metrics["dataset"].get<std::string>() << "\n";
  for (const char* task : {"stance", "veracity"}) {
    if (metrics[task].is_null()) continue;
    std::cout << "  " << task << ": macro-F1 " << csv::number(metrics[task]["macro_f1"].get<double>(), 3)
              << ", accuracy " << csv::number(metrics[task]["accuracy"].get<double>(), 3) << "\n";
  }
}

std::optional<EmbeddingFile> maybe_embeddings(const ModelFlags& f) {
  if (f.embeddings.empty()) return std::nullopt;
  return load_embeddings(f.embeddings);
}

// ---- commands ----------------------------------------------------------------

int cmd_ingest(const std::string& input, std::string output, const std::string& outdir,
               const std::vector<std::string>& argv) {
  Corpus corpus = load_corpus(input);
  const fs::path dir(outdir);
  fs::create_directories(dir);
  if (output.empty()) output = (dir / (corpus.name + ".jsonl")).string();
  write_corpus(corpus, fs::path(output));
  const std::string stats = statistics_csv({corpus_statistics(corpus)});
  write_text_file(dir / "statistics.csv", stats);
  write_text_file(dir / "stance_over_time.csv", stance_over_time_csv(stance_over_time(corpus)));
  std::cout << stats;
  write_manifest(dir, "ingest", argv, std::nullopt, corpus, std::nullopt, {{"output", output}});
  return 0;
}

struct SynthFlags {
  std::uint64_t seed = 7;
  std::size_t threads = 20;
  std::size_t events = 1;
  std::size_t min_tweets = 4;
  std::size_t max_tweets = 8;
  std::size_t vocab = 120;
  double dev_fraction = 0.1;
  double test_fraction = 0.2;
  bool no_splits = false;
  std::string output;
  std::string outdir = ".";
};

int cmd_synth(SynthFlags f, bool seed_given, const std::vector<std::string>& argv) {
  if (const char* env = std::getenv("CONVERSE_VERIFY_SEED"); env && *env && !seed_given) {
    f.seed = parse_seed_env(env);
  }
  SyntheticSpec spec = default_synthetic_spec();
  spec.seed = f.seed;
  spec.n_threads = f.threads;
  spec.n_events = f.events;
  spec.min_tweets = f.min_tweets;
  spec.max_tweets = f.max_tweets;
  spec.vocab_size = f.vocab;
  Corpus corpus = generate_synthetic(spec);
  if (!f.no_splits) assign_splits(corpus, f.dev_fraction, f.test_fraction, f.seed);
  const fs::path dir(f.outdir);
  fs::create_directories(dir);
  const fs::path out = f.output.empty() ? dir / "synthetic.jsonl" : fs::path(f.output);
  write_corpus(corpus, out);
  std::cout << statistics_csv({corpus_statistics(corpus)});
  write_manifest(dir, "synth", argv, std::nullopt, corpus, f.seed, {{"output", out.string()}});
  return 0;
}

struct TrainedRun {
  std::vector<FoldResult> results;
  std::vector<ThreadPrediction> predictions;
};

TrainedRun train_and_save(const Corpus& corpus, const FoldPlan& plan, const RunConfig& rc, const ModelFlags& f,
                          const fs::path& dir, bool verbose) {
  const auto embeddings = maybe_embeddings(f);
  TrainOptions options;
  options.embeddings = embeddings ? &*embeddings : nullptr;
  options.checkpoint_dir = dir;
  if (verbose && f.jobs == 1) {
    options.on_epoch = [](const EpochLog& e) {
      std::cerr << "epoch " << e.epoch << " loss " << csv::number(e.joint_loss, 4);
      if (e.dev_macro_f1) std::cerr << " dev-F1 " << csv::number(*e.dev_macro_f1, 3);
      std::cerr << "\n";
    };
  }
  TrainedRun run;
  run.results = run_fold_plan(corpus, plan, rc.model, rc.train, f.jobs, options);
  json folds = json::array();
  for (const auto& r : run.results) {
    const fs::path fold_dir = dir / ("fold-" + r.fold.name);
    fs::create_directories(fold_dir);
    save_checkpoint(fold_dir / "model.ckpt", r.model->to_checkpoint());
    write_text_file(fold_dir / "train_log.jsonl", r.log.to_jsonl());
    folds.push_back({{"name", r.fold.name},
                     {"train_ids", r.fold.train_ids},
                     {"dev_ids", r.fold.dev_ids},
                     {"test_ids", r.fold.test_ids},
                     {"checkpoint", "fold-" + r.fold.name + "/model.ckpt"},
                     {"selected_epoch", r.log.selected_epoch}});
  }
  write_text_file(dir / "folds.json", folds.dump(2) + "\n");
  run.predictions = concatenate_predictions(run.results);
  return run;
}

int cmd_train(const ModelFlags& mf, const IoFlags& io, const std::vector<std::string>& argv) {
  const RunConfig rc = resolve_config(mf);
  const Corpus corpus = load_corpus(io.corpus);
  const FoldPlan plan = resolve_folds(corpus, mf);
  const fs::path dir(io.outdir);
  fs::create_directories(dir);
  write_text_file(dir / "config.ini", run_config_to_ini(rc));
  const TrainedRun run = train_and_save(corpus, plan, rc, mf, dir, true);
  const json metrics = write_evaluation(dir, run.predictions, io.label.empty() ? method_label(rc) : io.label,
                                        io.dataset.empty() ? corpus.name : io.dataset);
  print_summary(metrics);
  write_manifest(dir, "train", argv, rc, corpus, rc.train.seed,
                 {{"corpus", fs::absolute(io.corpus).lexically_normal().string()}, {"folds", plan.folds.size()}});
  return 0;
}

int cmd_evaluate(const std::string& run_dir, const std::string& checkpoint, const IoFlags& io,
                 const std::vector<std::string>& argv) {
  if (run_dir.empty() == checkpoint.empty()) throw ConfigError("evaluate needs exactly one of --run or --checkpoint");
  const fs::path dir(io.outdir);
  fs::create_directories(dir);
  std::string corpus_path = io.corpus;
  std::vector<ThreadPrediction> preds;
  std::optional<RunConfig> config;
  std::string method = io.label;
  if (!run_dir.empty()) {
    const json manifest = json::parse(read_text_file(fs::path(run_dir) / "manifest.json"));
    if (corpus_path.empty()) corpus_path = manifest.value("corpus", "");
    if (corpus_path.empty()) throw ConfigError("--corpus is required: the run manifest names no corpus");
    config = parse_run_config(manifest["config"].get<std::string>());
    if (method.empty()) method = method_label(*config);
  } else if (corpus_path.empty()) {
    throw ConfigError("--corpus is required with --checkpoint");
  }
  const Corpus corpus = load_corpus(corpus_path);
  if (!run_dir.empty()) {
    const json folds = json::parse(read_text_file(fs::path(run_dir) / "folds.json"));
    for (const auto& f : folds) {
      const auto model = HierarchicalModel::from_checkpoint(
          load_checkpoint(fs::path(run_dir) / f["checkpoint"].get<std::string>()));
      const auto fold_preds = predict_threads(model, corpus, f["test_ids"].get<std::vector<std::string>>());
      preds.insert(preds.end(), fold_preds.begin(), fold_preds.end());
    }
  } else {
    const auto model = HierarchicalModel::from_checkpoint(load_checkpoint(checkpoint));
    std::vector<std::string> ids;
    for (const auto& t : corpus.threads) ids.push_back(t.thread_id);
    preds = predict_threads(model, corpus, ids);
    if (method.empty()) method = "checkpoint " + fs::path(checkpoint).filename().string();
  }
  const json metrics = write_evaluation(dir, preds, method, io.dataset.empty() ? corpus.name : io.dataset);
  print_summary(metrics);
  write_manifest(dir, "evaluate", argv, config, corpus, config ? std::optional(config->train.seed) : std::nullopt,
                 {{"corpus", fs::absolute(corpus_path).lexically_normal().string()},
                  {"source", run_dir.empty() ? checkpoint : run_dir}});
  return 0;
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v >= 0.0)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError("--lambdas expects comma-separated nonnegative numbers, got '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--lambdas is empty");
  return out;
}

int cmd_sweep(const ModelFlags& mf, const IoFlags& io, const std::string& lambdas,
              const std::vector<std::string>& argv) {
  RunConfig rc = resolve_config(mf);
  const Corpus corpus = load_corpus(io.corpus);
  const FoldPlan plan = resolve_folds(corpus, mf);
  const fs::path dir(io.outdir);
  fs::create_directories(dir);
  SweepCurve partial;
  const SweepCurve curve = lambda_sweep(corpus, plan, parse_lambdas(lambdas), rc.model, rc.train, mf.jobs,
                                        [&](const SweepPoint& p) {
                                          partial.points.push_back(p);
                                          write_text_file(dir / "sweep.csv", sweep_csv(partial));
                                          std::cout << "lambda " << csv::number(p.lambda, 2) << ": macro-F1 "
                                                    << csv::number(p.macro_f1, 3) << ", F_false "
                                                    << csv::number(p.f_false, 3) << ", F_unverified "
                                                    << csv::number(p.f_unverified, 3) << std::endl;
                                        });
  write_text_file(dir / "sweep.csv", sweep_csv(curve));
  write_text_file(dir / "sweep.svg", sweep_svg(curve));
  write_manifest(dir, "sweep", argv, rc, corpus, rc.train.seed,
                 {{"corpus", fs::absolute(io.corpus).lexically_normal().string()}, {"lambdas", lambdas}});
  return 0;
}

int cmd_ablate(const ModelFlags& mf, const IoFlags& io, const std::vector<std::string>& argv) {
  const Corpus corpus = load_corpus(io.corpus);
  const FoldPlan plan = resolve_folds(corpus, mf);
  const fs::path dir(io.outdir);
  fs::create_directories(dir);
  const std::string dataset = io.dataset.empty() ? corpus.name : io.dataset;

  ModelFlags full = mf;
  full.rnn.clear();
  full.no_stance_features = false;
  std::vector<std::pair<std::string, ModelFlags>> variants{{"full", full}};
  if (!mf.rnn.empty() || mf.no_stance_features) {
    variants.emplace_back("variant", mf);
  } else {
    ModelFlags a = full, b = full, c = full;
    a.no_stance_features = true;
    b.rnn = "cnn";
    c.rnn = "none";
    variants.insert(variants.end(), {{"no-stance-features", a}, {"cnn", b}, {"no-rnn", c}});
  }
  std::vector<VeracityTableRow> rows;
  for (const auto& [name, flags] : variants) {
    const RunConfig rc = resolve_config(flags);
    const fs::path sub = dir / name;
    fs::create_directories(sub);
    write_text_file(sub / "config.ini", run_config_to_ini(rc));
    const TrainedRun run = train_and_save(corpus, plan, rc, flags, sub, false);
    const json metrics = write_evaluation(sub, run.predictions, method_label(rc), dataset);
    print_summary(metrics);
    if (!metrics["veracity"].is_null()) {
      rows.push_back({method_label(rc), dataset, metrics["veracity"]["macro_f1"].get<double>(),
                      metrics["veracity"]["accuracy"].get<double>()});
    }
  }
  write_text_file(dir / "ablation.csv", veracity_table_csv(rows));
  write_manifest(dir, "ablate", argv, resolve_config(mf), corpus, resolve_config(mf).train.seed,
                 {{"corpus", fs::absolute(io.corpus).lexically_normal().string()}});
  return 0;
}

SweepCurve read_sweep_csv(const fs::path& path) {
  SweepCurve curve;
  std::stringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 5) throw SchemaError(path.string() + ": malformed sweep row");
    curve.points.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return curve;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& corpus_path, const std::string& outdir,
               const std::vector<std::string>& argv) {
  const fs::path dir(outdir);
  fs::create_directories(dir);
  std::vector<StanceTableRow> stance_rows;
  std::vector<VeracityTableRow> veracity_rows;
  std::vector<NamedDepthReport> depth_rows;
  std::optional<SweepCurve> sweep;
  bool attribution_done = false;
  for (const auto& run : runs) {
    const fs::path rd(run);
    if (fs::exists(rd / "sweep.csv") && !sweep) sweep = read_sweep_csv(rd / "sweep.csv");
    if (!fs::exists(rd / "metrics.json")) continue;
    const json m = json::parse(read_text_file(rd / "metrics.json"));
    const std::string method = m["method"].get<std::string>();
    if (!m["stance"].is_null()) {
      MetricSummary s;
      s.macro_f1 = m["stance"]["macro_f1"].get<double>();
      s.per_class_f1 = m["stance"]["per_class_f1"].get<std::vector<double>>();
      s.accuracy = m["stance"]["accuracy"].get<double>();
      stance_rows.push_back(stance_row(method, s));
    }
    if (!m["veracity"].is_null()) {
      veracity_rows.push_back({method, m["dataset"].get<std::string>(), m["veracity"]["macro_f1"].get<double>(),
                               m["veracity"]["accuracy"].get<double>()});
    }
    NamedDepthReport d;
    d.method = method;
    for (const auto& b : m["depth"]) {
      DepthBucket bucket;
      bucket.bucket = b["bucket"].get<std::size_t>();
      bucket.label = b["label"].get<std::string>();
      bucket.metrics.items = b["items"].get<std::size_t>();
      bucket.metrics.macro_f1 = b["macro_f1"].get<double>();
      d.report.buckets.push_back(bucket);
    }
    if (!d.report.buckets.empty()) depth_rows.push_back(std::move(d));
    if (!attribution_done && m.contains("attribution_example")) {
      const json& a = m["attribution_example"];
      ThreadPrediction p;
      p.thread_id = a["thread_id"].get<std::string>();
      p.veracity = *parse_veracity(a["veracity"].get<std::string>());
      for (const auto& t : a["tweets"]) {
        p.tweet_ids.push_back(t["id"].get<std::string>());
        p.stances.push_back(*parse_stance(t["stance"].get<std::string>()));
        p.dims_won.push_back(t["dims_won"].get<std::size_t>());
      }
      write_text_file(dir / "attribution.svg", attribution_svg(p));
      attribution_done = true;
    }
  }
  for (auto& r : published_stance_rows()) stance_rows.push_back(r);
  for (auto& r : published_veracity_rows()) veracity_rows.push_back(r);
  write_text_file(dir / "stance_table.csv", stance_table_csv(stance_rows));
  write_text_file(dir / "veracity_table.csv", veracity_table_csv(veracity_rows));
  std::vector<NamedDepthReport> depth_with_published = depth_rows;
  for (auto& r : published_depth_rows()) depth_with_published.push_back(r);
  write_text_file(dir / "depth_table.csv", depth_table_csv(depth_with_published));
  write_text_file(dir / "depth.svg", depth_buckets_svg(depth_with_published));
  if (sweep) {
    write_text_file(dir / "sweep.csv", sweep_csv(*sweep));
    write_text_file(dir / "sweep.svg", sweep_svg(*sweep));
  }
  std::optional<Corpus> corpus;
  if (!corpus_path.empty()) {
    corpus = load_corpus(corpus_path);
    const auto rows = stance_over_time(*corpus);
    write_text_file(dir / "stance_over_time.csv", stance_over_time_csv(rows));
    write_text_file(dir / "stance_over_time.svg", stance_over_time_svg(rows));
    write_text_file(dir / "statistics.csv", statistics_csv({corpus_statistics(*corpus)}));
  }
  std::cout << stance_table_csv(stance_rows) << "\n" << veracity_table_csv(veracity_rows);
  write_manifest(dir, "report", argv, std::nullopt, corpus, std::nullopt, {{"runs", runs}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Joint rumor stance classification and veracity prediction over conversation trees"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string ingest_input, ingest_output, ingest_outdir = ".";
  auto* ingest = app.add_subcommand("ingest", "Validate a corpus, write it canonically and print statistics");
  ingest->add_option("--input", ingest_input, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  ingest->add_option("--output", ingest_output, "Canonical corpus path (default: <outdir>/<name>.jsonl)");
  ingest->add_option("--outdir", ingest_outdir, "Output directory");

  SynthFlags sf;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted stance dynamics");
  synth->add_option("--seed", sf.seed, "Random seed (falls back to CONVERSE_VERIFY_SEED)");
  synth->add_option("--threads", sf.threads, "Number of threads")->check(CLI::PositiveNumber);
  synth->add_option("--events", sf.events, "Number of events")->check(CLI::PositiveNumber);
  synth->add_option("--min-tweets", sf.min_tweets, "Fewest tweets per thread")->check(CLI::PositiveNumber);
  synth->add_option("--max-tweets", sf.max_tweets, "Most tweets per thread")->check(CLI::PositiveNumber);
  synth->add_option("--vocab", sf.vocab, "Vocabulary size")->check(CLI::PositiveNumber);
  synth->add_option("--dev-fraction", sf.dev_fraction, "Share of threads tagged dev")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--test-fraction", sf.test_fraction, "Share of threads tagged test")->check(CLI::Range(0.0, 1.0));
  synth->add_flag("--no-splits", sf.no_splits, "Leave threads without split tags");
  synth->add_option("--output", sf.output, "Corpus path (default: <outdir>/synthetic.jsonl)");
  synth->add_option("--outdir", sf.outdir, "Output directory");

  ModelFlags train_mf;
  IoFlags train_io;
  auto* train_cmd = app.add_subcommand("train", "Train one model per fold and write test predictions");
  add_model_flags(train_cmd, train_mf);
  add_io_flags(train_cmd, train_io, true);

  IoFlags eval_io;
  std::string eval_run, eval_checkpoint;
  auto* evaluate = app.add_subcommand("evaluate", "Predict with trained models and score the predictions");
  evaluate->add_option("--run", eval_run, "Directory written by train")->check(CLI::ExistingDirectory);
  evaluate->add_option("--checkpoint", eval_checkpoint, "Single checkpoint; predicts every thread")
      ->check(CLI::ExistingFile);
  add_io_flags(evaluate, eval_io, false);

  ModelFlags sweep_mf;
  IoFlags sweep_io;
  std::string lambdas = "0,0.25,0.5,0.75,1";
  auto* sweep = app.add_subcommand("sweep", "Train across stance loss weights");
  add_model_flags(sweep, sweep_mf);
  add_io_flags(sweep, sweep_io, true);
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda values");

  ModelFlags ablate_mf;
  IoFlags ablate_io;
  auto* ablate = app.add_subcommand(
      "ablate", "Compare the full model with --no-stance-features / --rnn variants (all of them when none given)");
  add_model_flags(ablate, ablate_mf);
  add_io_flags(ablate, ablate_io, true);

  std::vector<std::string> report_runs;
  std::string report_corpus, report_outdir = ".";
  auto* report = app.add_subcommand("report", "Merge run directories into tables and plots");
  report->add_option("--runs", report_runs, "Run directories")->required();
  report->add_option("--corpus", report_corpus, "Corpus for the stance-over-time plot")->check(CLI::ExistingFile);
  report->add_option("--outdir", report_outdir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(ingest_input, ingest_output, ingest_outdir, args);
    if (*synth) return cmd_synth(sf, synth->count("--seed") > 0, args);
    if (*train_cmd) return cmd_train(train_mf, train_io, args);
    if (*evaluate) return cmd_evaluate(eval_run, eval_checkpoint, eval_io, args);
    if (*sweep) return cmd_sweep(sweep_mf, sweep_io, lambdas, args);
    if (*ablate) return cmd_ablate(ablate_mf, ablate_io, args);
    if (*report) return cmd_report(report_runs, report_corpus, report_outdir, args);
  } catch (const DivergenceError& e) {
    std::cerr << "error: training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TreeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LabelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidSpec& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
