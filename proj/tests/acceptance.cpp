// Acceptance runner: one PASS/FAIL/SKIP line per criterion. Criteria 9-11
// need real corpora: CONVERSE_SEMEVAL and CONVERSE_PHEME name canonical
// JSONL files (split tags select the fixed split, otherwise
// leave-one-event-out). Exit status is 1 when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "converse/config.hpp"
#include "converse/evaluation.hpp"
#include "converse/simd/kernels.hpp"
#include "converse/trainer.hpp"
#include "gradient_suite.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace converse;
using namespace converse::testing;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

// ---- 1 ---------------------------------------------------------------------

Outcome adjacency_oracle() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  std::size_t mismatches = 0, asymmetric = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto parents = random_parents(2 + rng() % 11, rng);
    for (auto v : {AdjacencyVariant::original, AdjacencyVariant::customized}) {
      const auto r = check_normalization(parents, v);
      worst = std::max(worst, r.max_error);
      mismatches += r.pattern_mismatches;
      asymmetric += r.asymmetric;
    }
  }
  return verdict(worst <= 1e-10 && mismatches == 0 && asymmetric == 0,
                 "200 trees, max abs error " + fmt("%.2e", worst) + ", zero-pattern mismatches " +
                     std::to_string(mismatches));
}

// ---- 2 ---------------------------------------------------------------------

Outcome gradient_checks() {
  double worst = 0.0;
  std::size_t failed = 0, checks = 0;
  std::string first_failure;
  auto record = [&](const std::string& name, const GradientCheckReport& r) {
    ++checks;
    worst = std::max(worst, r.max_relative_error);
    if (!r.passed()) {
      ++failed;
      if (first_failure.empty()) first_failure = name + ": " + describe(r);
    }
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto& c : kernel_gradient_cases(seed)) record(c.name, c.report);
    record("stance loss", stance_loss_check(seed));
    record("joint loss", joint_loss_check(seed));
  }
  std::string detail = std::to_string(checks) + " checks over 20 trials, max relative error " + fmt("%.2e", worst);
  if (!first_failure.empty()) detail += "; " + first_failure;
  return verdict(failed == 0 && worst <= 1e-4, detail);
}

// ---- 3 ---------------------------------------------------------------------

Outcome receptive_field() {
  std::mt19937_64 rng(3003);
  std::size_t original = 0, customized = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto parents = random_parents(2 + rng() % 11, rng);
    original += receptive_field_mismatches(parents, {kStanceClasses}, AdjacencyVariant::original, 1, rng());
    customized += receptive_field_mismatches(parents, {kStanceClasses}, AdjacencyVariant::customized, 2, rng());
  }
  return verdict(original == 0 && customized == 0,
                 "50 trees, mismatches original/1-hop " + std::to_string(original) + ", customized/2-hop " +
                     std::to_string(customized));
}

// ---- 4 ---------------------------------------------------------------------

Outcome metric_oracle() {
  auto matrix = [](std::size_t k, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    ConfusionMatrix m(k);
    for (auto [g, p] : pairs) m.add(g, p);
    return m;
  };
  bool ok = true;
  ok &= macro_f1(matrix(4, {{0, 0}, {1, 1}, {2, 2}, {3, 3}})) == 1.0;
  const auto all_comment = matrix(4, {{0, 3}, {0, 3}, {3, 3}, {3, 3}});
  ok &= per_class_f1(all_comment) == std::vector<double>{0.0, 0.0, 0.0, 2.0 / 3.0};
  ok &= macro_f1(all_comment) == (2.0 / 3.0) / 4.0;
  ok &= macro_f1(matrix(3, {{0, 0}, {1, 1}, {2, 2}})) == 1.0;
  const bool crafted = ok;

  std::mt19937_64 rng(4004);
  std::size_t random_mismatch = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 3 + trial % 2;
    std::vector<std::pair<std::size_t, std::size_t>> pairs(1 + rng() % 60);
    for (auto& [g, p] : pairs) {
      g = rng() % k;
      p = rng() % 3 == 0 ? g : rng() % k;
    }
    const auto f = per_class_f1(matrix(k, pairs));
    double mean = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      random_mismatch += f[c] != brute_f1(pairs, c);
      mean += brute_f1(pairs, c);
    }
    random_mismatch += macro_f1(matrix(k, pairs)) != mean / static_cast<double>(k);
  }
  return verdict(crafted && random_mismatch == 0,
                 std::string("crafted cases ") + (crafted ? "exact" : "WRONG") +
                     ", 50 random matrices with inexact values: " + std::to_string(random_mismatch));
}

// ---- 5 ---------------------------------------------------------------------

Outcome overfit() {
  const Corpus corpus = generate_synthetic(default_synthetic_spec());
  RunConfig rc = profile_config("desk");
  rc.train.max_epochs = 500;
  rc.train.lambda = 1.0;
  rc.train.select_on_dev = false;
  Fold fold;
  fold.name = "all";
  for (const auto& t : corpus.threads) fold.train_ids.push_back(t.thread_id);

  // train() builds the same initial model from the same vocabulary and seed.
  const HierarchicalModel initial(rc.model, Vocabulary::build(corpus), rc.train.seed);
  std::vector<PreparedThread> prepared;
  for (const auto& t : corpus.threads) prepared.push_back(initial.prepare(t));
  const double initial_loss = evaluate_loss(initial, prepared, 1.0, TrainMode::joint);

  const TrainResult r = train(corpus, fold, rc.model, rc.train);
  const double final_loss = evaluate_loss(*r.model, prepared, 1.0, TrainMode::joint);
  const auto preds = predict_threads(*r.model, corpus, fold.train_ids);
  const double stance_acc = accuracy(stance_confusion(preds));
  const double veracity_acc = accuracy(veracity_confusion(preds));
  const double ratio = final_loss / initial_loss;
  return verdict(stance_acc >= 0.99 && veracity_acc == 1.0 && ratio <= 0.10,
                 "stance acc " + fmt("%.3f", stance_acc) + ", veracity acc " + fmt("%.3f", veracity_acc) +
                     ", joint loss " + fmt("%.4f", initial_loss) + " -> " + fmt("%.4f", final_loss) + " (" +
                     fmt("%.1f", 100.0 * ratio) + "% of initial, need <= 10%)");
}

// ---- 6 ---------------------------------------------------------------------

Outcome signal_recovery() {
  SyntheticSpec spec = default_synthetic_spec();
  spec.n_threads = 250;
  spec.seed = 11;
  const Corpus corpus = generate_synthetic(spec);
  Fold fold;
  fold.name = "holdout";
  for (std::size_t i = 0; i < corpus.threads.size(); ++i) {
    (i < 200 ? fold.train_ids : fold.test_ids).push_back(corpus.threads[i].thread_id);
  }
  RunConfig rc = profile_config("desk");
  rc.train.max_epochs = 30;
  std::map<double, MetricSummary> by_lambda;
  for (double lambda : {0.0, 1.0}) {
    rc.train.lambda = lambda;
    const TrainResult r = train(corpus, fold, rc.model, rc.train);
    by_lambda[lambda] = summarize(veracity_confusion(predict_threads(*r.model, corpus, fold.test_ids)));
  }
  const MetricSummary& full = by_lambda[1.0];
  const MetricSummary& single = by_lambda[0.0];
  return verdict(full.macro_f1 >= 0.80 && full.per_class_f1[1] >= single.per_class_f1[1],
                 "200 train / 50 test, macro-F1(lambda=1) " + fmt("%.3f", full.macro_f1) + ", F_false " +
                     fmt("%.3f", full.per_class_f1[1]) + " vs " + fmt("%.3f", single.per_class_f1[1]) +
                     " at lambda=0");
}

// ---- 7 ---------------------------------------------------------------------

Outcome fold_integrity() {
  std::size_t violations = 0, folds = 0;
  for (std::size_t events = 2; events <= 9; ++events) {
    SyntheticSpec spec = default_synthetic_spec();
    spec.n_threads = 90;
    spec.n_events = events;
    spec.seed = 700 + events;
    const Corpus c = generate_synthetic(spec);
    const FoldPlan plan = make_folds(c, FoldScheme::leave_one_event_out);
    std::map<std::string, std::size_t> tested;
    for (const Fold& f : plan.folds) {
      ++folds;
      std::set<std::string> train(f.train_ids.begin(), f.train_ids.end());
      violations += train.size() != f.train_ids.size();
      violations += train.size() + f.test_ids.size() != c.threads.size();
      for (const auto& id : f.test_ids) {
        violations += train.count(id);
        violations += c.find(id).event != f.name;
        ++tested[id];
      }
      for (const auto& id : f.train_ids) violations += c.find(id).event == f.name;
    }
    violations += tested.size() != c.threads.size();
    for (const auto& [id, n] : tested) violations += n != 1;
  }
  return verdict(violations == 0, "event counts 2-9, " + std::to_string(folds) + " folds, " +
                                      std::to_string(violations) + " invariant violations");
}

// ---- 8 ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome pipeline_determinism() {
  const fs::path root = fs::temp_directory_path() / ("converse-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string cli = CONVERSE_CLI_PATH;
  auto pipeline = [&](const std::string& tag) {
    const fs::path d = root / tag;
    const std::string quiet = " > " + (d.string() + ".log") + " 2>&1";
    fs::create_directories(d);
    return std::system((cli + " synth --seed 21 --threads 40 --outdir " + (d / "s").string() + quiet).c_str()) == 0 &&
           std::system((cli + " train --corpus " + (d / "s/synthetic.jsonl").string() +
                        " --profile desk --epochs 5 --outdir " + (d / "train").string() + quiet).c_str()) == 0 &&
           std::system((cli + " evaluate --run " + (d / "train").string() + " --outdir " + (d / "eval").string() +
                        quiet).c_str()) == 0;
  };
  if (!pipeline("a") || !pipeline("b")) return {Status::fail, "pipeline command failed; see logs under " + root.string()};
  std::size_t compared = 0, differing = 0;
  for (const char* stage : {"train", "eval"}) {
    for (const char* file : {"stance_predictions.csv", "veracity_predictions.csv"}) {
      const std::string a = slurp(root / "a" / stage / file);
      const std::string b = slurp(root / "b" / stage / file);
      ++compared;
      differing += a.empty() || a != b;
    }
  }
  fs::remove_all(root);
  return verdict(differing == 0, "synth -> train -> evaluate twice, " + std::to_string(compared) +
                                     " prediction CSVs compared, " + std::to_string(differing) + " differ");
}

// ---- 9-11 ------------------------------------------------------------------

std::optional<Corpus> corpus_from_env(const char* var) {
  const char* path = std::getenv(var);
  if (!path || !*path) return std::nullopt;
  return load_corpus(path);
}

std::size_t jobs() {
  if (const char* env = std::getenv("CONVERSE_JOBS"); env && *env) return std::max(1, std::atoi(env));
  return std::max(1u, std::thread::hardware_concurrency());
}

FoldPlan plan_for(const Corpus& c) {
  const bool tagged = std::all_of(c.threads.begin(), c.threads.end(), [](const CorpusThread& t) { return t.split.has_value(); });
  return make_folds(c, tagged ? FoldScheme::fixed_split : FoldScheme::leave_one_event_out);
}

std::vector<ThreadPrediction> run_pooled(const Corpus& c, RunConfig rc) {
  return concatenate_predictions(run_fold_plan(c, plan_for(c), rc.model, rc.train, jobs()));
}

struct DataRuns {
  std::optional<Corpus> semeval = corpus_from_env("CONVERSE_SEMEVAL");
  std::optional<Corpus> pheme = corpus_from_env("CONVERSE_PHEME");
  std::map<std::string, std::vector<ThreadPrediction>> cache;

  // key: dataset/variant
  const std::vector<ThreadPrediction>& get(const std::string& dataset, const std::string& variant) {
    const std::string key = dataset + "/" + variant;
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const Corpus& c = dataset == "semeval" ? *semeval : *pheme;
    RunConfig rc = profile_config(dataset);
    if (variant == "stance-only") rc.train.mode = TrainMode::stance_only;
    if (variant == "single-task") {
      rc.train.mode = TrainMode::single_task_veracity;
      rc.train.lambda = 0.0;
    }
    if (variant == "original-gcn") rc.model.gcn.variant = AdjacencyVariant::original;
    return cache[key] = run_pooled(c, rc);
  }
};

bool within(double got, double target, double tol) { return std::abs(got - target) <= tol; }

Outcome stance_reproduction(DataRuns& data) {
  if (!data.semeval) return {Status::skip, "set CONVERSE_SEMEVAL to a SemEval-2017 corpus"};
  const MetricSummary s = summarize(stance_confusion(data.get("semeval", "stance-only")));
  const double f_d = s.per_class_f1[1], f_q = s.per_class_f1[2];
  return verdict(within(s.macro_f1, 0.499, 0.05) && within(f_q, 0.646, 0.07) && f_d > 0.0,
                 "macro-F1 " + fmt("%.3f", s.macro_f1) + " (target 0.499 +/- 0.05), F_Q " + fmt("%.3f", f_q) +
                     " (0.646 +/- 0.07), F_D " + fmt("%.3f", f_d) + " (> 0)");
}

Outcome veracity_reproduction(DataRuns& data) {
  if (!data.semeval && !data.pheme) return {Status::skip, "set CONVERSE_SEMEVAL and/or CONVERSE_PHEME"};
  bool ok = true;
  std::string detail;
  auto check = [&](const std::string& dataset, const std::string& variant, double f1, double f1_tol,
                   std::optional<double> acc) {
    const MetricSummary s = summarize(veracity_confusion(data.get(dataset, variant)));
    bool good = within(s.macro_f1, f1, f1_tol);
    if (acc) good &= within(s.accuracy, *acc, f1_tol);
    ok &= good;
    if (!detail.empty()) detail += "; ";
    detail += dataset + " " + variant + " macro-F1 " + fmt("%.3f", s.macro_f1) + " (" + fmt("%.3f", f1) + ")";
    if (acc) detail += " acc " + fmt("%.3f", s.accuracy) + " (" + fmt("%.3f", *acc) + ")";
  };
  if (data.semeval) {
    check("semeval", "joint", 0.588, 0.06, 0.643);
    check("semeval", "single-task", 0.540, 0.06, std::nullopt);
  }
  if (data.pheme) {
    check("pheme", "joint", 0.333, 0.05, 0.361);
    check("pheme", "single-task", 0.317, 0.06, std::nullopt);
  }
  if (!data.semeval || !data.pheme) detail += "; only one dataset supplied";
  return verdict(ok, detail);
}

Outcome depth_trend(DataRuns& data) {
  if (!data.semeval) return {Status::skip, "set CONVERSE_SEMEVAL to a SemEval-2017 corpus"};
  const DepthBucketReport full = depth_bucket_eval(data.get("semeval", "joint"));
  const DepthBucketReport original = depth_bucket_eval(data.get("semeval", "original-gcn"));
  std::size_t wins = 0;
  std::string detail;
  for (std::size_t b = 1; b <= 4; ++b) {
    const DepthBucket* f = full.find(b);
    const DepthBucket* o = original.find(b);
    const bool win = f && o && f->metrics.macro_f1 > o->metrics.macro_f1;
    wins += win;
    detail += (detail.empty() ? "" : ", ") + std::string("depth ") + std::to_string(b) + " " +
              (f ? fmt("%.3f", f->metrics.macro_f1) : "-") + " vs " + (o ? fmt("%.3f", o->metrics.macro_f1) : "-");
  }
  return verdict(wins >= 3, std::to_string(wins) + "/4 buckets won: " + detail);
}

}  // namespace

int main() {
  std::printf("converse acceptance (simd backend: %s)\n", std::string(simd::backend_name(simd::active_backend())).c_str());
  std::fflush(stdout);
  DataRuns data;
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    std::optional<double> budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {"adjacency normalization oracle", adjacency_oracle, 10.0},
      {"gradient checks", gradient_checks, 120.0},
      {"receptive field", receptive_field, 30.0},
      {"metric oracle", metric_oracle, std::nullopt},
      {"overfit synthetic corpus", overfit, 300.0},
      {"synthetic signal recovery", signal_recovery, 600.0},
      {"fold integrity", fold_integrity, std::nullopt},
      {"pipeline determinism", pipeline_determinism, std::nullopt},
      {"stance reproduction", [&] { return stance_reproduction(data); }, std::nullopt},
      {"veracity reproduction", [&] { return veracity_reproduction(data); }, std::nullopt},
      {"depth trend", [&] { return depth_trend(data); }, std::nullopt},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (o.status == Status::pass && criteria[i].budget_seconds && secs > *criteria[i].budget_seconds) {
      o = {Status::fail, o.detail + "; over the " + fmt("%.0f", *criteria[i].budget_seconds) + " s budget"};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failures += o.status == Status::fail;
    std::printf("%-4s %2zu %s: %s (%.1f s)\n", tag, i + 1, criteria[i].name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
