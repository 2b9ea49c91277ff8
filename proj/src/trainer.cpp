#include "converse/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "converse/error.hpp"
#include "converse/evaluation.hpp"

namespace converse {

std::string_view to_string(TrainMode m) {
  switch (m) {
    case TrainMode::joint: return "joint";
    case TrainMode::single_task_veracity: return "single-task";
    case TrainMode::stance_only: return "stance-only";
  }
  return "?";
}

std::optional<TrainMode> parse_train_mode(std::string_view s) {
  for (TrainMode m : {TrainMode::joint, TrainMode::single_task_veracity, TrainMode::stance_only}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

void validate(const TrainConfig& c) {
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw ConfigError("lambda must be a nonnegative number");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (c.max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (c.dropout && !(*c.dropout >= 0.0 && *c.dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
}

double effective_lambda(const TrainConfig& c) {
  return c.mode == TrainMode::single_task_veracity ? 0.0 : c.lambda;
}

Var joint_loss(Graph& g, const LossTerms& terms, double lambda) {
  std::optional<Var> veracity;
  if (!terms.veracity.empty()) {
    veracity = ops::scale(ops::sum_scalars(terms.veracity),
                          1.0 / static_cast<double>(terms.veracity.size()));
  }
  if (lambda == 0.0 || terms.labelled_tweets == 0 || terms.stance_sums.empty()) {
    if (!veracity) return g.constant(Tensor::scalar(0.0));
    return *veracity;
  }
  Var stance = ops::scale(ops::sum_scalars(terms.stance_sums),
                          lambda / static_cast<double>(terms.labelled_tweets));
  if (!veracity) return stance;
  return ops::sum_scalars({*veracity, stance});
}

double joint_loss(double veracity_loss, std::optional<double> stance_loss, double lambda) {
  if (lambda == 0.0 || !stance_loss) return veracity_loss;
  return veracity_loss + lambda * *stance_loss;
}

bool EpochLog::same_values(const EpochLog& o) const {
  return epoch == o.epoch && joint_loss == o.joint_loss && stance_loss == o.stance_loss &&
         veracity_loss == o.veracity_loss && train_stance_accuracy == o.train_stance_accuracy &&
         train_veracity_accuracy == o.train_veracity_accuracy && dev_loss == o.dev_loss &&
         dev_macro_f1 == o.dev_macro_f1;
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["joint_loss"] = e.joint_loss;
    j["stance_loss"] = e.stance_loss;
    j["veracity_loss"] = e.veracity_loss;
    j["train_stance_accuracy"] = e.train_stance_accuracy;
    j["train_veracity_accuracy"] = e.train_veracity_accuracy;
    j["dev_loss"] = e.dev_loss ? nlohmann::ordered_json(*e.dev_loss) : nlohmann::ordered_json(nullptr);
    j["dev_macro_f1"] = e.dev_macro_f1 ? nlohmann::ordered_json(*e.dev_macro_f1) : nlohmann::ordered_json(nullptr);
    j["seconds"] = e.seconds;
    j["selected"] = e.epoch == selected_epoch;
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

std::vector<PreparedThread> prepare_all(const HierarchicalModel& model, const Corpus& corpus,
                                        const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const CorpusThread*> by_id;
  for (const auto& t : corpus.threads) by_id.emplace(t.thread_id, &t);
  std::vector<PreparedThread> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("fold references unknown thread '" + id + "'");
    out.push_back(model.prepare(*it->second));
  }
  return out;
}

Corpus subset(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const CorpusThread*> by_id;
  for (const auto& t : corpus.threads) by_id.emplace(t.thread_id, &t);
  Corpus out;
  out.name = corpus.name;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("fold references unknown thread '" + id + "'");
    out.threads.push_back(*it->second);
  }
  return out;
}

std::vector<std::pair<std::string, Tensor>> snapshot(const ParameterSet& params) {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const auto& [name, p] : params) out.emplace_back(name, p.value);
  return out;
}

void restore(ParameterSet& params, const std::vector<std::pair<std::string, Tensor>>& snap) {
  for (const auto& [name, value] : snap) params.at(name).value = value;
}

}  // namespace

double evaluate_loss(const HierarchicalModel& model, const std::vector<PreparedThread>& threads,
                     double lambda, TrainMode mode) {
  if (threads.empty()) return 0.0;
  double veracity_total = 0.0, stance_total = 0.0;
  std::size_t veracity_count = 0, labelled = 0;
  for (const auto& t : threads) {
    const ThreadPrediction p = model.predict(t);
    if (t.veracity) {
      veracity_total -= std::log(p.veracity_probs[static_cast<std::size_t>(*t.veracity)]);
      ++veracity_count;
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.stance_labels[i]) {
        stance_total -= std::log(p.stance_probs[i][*t.stance_labels[i]]);
        ++labelled;
      }
    }
  }
  const double stance_mean = labelled ? stance_total / static_cast<double>(labelled) : 0.0;
  if (mode == TrainMode::stance_only) return stance_mean;
  const double veracity_mean = veracity_count ? veracity_total / static_cast<double>(veracity_count) : 0.0;
  return joint_loss(veracity_mean, labelled ? std::optional<double>(stance_mean) : std::nullopt, lambda);
}

TrainResult train(const Corpus& corpus, const Fold& fold, const ModelConfig& model_config,
                  const TrainConfig& config, const TrainOptions& options) {
  validate(config);
  if (fold.train_ids.empty()) throw DataError("fold '" + fold.name + "' has an empty training set");
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);

  ModelConfig mc = model_config;
  if (config.dropout) {
    mc.gcn.dropout = *config.dropout;
    mc.veracity.dropout = *config.dropout;
  }
  Vocabulary vocab = options.vocabulary ? *options.vocabulary
                                        : Vocabulary::build(subset(corpus, fold.train_ids));
  auto model = std::make_shared<HierarchicalModel>(mc, std::move(vocab), config.seed);
  if (options.embeddings) model->load_embeddings(*options.embeddings);

  const std::vector<PreparedThread> train_set = prepare_all(*model, corpus, fold.train_ids);
  const std::vector<PreparedThread> dev_set = prepare_all(*model, corpus, fold.dev_ids);

  const double lambda = effective_lambda(config);
  const bool use_veracity = config.mode != TrainMode::stance_only;
  const bool use_stance = config.mode == TrainMode::stance_only || lambda != 0.0;

  OptimizerState optimizer;
  optimizer.config.learning_rate = config.learning_rate;
  std::mt19937_64 order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 dropout_rng(config.seed + 1);

  TrainLog log;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<std::pair<std::string, Tensor>> best;
  double best_f1 = -1.0;
  double best_dev_loss = std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;
  const bool has_dev = !dev_set.empty();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), order_rng);
    double joint_total = 0.0, stance_total = 0.0, veracity_total = 0.0;
    std::size_t batches = 0, labelled_total = 0, veracity_count = 0;
    std::size_t stance_correct = 0, veracity_correct = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      model->parameters().zero_grad();
      Graph g;
      const auto bound = model->bind(g, use_veracity);
      LossTerms terms;
      for (std::size_t k = start; k < stop; ++k) {
        const PreparedThread& t = train_set[order[k]];
        const auto f = model->forward(bound, t, true, dropout_rng);
        const Tensor& dist = f.stance.distributions.value();
        for (std::size_t i = 0; i < t.size(); ++i) {
          if (!t.stance_labels[i]) continue;
          stance_correct += static_cast<std::size_t>(predict_stance(dist.row(i))) == *t.stance_labels[i];
        }
        if (use_stance && t.labelled_tweets() > 0) {
          Var s = stance_loss_sum(f.stance, t.stance_labels);
          stance_total += s.value()[0];
          terms.stance_sums.push_back(s);
          terms.labelled_tweets += t.labelled_tweets();
        }
        labelled_total += t.labelled_tweets();
        if (use_veracity && t.veracity) {
          Var v = veracity_loss(*f.veracity, *t.veracity);
          veracity_total += v.value()[0];
          terms.veracity.push_back(v);
          ++veracity_count;
          veracity_correct += predict_veracity(f.veracity->distribution.value().values()) == *t.veracity;
        }
      }
      if (terms.veracity.empty() && terms.stance_sums.empty()) continue;
      Var loss = config.mode == TrainMode::stance_only
                     ? joint_loss(g, LossTerms{{}, terms.stance_sums, terms.labelled_tweets}, 1.0)
                     : joint_loss(g, terms, lambda);
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch));
      }
      g.backward(loss);
      if (config.clip_norm > 0.0) model->parameters().clip_grad_norm(config.clip_norm);
      try {
        adam_step(model->parameters(), optimizer);
      } catch (const NonFiniteGradient& e) {
        throw DivergenceError(e.what());
      }
      joint_total += value;
      ++batches;
    }

    EpochLog e;
    e.epoch = epoch;
    e.joint_loss = batches ? joint_total / static_cast<double>(batches) : 0.0;
    // stance_total is recorded only when the stance term is optimized.
    std::size_t stance_denominator = 0;
    if (use_stance) {
      for (const auto& t : train_set) stance_denominator += t.labelled_tweets();
    }
    e.stance_loss = stance_denominator ? stance_total / static_cast<double>(stance_denominator) : 0.0;
    e.veracity_loss = veracity_count ? veracity_total / static_cast<double>(veracity_count) : 0.0;
    e.train_stance_accuracy =
        labelled_total ? static_cast<double>(stance_correct) / static_cast<double>(labelled_total) : 0.0;
    e.train_veracity_accuracy =
        veracity_count ? static_cast<double>(veracity_correct) / static_cast<double>(veracity_count) : 0.0;

    bool stop_now = false;
    if (has_dev) {
      e.dev_loss = evaluate_loss(*model, dev_set, lambda, config.mode);
      std::vector<ThreadPrediction> preds;
      for (const auto& t : dev_set) preds.push_back(model->predict(t));
      if (config.mode == TrainMode::stance_only) {
        e.dev_macro_f1 = macro_f1(stance_confusion(preds));
      } else {
        e.dev_macro_f1 = macro_f1(veracity_confusion(preds));
      }
      if (config.select_on_dev && *e.dev_macro_f1 > best_f1) {
        best_f1 = *e.dev_macro_f1;
        best = snapshot(model->parameters());
        log.selected_epoch = epoch;
        if (!options.checkpoint_dir.empty()) {
          save_checkpoint(options.checkpoint_dir / "best.ckpt", model->to_checkpoint(&optimizer));
        }
      }
      if (*e.dev_loss < best_dev_loss) {
        best_dev_loss = *e.dev_loss;
        since_improvement = 0;
      } else if (config.patience > 0 && ++since_improvement >= config.patience) {
        stop_now = true;
      }
    }
    if (!has_dev || !config.select_on_dev) log.selected_epoch = epoch;
    if (!options.checkpoint_dir.empty()) {
      save_checkpoint(options.checkpoint_dir / "last.ckpt", model->to_checkpoint(&optimizer));
    }
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log.epochs.push_back(e);
    if (options.on_epoch) options.on_epoch(e);
    if (stop_now) break;
  }
  if (!best.empty()) restore(model->parameters(), best);
  return {model, optimizer, log};
}

std::vector<ThreadPrediction> predict_threads(const HierarchicalModel& model, const Corpus& corpus,
                                              const std::vector<std::string>& thread_ids) {
  std::vector<ThreadPrediction> out;
  for (const auto& t : prepare_all(model, corpus, thread_ids)) out.push_back(model.predict(t));
  return out;
}

std::vector<FoldResult> run_fold_plan(const Corpus& corpus, const FoldPlan& plan,
                                      const ModelConfig& model_config, const TrainConfig& config,
                                      std::size_t jobs, const TrainOptions& options) {
  for (const auto& f : plan.folds) {
    if (f.train_ids.empty() || f.test_ids.empty()) throw DataError("fold '" + f.name + "' is empty");
  }
  std::vector<FoldResult> results(plan.folds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.folds.size(); i = next++) {
      try {
        TrainOptions fold_options = options;
        if (!options.checkpoint_dir.empty()) {
          fold_options.checkpoint_dir = options.checkpoint_dir / ("fold-" + plan.folds[i].name);
          std::filesystem::create_directories(fold_options.checkpoint_dir);
        }
        TrainResult r = train(corpus, plan.folds[i], model_config, config, fold_options);
        results[i].fold = plan.folds[i];
        results[i].log = std::move(r.log);
        results[i].predictions = predict_threads(*r.model, corpus, plan.folds[i].test_ids);
        results[i].model = std::move(r.model);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = plan.folds.size();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, plan.folds.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<ThreadPrediction> concatenate_predictions(const std::vector<FoldResult>& results) {
  std::vector<ThreadPrediction> out;
  for (const auto& r : results) out.insert(out.end(), r.predictions.begin(), r.predictions.end());
  return out;
}

}  // namespace converse
