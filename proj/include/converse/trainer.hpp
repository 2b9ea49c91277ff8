#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "converse/dataset_io.hpp"
#include "converse/model.hpp"

namespace converse {

enum class TrainMode { joint, single_task_veracity, stance_only };
std::string_view to_string(TrainMode m);
std::optional<TrainMode> parse_train_mode(std::string_view s);

struct TrainConfig {
  double lambda = 1.0;
  double learning_rate = 0.001;
  std::size_t batch_size = 32;  // threads per batch
  std::size_t max_epochs = 200;
  std::size_t patience = 20;    // epochs without dev-loss improvement; 0 disables
  std::optional<double> dropout = 0.5;  // overrides both components' rates when set
  std::uint64_t seed = 7;
  TrainMode mode = TrainMode::joint;
  double clip_norm = 5.0;       // global gradient norm; <= 0 disables
  bool select_on_dev = true;    // keep the epoch with the best dev veracity macro-F1
};

void validate(const TrainConfig& c);
// single_task_veracity forces lambda to 0.
double effective_lambda(const TrainConfig& c);

// Per-batch loss ingredients.
struct LossTerms {
  std::vector<Var> veracity;     // one cross entropy per thread with a veracity label
  std::vector<Var> stance_sums;  // summed cross entropy per thread with stance labels
  std::size_t labelled_tweets = 0;
};

// mean(veracity) + lambda * (sum(stance_sums) / labelled_tweets). Terms that
// are absent drop out; with lambda = 0 the stance side is not evaluated at
// all, so the result is exactly the veracity mean.
Var joint_loss(Graph& g, const LossTerms& terms, double lambda);
double joint_loss(double veracity_loss, std::optional<double> stance_loss, double lambda);

struct EpochLog {
  std::size_t epoch = 0;
  double joint_loss = 0.0;
  double stance_loss = 0.0;
  double veracity_loss = 0.0;
  // Measured on the training forward passes (dropout active).
  double train_stance_accuracy = 0.0;
  double train_veracity_accuracy = 0.0;
  std::optional<double> dev_loss;
  std::optional<double> dev_macro_f1;
  double seconds = 0.0;

  // Equality ignores wall-clock time.
  bool same_values(const EpochLog& o) const;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::size_t selected_epoch = 0;

  // One JSON object per line, one line per epoch.
  std::string to_jsonl() const;
};

struct TrainOptions {
  const EmbeddingFile* embeddings = nullptr;
  std::filesystem::path checkpoint_dir;  // last.ckpt (and best.ckpt) written each epoch when set
  std::function<void(const EpochLog&)> on_epoch;
  // Vocabulary override; defaults to the tokens of the training threads.
  std::optional<Vocabulary> vocabulary;
};

struct TrainResult {
  std::shared_ptr<HierarchicalModel> model;
  OptimizerState optimizer;
  TrainLog log;
};

// Throws DataError (empty training set, unknown ids) and DivergenceError
// (non-finite loss).
TrainResult train(const Corpus& corpus, const Fold& fold, const ModelConfig& model_config,
                  const TrainConfig& config, const TrainOptions& options = {});

std::vector<ThreadPrediction> predict_threads(const HierarchicalModel& model, const Corpus& corpus,
                                              const std::vector<std::string>& thread_ids);

// Mean eval-mode joint loss over the threads (lambda as configured).
double evaluate_loss(const HierarchicalModel& model, const std::vector<PreparedThread>& threads,
                     double lambda, TrainMode mode);

struct FoldResult {
  Fold fold;
  TrainLog log;
  std::shared_ptr<HierarchicalModel> model;
  std::vector<ThreadPrediction> predictions;  // test threads
};

// Trains one model per fold, with up to `jobs` folds in flight at once.
std::vector<FoldResult> run_fold_plan(const Corpus& corpus, const FoldPlan& plan,
                                      const ModelConfig& model_config, const TrainConfig& config,
                                      std::size_t jobs = 1, const TrainOptions& options = {});

// Test predictions of every fold, in fold order.
std::vector<ThreadPrediction> concatenate_predictions(const std::vector<FoldResult>& results);

}  // namespace converse
