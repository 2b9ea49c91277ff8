#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "converse/dataset_io.hpp"
#include "converse/model.hpp"
#include "converse/trainer.hpp"

namespace converse {

// Rows are gold labels, columns predictions, in the fixed class order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  void add(std::size_t gold, std::size_t predicted, std::size_t count = 1);
  std::size_t at(std::size_t gold, std::size_t predicted) const;
  std::size_t classes() const noexcept { return classes_; }
  std::size_t total() const noexcept { return total_; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
};

// Labelled tweets only.
ConfusionMatrix stance_confusion(std::span<const ThreadPrediction> predictions);
// Threads with a gold veracity only.
ConfusionMatrix veracity_confusion(std::span<const ThreadPrediction> predictions);

// F1 = 2PR/(P+R), with P, R and F1 taken as 0 whenever a denominator is 0.
// Throws EmptyEvaluation on an empty matrix.
std::vector<double> per_class_f1(const ConfusionMatrix& m);
// Unweighted mean over every class, present or not.
double macro_f1(const ConfusionMatrix& m);
double accuracy(const ConfusionMatrix& m);

struct MetricSummary {
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  double accuracy = 0.0;
  std::size_t items = 0;
};
MetricSummary summarize(const ConfusionMatrix& m);

// ---- depth buckets -----------------------------------------------------------

inline constexpr std::size_t kDepthBuckets = 7;  // 0..5 and 6+
std::size_t depth_bucket(std::size_t depth) noexcept;
std::string depth_bucket_label(std::size_t bucket);

struct DepthBucket {
  std::size_t bucket = 0;
  std::string label;
  MetricSummary metrics;  // over labelled tweets in the bucket
};

struct DepthBucketReport {
  std::vector<DepthBucket> buckets;  // ascending, empty buckets omitted
  const DepthBucket* find(std::size_t bucket) const;
};

DepthBucketReport depth_bucket_eval(std::span<const ThreadPrediction> predictions);

// ---- lambda sweep ------------------------------------------------------------

struct SweepPoint {
  double lambda = 0.0;
  double macro_f1 = 0.0;
  double f_false = 0.0;
  double f_unverified = 0.0;
  double accuracy = 0.0;
};

struct SweepCurve {
  std::vector<SweepPoint> points;  // ascending lambda
};

// One full fold-plan run per lambda; predictions of all folds are pooled
// before scoring. on_point fires as each row completes.
SweepCurve lambda_sweep(const Corpus& corpus, const FoldPlan& plan, std::vector<double> lambdas,
                        const ModelConfig& model_config, const TrainConfig& config,
                        std::size_t jobs = 1,
                        const std::function<void(const SweepPoint&)>& on_point = {});

SweepPoint sweep_point(double lambda, std::span<const ThreadPrediction> predictions);

// ---- stance over time ----------------------------------------------------------

struct StanceTimeRow {
  Veracity veracity = Veracity::true_rumor;
  std::size_t bucket = 0;
  std::size_t tweets = 0;
  std::array<double, kStanceClasses> proportions{};
};

// Labelled tweets binned by time since the thread's source tweet. Without a
// horizon, each thread's lifespan is split into `buckets` equal parts; with
// one, buckets have width horizon/buckets and later tweets fall in the last.
// Empty (veracity, bucket) cells are omitted.
std::vector<StanceTimeRow> stance_over_time(const Corpus& corpus, std::size_t buckets = 8,
                                            std::optional<std::int64_t> horizon_ms = std::nullopt);

}  // namespace converse
