#include "converse/evaluation.hpp"

#include <algorithm>

#include "converse/error.hpp"

namespace converse {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw DomainError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted, std::size_t count) {
  if (gold >= classes_ || predicted >= classes_) throw LabelError("class index out of range");
  counts_[gold * classes_ + predicted] += count;
  total_ += count;
}

std::size_t ConfusionMatrix::at(std::size_t gold, std::size_t predicted) const {
  if (gold >= classes_ || predicted >= classes_) throw LabelError("class index out of range");
  return counts_[gold * classes_ + predicted];
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw ShapeMismatch("confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  return *this;
}

ConfusionMatrix stance_confusion(std::span<const ThreadPrediction> predictions) {
  ConfusionMatrix m(kStanceClasses);
  for (const auto& p : predictions) {
    for (std::size_t i = 0; i < p.gold_stances.size(); ++i) {
      if (p.gold_stances[i]) {
        m.add(static_cast<std::size_t>(*p.gold_stances[i]), static_cast<std::size_t>(p.stances[i]));
      }
    }
  }
  return m;
}

ConfusionMatrix veracity_confusion(std::span<const ThreadPrediction> predictions) {
  ConfusionMatrix m(kVeracityClasses);
  for (const auto& p : predictions) {
    if (p.gold_veracity) m.add(static_cast<std::size_t>(*p.gold_veracity), static_cast<std::size_t>(p.veracity));
  }
  return m;
}

std::vector<double> per_class_f1(const ConfusionMatrix& m) {
  if (m.total() == 0) throw EmptyEvaluation("no evaluated items");
  const std::size_t k = m.classes();
  std::vector<double> out(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = m.at(c, c), predicted = 0, gold = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += m.at(o, c);
      gold += m.at(c, o);
    }
    const double p = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double r = gold ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
    out[c] = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return out;
}

double macro_f1(const ConfusionMatrix& m) {
  const auto f = per_class_f1(m);
  double total = 0.0;
  for (double v : f) total += v;
  return total / static_cast<double>(f.size());
}

double accuracy(const ConfusionMatrix& m) {
  if (m.total() == 0) throw EmptyEvaluation("no evaluated items");
  std::size_t correct = 0;
  for (std::size_t c = 0; c < m.classes(); ++c) correct += m.at(c, c);
  return static_cast<double>(correct) / static_cast<double>(m.total());
}

MetricSummary summarize(const ConfusionMatrix& m) {
  MetricSummary s;
  s.per_class_f1 = per_class_f1(m);
  s.macro_f1 = macro_f1(m);
  s.accuracy = accuracy(m);
  s.items = m.total();
  return s;
}

std::size_t depth_bucket(std::size_t depth) noexcept { return std::min(depth, kDepthBuckets - 1); }

std::string depth_bucket_label(std::size_t bucket) {
  return bucket >= kDepthBuckets - 1 ? std::to_string(kDepthBuckets - 1) + "+" : std::to_string(bucket);
}

const DepthBucket* DepthBucketReport::find(std::size_t bucket) const {
  for (const auto& b : buckets) {
    if (b.bucket == bucket) return &b;
  }
  return nullptr;
}

DepthBucketReport depth_bucket_eval(std::span<const ThreadPrediction> predictions) {
  std::vector<ConfusionMatrix> per(kDepthBuckets, ConfusionMatrix(kStanceClasses));
  for (const auto& p : predictions) {
    for (std::size_t i = 0; i < p.gold_stances.size(); ++i) {
      if (!p.gold_stances[i]) continue;
      per[depth_bucket(p.depths[i])].add(static_cast<std::size_t>(*p.gold_stances[i]),
                                         static_cast<std::size_t>(p.stances[i]));
    }
  }
  DepthBucketReport report;
  for (std::size_t b = 0; b < kDepthBuckets; ++b) {
    if (per[b].total() == 0) continue;
    report.buckets.push_back({b, depth_bucket_label(b), summarize(per[b])});
  }
  return report;
}

SweepPoint sweep_point(double lambda, std::span<const ThreadPrediction> predictions) {
  const MetricSummary s = summarize(veracity_confusion(predictions));
  SweepPoint p;
  p.lambda = lambda;
  p.macro_f1 = s.macro_f1;
  p.f_false = s.per_class_f1[static_cast<std::size_t>(Veracity::false_rumor)];
  p.f_unverified = s.per_class_f1[static_cast<std::size_t>(Veracity::unverified)];
  p.accuracy = s.accuracy;
  return p;
}

SweepCurve lambda_sweep(const Corpus& corpus, const FoldPlan& plan, std::vector<double> lambdas,
                        const ModelConfig& model_config, const TrainConfig& config, std::size_t jobs,
                        const std::function<void(const SweepPoint&)>& on_point) {
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ConfigError("lambda values must be nonnegative");
  }
  std::sort(lambdas.begin(), lambdas.end());
  SweepCurve curve;
  for (double l : lambdas) {
    TrainConfig c = config;
    c.lambda = l;
    c.mode = TrainMode::joint;
    const auto results = run_fold_plan(corpus, plan, model_config, c, jobs);
    const auto preds = concatenate_predictions(results);
    curve.points.push_back(sweep_point(l, preds));
    if (on_point) on_point(curve.points.back());
  }
  return curve;
}

std::vector<StanceTimeRow> stance_over_time(const Corpus& corpus, std::size_t buckets,
                                            std::optional<std::int64_t> horizon_ms) {
  if (buckets == 0) throw DomainError("need at least one time bucket");
  if (horizon_ms && *horizon_ms <= 0) throw DomainError("horizon must be positive");
  using Counts = std::array<std::size_t, kStanceClasses>;
  std::vector<std::vector<Counts>> counts(kVeracityClasses, std::vector<Counts>(buckets, Counts{}));
  for (const auto& t : corpus.threads) {
    if (!t.veracity || t.tweets.empty()) continue;
    const TreeIndex tree = build_tree(t.tweets);
    const std::int64_t t0 = t.tweets[tree.root].timestamp;
    std::int64_t span = 0;
    if (horizon_ms) {
      span = *horizon_ms;
    } else {
      for (const auto& w : t.tweets) span = std::max(span, w.timestamp - t0);
    }
    for (const auto& w : t.tweets) {
      if (!w.stance) continue;
      std::size_t b = 0;
      const std::int64_t offset = std::max<std::int64_t>(0, w.timestamp - t0);
      if (span > 0) {
        b = static_cast<std::size_t>(static_cast<double>(offset) / static_cast<double>(span) *
                                     static_cast<double>(buckets));
        b = std::min(b, buckets - 1);
      }
      ++counts[static_cast<std::size_t>(*t.veracity)][b][static_cast<std::size_t>(*w.stance)];
    }
  }
  std::vector<StanceTimeRow> rows;
  for (std::size_t v = 0; v < kVeracityClasses; ++v) {
    for (std::size_t b = 0; b < buckets; ++b) {
      std::size_t n = 0;
      for (std::size_t c : counts[v][b]) n += c;
      if (n == 0) continue;
      StanceTimeRow row;
      row.veracity = static_cast<Veracity>(v);
      row.bucket = b;
      row.tweets = n;
      for (std::size_t s = 0; s < kStanceClasses; ++s) {
        row.proportions[s] = static_cast<double>(counts[v][b][s]) / static_cast<double>(n);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace converse
