#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include "converse/config.hpp"
#include "converse/error.hpp"
#include "converse/trainer.hpp"
#include "gradient_suite.hpp"

using namespace converse;
using converse::testing::tiny_setup;

namespace {

Corpus small_corpus(std::size_t threads = 24, std::uint64_t seed = 4) {
  SyntheticSpec spec = default_synthetic_spec();
  spec.n_threads = threads;
  spec.n_events = 3;
  spec.seed = seed;
  Corpus c = generate_synthetic(spec);
  assign_splits(c, 0.15, 0.25, seed);
  return c;
}

ModelConfig small_model() {
  ModelConfig m = profile_config("desk").model;
  m.content.embedding_dim = 8;
  m.content.content_dim = 8;
  m.gcn.layer_sizes = {8, kStanceClasses};
  m.veracity.hidden_size = 8;
  return m;
}

TrainConfig small_train(std::size_t epochs = 3) {
  TrainConfig t = profile_config("desk").train;
  t.max_epochs = epochs;
  return t;
}

bool params_bit_equal(const ParameterSet& a, const ParameterSet& b) {
  for (const auto& [name, p] : a) {
    const Tensor& q = b.at(name).value;
    if (!p.value.same_shape(q) ||
        std::memcmp(p.value.values().data(), q.values().data(), q.values().size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

// Loss terms for the tiny setup's threads, built on graph g.
LossTerms tiny_terms(Graph& g, HierarchicalModel& model, const std::vector<PreparedThread>& threads) {
  LossTerms terms;
  const auto bound = model.bind(g);
  std::mt19937_64 rng(0);
  for (const auto& t : threads) {
    const auto fwd = model.forward(bound, t, false, rng);
    terms.veracity.push_back(veracity_loss(*fwd.veracity, *t.veracity));
    if (t.labelled_tweets() > 0) {
      terms.stance_sums.push_back(stance_loss_sum(fwd.stance, t.stance_labels));
      terms.labelled_tweets += t.labelled_tweets();
    }
  }
  return terms;
}

}  // namespace

TEST(JointLoss, ScalarExamples) {
  EXPECT_DOUBLE_EQ(joint_loss(0.5, 0.3, 1.0), 0.8);
  EXPECT_DOUBLE_EQ(joint_loss(0.5, 0.3, 0.5), 0.65);
  const double v = 0.123456789;
  EXPECT_EQ(joint_loss(v, 7.0, 0.0), v);
  EXPECT_EQ(joint_loss(v, std::nullopt, 1.0), v);
}

TEST(JointLoss, LinearInLambda) {
  auto s = tiny_setup(31);
  auto value = [&](double lambda) {
    Graph g;
    return joint_loss(g, tiny_terms(g, *s.model, s.threads), lambda).value()(0, 0);
  };
  const double l0 = value(0.0), l1 = value(1.0);
  EXPECT_GT(l1, l0);
  for (double lambda : {0.1, 0.25, 0.5, 0.75, 2.0}) {
    EXPECT_NEAR(value(lambda), l0 + lambda * (l1 - l0), 1e-12);
  }
}

TEST(JointLoss, LambdaZeroMatchesVeracityOnlyBitwise) {
  auto s = tiny_setup(32);
  HierarchicalModel& model = *s.model;

  model.parameters().zero_grad();
  double joint_value;
  {
    Graph g;
    Var loss = joint_loss(g, tiny_terms(g, model, s.threads), 0.0);
    joint_value = loss.value()(0, 0);
    g.backward(loss);
  }
  std::map<std::string, Tensor> joint_grads;
  for (const auto& [name, p] : model.parameters()) joint_grads[name] = p.grad;

  model.parameters().zero_grad();
  {
    Graph g;
    LossTerms terms = tiny_terms(g, model, s.threads);
    Var sum = terms.veracity[0];
    for (std::size_t i = 1; i < terms.veracity.size(); ++i) sum = ops::add(sum, terms.veracity[i]);
    Var mean = ops::scale(sum, 1.0 / static_cast<double>(terms.veracity.size()));
    EXPECT_EQ(mean.value()(0, 0), joint_value);
    g.backward(mean);
  }
  for (const auto& [name, p] : model.parameters()) EXPECT_EQ(p.grad, joint_grads.at(name)) << name;
}

TEST(Config, ValidationAndModes) {
  TrainConfig c;
  EXPECT_NO_THROW(validate(c));
  c.lambda = -1;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.learning_rate = 0;
  EXPECT_THROW(validate(c), ConfigError);

  c = {};
  c.lambda = 0.7;
  c.mode = TrainMode::single_task_veracity;
  EXPECT_EQ(effective_lambda(c), 0.0);
  c.mode = TrainMode::joint;
  EXPECT_EQ(effective_lambda(c), 0.7);
  for (auto m : {TrainMode::joint, TrainMode::single_task_veracity, TrainMode::stance_only}) {
    EXPECT_EQ(parse_train_mode(to_string(m)), m);
  }
  EXPECT_FALSE(parse_train_mode("both"));
}

TEST(Train, DeterministicForAFixedSeed) {
  const Corpus c = small_corpus();
  const Fold fold = make_folds(c, FoldScheme::fixed_split).folds.at(0);
  const TrainResult a = train(c, fold, small_model(), small_train());
  const TrainResult b = train(c, fold, small_model(), small_train());
  ASSERT_EQ(a.log.epochs.size(), b.log.epochs.size());
  for (std::size_t e = 0; e < a.log.epochs.size(); ++e) EXPECT_TRUE(a.log.epochs[e].same_values(b.log.epochs[e]));
  EXPECT_EQ(a.log.selected_epoch, b.log.selected_epoch);
  EXPECT_TRUE(params_bit_equal(a.model->parameters(), b.model->parameters()));

  TrainConfig other = small_train();
  other.seed = 8;
  const TrainResult d = train(c, fold, small_model(), other);
  EXPECT_FALSE(params_bit_equal(a.model->parameters(), d.model->parameters()));
}

TEST(Train, LambdaZeroEqualsSingleTask) {
  const Corpus c = small_corpus();
  const Fold fold = make_folds(c, FoldScheme::fixed_split).folds.at(0);
  TrainConfig joint = small_train(2);
  joint.lambda = 0.0;
  TrainConfig single = small_train(2);
  single.mode = TrainMode::single_task_veracity;
  const TrainResult a = train(c, fold, small_model(), joint);
  const TrainResult b = train(c, fold, small_model(), single);
  EXPECT_TRUE(params_bit_equal(a.model->parameters(), b.model->parameters()));
  EXPECT_EQ(predict_threads(*a.model, c, fold.test_ids)[0].veracity_probs,
            predict_threads(*b.model, c, fold.test_ids)[0].veracity_probs);
}

TEST(Train, LogHasOneLinePerEpoch) {
  const Corpus c = small_corpus();
  const Fold fold = make_folds(c, FoldScheme::fixed_split).folds.at(0);
  std::size_t callbacks = 0;
  TrainOptions options;
  options.on_epoch = [&](const EpochLog&) { ++callbacks; };
  options.checkpoint_dir = ::testing::TempDir() + "trainer-ckpt";
  const TrainResult r = train(c, fold, small_model(), small_train(4), options);
  EXPECT_EQ(callbacks, r.log.epochs.size());
  const std::string jsonl = r.log.to_jsonl();
  EXPECT_EQ(static_cast<std::size_t>(std::count(jsonl.begin(), jsonl.end(), '\n')), r.log.epochs.size());
  EXPECT_TRUE(std::filesystem::exists(options.checkpoint_dir / "last.ckpt"));
  for (const auto& e : r.log.epochs) {
    EXPECT_TRUE(e.dev_loss.has_value());
    EXPECT_GT(e.joint_loss, 0.0);
  }
}

TEST(Train, FrozenEmbeddingsStayPut) {
  const Corpus c = small_corpus();
  const Fold fold = make_folds(c, FoldScheme::fixed_split).folds.at(0);
  ModelConfig m = small_model();
  m.content.trainable_embeddings = false;
  TrainConfig t = small_train(2);
  t.select_on_dev = false;
  const TrainResult r = train(c, fold, m, t);
  const HierarchicalModel fresh(m, r.model->vocabulary(), t.seed);
  EXPECT_EQ(r.model->parameters().at("embedding").value, fresh.parameters().at("embedding").value);
  EXPECT_NE(r.model->parameters().at("gcn.0.W").value, fresh.parameters().at("gcn.0.W").value);
}

TEST(Train, StanceOnlyLeavesVeracityHeadUntouched) {
  const Corpus c = small_corpus();
  const Fold fold = make_folds(c, FoldScheme::fixed_split).folds.at(0);
  TrainConfig t = small_train(2);
  t.mode = TrainMode::stance_only;
  const TrainResult r = train(c, fold, small_model(), t);
  const HierarchicalModel fresh(small_model(), r.model->vocabulary(), t.seed);
  EXPECT_EQ(r.model->parameters().at("veracity.fnn.W").value, fresh.parameters().at("veracity.fnn.W").value);
}

TEST(Folds, FixedSplitTrainsOneModel) {
  const Corpus c = small_corpus();
  const auto results = run_fold_plan(c, make_folds(c, FoldScheme::fixed_split), small_model(), small_train(1));
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].predictions.size(), results[0].fold.test_ids.size());
}

TEST(Folds, ParallelJobsMatchSerial) {
  const Corpus c = small_corpus(30, 5);
  const FoldPlan plan = make_folds(c, FoldScheme::leave_one_event_out);
  ASSERT_GE(plan.folds.size(), 2u);
  const auto serial = run_fold_plan(c, plan, small_model(), small_train(1), 1);
  const auto parallel = run_fold_plan(c, plan, small_model(), small_train(1), 3);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t f = 0; f < serial.size(); ++f) {
    EXPECT_EQ(serial[f].fold.name, parallel[f].fold.name);
    EXPECT_TRUE(params_bit_equal(serial[f].model->parameters(), parallel[f].model->parameters()));
  }
  const auto all = concatenate_predictions(serial);
  EXPECT_EQ(all.size(), c.threads.size());
}

TEST(Folds, EmptyFoldIsAnError) {
  const Corpus c = small_corpus();
  FoldPlan plan;
  plan.scheme = FoldScheme::fixed_split;
  Fold f;
  f.name = "empty";
  f.test_ids = {c.threads[0].thread_id};
  plan.folds.push_back(f);
  EXPECT_THROW(run_fold_plan(c, plan, small_model(), small_train(1)), DataError);

  Fold unknown;
  unknown.train_ids = {"nope"};
  unknown.test_ids = {c.threads[0].thread_id};
  EXPECT_THROW(train(c, unknown, small_model(), small_train(1)), DataError);
}

TEST(Train, DivergenceIsReported) {
  const Corpus c = small_corpus();
  const Fold fold = make_folds(c, FoldScheme::fixed_split).folds.at(0);
  // A single non-finite embedding row poisons the first forward pass.
  EmbeddingFile poison;
  poison.tokens = {"s0w0", "s1w0", "s2w0", "s3w0"};
  poison.vectors = Tensor({4, small_model().content.embedding_dim});
  poison.vectors(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainOptions options;
  options.embeddings = &poison;
  EXPECT_THROW(train(c, fold, small_model(), small_train(1), options), DivergenceError);
}
