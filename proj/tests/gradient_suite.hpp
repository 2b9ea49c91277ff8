#pragma once

// Finite-difference checks shared by the unit tests and the acceptance
// binary. Each case builds a scalar loss from random parameters.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "converse/model.hpp"
#include "converse/nn.hpp"
#include "converse/ops.hpp"
#include "converse/trainer.hpp"
#include "test_util.hpp"

namespace converse::testing {

inline std::string describe(const GradientCheckReport& r) {
  std::string out = "max relative error " + std::to_string(r.max_relative_error);
  if (!r.failure.empty()) out += " (" + r.failure + ")";
  for (const auto& e : r.entries) {
    if (e.max_relative_error > r.tolerance) {
      out += "\n  " + e.name + "[" + std::to_string(e.worst_index) + "]: analytic " + std::to_string(e.analytic * 1e6) + "e-6" +
             " numeric " + std::to_string(e.numeric * 1e6) + "e-6" + " rel " + std::to_string(e.max_relative_error);
    }
  }
  return out;
}

struct GradientCase {
  std::string name;
  GradientCheckReport report;
};

// Weighted sum so that every output element gets a distinct upstream gradient.
inline Var weighted_sum(Var y, std::mt19937_64& rng) {
  Graph& g = *y.graph();
  return ops::sum(ops::mul(y, g.constant(random_tensor(y.rows(), y.cols(), rng))));
}

// Values bounded away from zero so relu and max-pool stay off their kinks.
inline Tensor away_from_zero(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  Tensor t = random_tensor(r, c, rng);
  for (auto& v : t.values()) v += v >= 0 ? 0.1 : -0.1;
  return t;
}

inline std::vector<GradientCase> kernel_gradient_cases(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradientCase> out;
  auto dim = [&] { return 1 + static_cast<std::size_t>(rng() % 4); };
  const std::size_t n = dim(), k = dim(), m = dim();

  auto run = [&](const std::string& name, ParameterSet& ps, const std::function<Var(Graph&, ParameterSet&)>& f) {
    const std::uint64_t weights_seed = rng();
    LossBuilder loss = [&, weights_seed](Graph& g, ParameterSet& p) {
      std::mt19937_64 w(weights_seed);
      return weighted_sum(f(g, p), w);
    };
    out.push_back({name, gradient_check(loss, ps)});
  };
  auto bind = [](Graph& g, ParameterSet& p, const char* name) { return g.parameter(p.at(name)); };

  {
    ParameterSet ps;
    ps.add("a", random_tensor(n, k, rng));
    ps.add("b", random_tensor(k, m, rng));
    run("matmul", ps, [&](Graph& g, ParameterSet& p) { return ops::matmul(bind(g, p, "a"), bind(g, p, "b")); });
  }
  {
    ParameterSet ps;
    ps.add("x", random_tensor(n, k, rng));
    ps.add("w", random_tensor(k, m, rng));
    ps.add("b", random_tensor(1, m, rng));
    run("affine", ps, [&](Graph& g, ParameterSet& p) {
      return ops::affine(bind(g, p, "x"), bind(g, p, "w"), bind(g, p, "b"));
    });
  }
  {
    ParameterSet ps;
    ps.add("a", random_tensor(n, k, rng));
    ps.add("b", random_tensor(n, k, rng));
    ps.add("r", random_tensor(1, k, rng));
    run("add/sub/mul/add_row", ps, [&](Graph& g, ParameterSet& p) {
      Var a = bind(g, p, "a"), b = bind(g, p, "b");
      return ops::add_row(ops::mul(ops::add(a, b), ops::sub(a, b)), bind(g, p, "r"));
    });
  }
  {
    ParameterSet ps;
    ps.add("a", random_tensor(n, k, rng));
    run("scale/one_minus", ps, [&](Graph& g, ParameterSet& p) {
      return ops::one_minus(ops::scale(bind(g, p, "a"), -1.7));
    });
  }
  {
    ParameterSet ps;
    ps.add("a", random_tensor(n, k, rng, 2.0));
    run("tanh", ps, [&](Graph& g, ParameterSet& p) { return ops::tanh(bind(g, p, "a")); });
    run("sigmoid", ps, [&](Graph& g, ParameterSet& p) { return ops::sigmoid(bind(g, p, "a")); });
    run("softmax_rows", ps, [&](Graph& g, ParameterSet& p) { return ops::softmax_rows(bind(g, p, "a")); });
  }
  {
    ParameterSet ps;
    ps.add("a", away_from_zero(n, k, rng));
    run("relu", ps, [&](Graph& g, ParameterSet& p) { return ops::relu(bind(g, p, "a")); });
    run("max_pool_rows", ps, [&](Graph& g, ParameterSet& p) { return ops::max_pool_rows(bind(g, p, "a")).pooled; });
  }
  {
    ParameterSet ps;
    ps.add("table", random_tensor(5, k, rng));
    ps.add("b", random_tensor(3, m, rng));
    run("gather_rows/row/concat/stack", ps, [&](Graph& g, ParameterSet& p) {
      const std::vector<std::size_t> idx{4, 0, 4};
      Var t = ops::gather_rows(bind(g, p, "table"), idx);
      Var c = ops::concat_cols(t, bind(g, p, "b"));
      return ops::stack_rows({ops::row(c, 2), ops::row(c, 0), ops::row(c, 2)});
    });
  }
  {
    ParameterSet ps;
    ps.add("a", random_tensor(n, k, rng));
    ps.add("b", random_tensor(1, 1, rng));
    run("sum/sum_scalars", ps, [&](Graph& g, ParameterSet& p) {
      Var s = ops::sum(bind(g, p, "a"));
      return ops::sum_scalars({s, bind(g, p, "b"), s});
    });
  }
  {
    ParameterSet ps;
    ps.add("a", random_tensor(n + 2, k, rng));
    const std::uint64_t mask_seed = rng();
    run("dropout", ps, [&, mask_seed](Graph& g, ParameterSet& p) {
      std::mt19937_64 mask(mask_seed);
      return ops::dropout(bind(g, p, "a"), 0.4, true, mask);
    });
  }
  {
    ParameterSet ps;
    ps.add("a", random_tensor(n, k, rng));
    run("unfold_windows", ps, [&](Graph& g, ParameterSet& p) { return ops::unfold_windows(bind(g, p, "a"), 3, 4); });
  }
  {
    ParameterSet ps;
    ps.add("a", random_tensor(1, 4, rng));
    Tensor one_hot({1, 4});
    one_hot[rng() % 4] = 1.0;
    out.push_back({"cross_entropy", gradient_check(
                                        [&, one_hot](Graph& g, ParameterSet& p) {
                                          return ops::cross_entropy(ops::softmax_rows(bind(g, p, "a")), one_hot);
                                        },
                                        ps)});
  }
  {
    ParameterSet ps;
    ps.add("a", random_tensor(n + 1, 4, rng));
    std::vector<std::optional<std::size_t>> labels(n + 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i % 2 == 0) labels[i] = rng() % 4;
    }
    out.push_back({"cross_entropy_rows", gradient_check(
                                             [&, labels](Graph& g, ParameterSet& p) {
                                               return ops::cross_entropy_rows(ops::softmax_rows(bind(g, p, "a")),
                                                                              labels);
                                             },
                                             ps)});
  }
  {
    ParameterSet ps;
    add_gru_parameters(ps, "fw", k, m, rng);
    add_gru_parameters(ps, "bw", k, m, rng);
    for (auto& [name, p] : ps) {
      if (name.find(".b_") != std::string::npos) p.value = random_tensor(1, m, rng);
    }
    ps.add("x", random_tensor(n + 1, k, rng));
    ps.add("h0", random_tensor(1, m, rng));
    run("gru_cell", ps, [&](Graph& g, ParameterSet& p) {
      const GruWeights w = bind_gru(g, p, "fw");
      return gru_cell(ops::row(bind(g, p, "x"), 0), bind(g, p, "h0"), w);
    });
    run("gru_sequence", ps, [&](Graph& g, ParameterSet& p) {
      const GruWeights w = bind_gru(g, p, "bw");
      return ops::stack_rows(gru_sequence(bind(g, p, "x"), Direction::backward, w));
    });
    run("bigru_encode", ps, [&](Graph& g, ParameterSet& p) {
      return bigru_encode(bind(g, p, "x"), bind_gru(g, p, "fw"), bind_gru(g, p, "bw"));
    });
  }
  return out;
}

// A small model on random threads of at most 6 tweets with 8-dim embeddings.
struct TinySetup {
  Corpus corpus;
  std::unique_ptr<HierarchicalModel> model;
  std::vector<PreparedThread> threads;
};

inline TinySetup tiny_setup(std::uint64_t seed, RnnVariant rnn = RnnVariant::gru,
                            AdjacencyVariant variant = AdjacencyVariant::customized) {
  std::mt19937_64 rng(seed);
  TinySetup s;
  const char* words[] = {"yes", "no", "why", "fake", "true", "lol", "source", "news"};
  for (int t = 0; t < 2; ++t) {
    CorpusThread th;
    static_cast<ConversationThread&>(th) = make_thread(random_parents(2 + rng() % 5, rng), "th" + std::to_string(t));
    for (auto& w : th.tweets) {
      w.text = std::string(words[rng() % 8]) + " " + words[rng() % 8] + " " + w.id + th.thread_id;
      if (rng() % 3 != 0) w.stance = static_cast<Stance>(rng() % 4);
    }
    th.tweets[0].stance = Stance::support;
    th.veracity = static_cast<Veracity>(rng() % 3);
    s.corpus.threads.push_back(th);
  }
  s.corpus.reindex();
  ModelConfig mc;
  mc.content = {8, 6, true};
  mc.gcn.layer_sizes = {5, kStanceClasses};
  mc.gcn.variant = variant;
  mc.gcn.dropout = 0.0;
  mc.veracity.rnn = rnn;
  mc.veracity.hidden_size = 5;
  mc.veracity.cnn_feature_maps = 3;
  mc.veracity.dropout = 0.0;
  s.model = std::make_unique<HierarchicalModel>(mc, Vocabulary::build(s.corpus), seed);
  for (const auto& t : s.corpus.threads) s.threads.push_back(s.model->prepare(t));
  return s;
}

inline GradientCheckReport stance_loss_check(std::uint64_t seed) {
  TinySetup s = tiny_setup(seed);
  HierarchicalModel& model = *s.model;
  const PreparedThread thread = s.threads[0];
  LossBuilder loss = [&](Graph& g, ParameterSet&) {
    std::mt19937_64 rng(0);
    const auto bound = model.bind(g, false);
    const auto f = model.forward(bound, thread, false, rng);
    auto l = stance_loss(f.stance, thread.stance_labels);
    return l ? *l : g.constant(Tensor::scalar(0.0));
  };
  std::vector<std::string> only;
  for (const auto& [name, p] : model.parameters()) {
    if (name.rfind("veracity.", 0) != 0) only.push_back(name);
  }
  return gradient_check(loss, model.parameters(), 1e-4, 1e-4, only);
}

inline GradientCheckReport joint_loss_check(std::uint64_t seed, RnnVariant rnn = RnnVariant::gru) {
  TinySetup s = tiny_setup(seed, rnn);
  HierarchicalModel& model = *s.model;
  LossBuilder loss = [&](Graph& g, ParameterSet&) {
    std::mt19937_64 rng(0);
    const auto bound = model.bind(g, true);
    LossTerms terms;
    for (const auto& t : s.threads) {
      const auto f = model.forward(bound, t, false, rng);
      if (t.labelled_tweets() > 0) {
        terms.stance_sums.push_back(stance_loss_sum(f.stance, t.stance_labels));
        terms.labelled_tweets += t.labelled_tweets();
      }
      terms.veracity.push_back(veracity_loss(*f.veracity, *t.veracity));
    }
    return joint_loss(g, terms, 1.0);
  };
  return gradient_check(loss, model.parameters(), 1e-4, 1e-4);
}

}  // namespace converse::testing
