#include "converse/model.hpp"

#include <json.hpp>

#include "converse/error.hpp"

namespace converse {

using json = nlohmann::ordered_json;

void validate(const ModelConfig& c) {
  validate(c.content);
  validate(c.gcn);
  validate(c.veracity);
}

namespace {

json config_json(const ModelConfig& c) {
  json j;
  j["content"] = {{"embedding_dim", c.content.embedding_dim},
                  {"content_dim", c.content.content_dim},
                  {"trainable_embeddings", c.content.trainable_embeddings}};
  j["gcn"] = {{"layer_sizes", c.gcn.layer_sizes},
              {"variant", std::string(to_string(c.gcn.variant))},
              {"dropout", c.gcn.dropout}};
  j["veracity"] = {{"rnn", std::string(to_string(c.veracity.rnn))},
                   {"use_stance_features", c.veracity.use_stance_features},
                   {"hidden_size", c.veracity.hidden_size},
                   {"cnn_windows", c.veracity.cnn_windows},
                   {"cnn_feature_maps", c.veracity.cnn_feature_maps},
                   {"dropout", c.veracity.dropout}};
  return j;
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  try {
    const json& ct = j.at("content");
    c.content.embedding_dim = ct.at("embedding_dim").get<std::size_t>();
    c.content.content_dim = ct.at("content_dim").get<std::size_t>();
    c.content.trainable_embeddings = ct.at("trainable_embeddings").get<bool>();
    const json& gc = j.at("gcn");
    c.gcn.layer_sizes = gc.at("layer_sizes").get<std::vector<std::size_t>>();
    auto variant = parse_adjacency_variant(gc.at("variant").get<std::string>());
    if (!variant) throw ConfigError("bad gcn variant");
    c.gcn.variant = *variant;
    c.gcn.dropout = gc.at("dropout").get<double>();
    const json& vc = j.at("veracity");
    auto rnn = parse_rnn_variant(vc.at("rnn").get<std::string>());
    if (!rnn) throw ConfigError("bad rnn variant");
    c.veracity.rnn = *rnn;
    c.veracity.use_stance_features = vc.at("use_stance_features").get<bool>();
    c.veracity.hidden_size = vc.at("hidden_size").get<std::size_t>();
    c.veracity.cnn_windows = vc.at("cnn_windows").get<std::vector<std::size_t>>();
    c.veracity.cnn_feature_maps = vc.at("cnn_feature_maps").get<std::size_t>();
    c.veracity.dropout = vc.at("dropout").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  validate(c);
  return c;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& c) { return config_json(c).dump(); }

ModelConfig model_config_from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

std::size_t PreparedThread::labelled_tweets() const {
  std::size_t n = 0;
  for (const auto& l : stance_labels) n += l.has_value();
  return n;
}

HierarchicalModel::HierarchicalModel(ModelConfig config, Vocabulary vocabulary, std::uint64_t seed)
    : config_(std::move(config)), vocabulary_(std::move(vocabulary)), seed_(seed) {
  validate(config_);
  std::mt19937_64 rng(seed_);
  add_content_parameters(params_, config_.content, vocabulary_.size(), rng);
  add_gcn_parameters(params_, config_.gcn, config_.content.content_dim, rng);
  add_veracity_parameters(params_, config_.veracity, config_.content.content_dim, rng);
}

std::size_t HierarchicalModel::load_embeddings(const EmbeddingFile& file) {
  Tensor& table = params_.at("embedding").value;
  if (file.vectors.cols() != table.cols()) {
    throw ConfigError("embedding file has dimension " + std::to_string(file.vectors.cols()) +
                      ", model expects " + std::to_string(table.cols()));
  }
  std::size_t replaced = 0;
  for (std::size_t i = 0; i < file.tokens.size(); ++i) {
    if (auto id = vocabulary_.find(file.tokens[i])) {
      auto src = file.vectors.row(i);
      std::copy(src.begin(), src.end(), table.row(*id).begin());
      ++replaced;
    }
  }
  return replaced;
}

PreparedThread HierarchicalModel::prepare(const ConversationThread& thread) const {
  const ThreadStructure s = analyze(thread);
  PreparedThread p;
  p.thread_id = thread.thread_id;
  p.veracity = thread.veracity;
  p.depths = s.depth;
  for (std::size_t pos : s.order) {
    const Tweet& t = thread.tweets[pos];
    p.tweet_ids.push_back(t.id);
    p.tokens.push_back(vocabulary_.encode(t.text));
    p.stance_labels.push_back(t.stance ? std::optional<std::size_t>(static_cast<std::size_t>(*t.stance))
                                       : std::nullopt);
  }
  p.adjacency = normalize(adjacency(thread), config_.gcn.variant).entries;
  return p;
}

HierarchicalModel::Bound HierarchicalModel::bind(Graph& g, bool with_veracity) {
  Bound b{bind_content(g, params_), bind_gcn(g, params_, config_.gcn), std::nullopt};
  if (with_veracity) b.veracity = bind_veracity(g, params_, config_.veracity);
  return b;
}

HierarchicalModel::Forward HierarchicalModel::forward(const Bound& weights,
                                                      const PreparedThread& thread, bool train,
                                                      std::mt19937_64& rng) const {
  Forward f;
  f.content = encode_contents(thread.tokens, weights.content);
  f.stance = gcn_forward(f.content, thread.adjacency, config_.gcn, weights.gcn, train, rng);
  if (weights.veracity) {
    f.veracity = veracity_forward(f.content, f.stance.logits, config_.veracity, *weights.veracity,
                                  train, rng);
  }
  return f;
}

ThreadPrediction HierarchicalModel::predict(const PreparedThread& thread) const {
  // A non-recording graph binds parameters by value and never writes back.
  auto& params = const_cast<HierarchicalModel*>(this)->params_;
  Graph g(false);
  Bound b{bind_content(g, params), bind_gcn(g, params, config_.gcn),
          bind_veracity(g, params, config_.veracity)};
  std::mt19937_64 rng(0);
  const Forward f = forward(b, thread, false, rng);

  ThreadPrediction out;
  out.thread_id = thread.thread_id;
  out.tweet_ids = thread.tweet_ids;
  out.depths = thread.depths;
  out.gold_veracity = thread.veracity;
  const Tensor& dist = f.stance.distributions.value();
  for (std::size_t i = 0; i < thread.size(); ++i) {
    std::array<double, kStanceClasses> p{};
    std::copy(dist.row(i).begin(), dist.row(i).end(), p.begin());
    out.stance_probs.push_back(p);
    out.stances.push_back(predict_stance(p));
    out.gold_stances.push_back(thread.stance_labels[i]
                                   ? std::optional<Stance>(static_cast<Stance>(*thread.stance_labels[i]))
                                   : std::nullopt);
  }
  const Tensor& vd = f.veracity->distribution.value();
  std::copy(vd.values().begin(), vd.values().end(), out.veracity_probs.begin());
  out.veracity = predict_veracity(out.veracity_probs);
  out.dims_won = pooling_attribution(*f.veracity);
  return out;
}

CheckpointData HierarchicalModel::to_checkpoint(const OptimizerState* optimizer) const {
  CheckpointData data;
  data.seed = seed_;
  json meta;
  meta["model"] = config_json(config_);
  meta["vocabulary"] = vocabulary_.tokens();
  if (optimizer) {
    const AdamConfig& a = optimizer->config;
    meta["adam"] = {{"learning_rate", a.learning_rate}, {"beta1", a.beta1}, {"beta2", a.beta2},
                    {"epsilon", a.epsilon}};
    data.step = optimizer->step;
  }
  data.metadata_json = meta.dump();
  for (const auto& [name, p] : params_) data.tensors.emplace_back("param/" + name, p.value);
  if (optimizer) {
    for (const auto& [name, m] : optimizer->first_moment) data.tensors.emplace_back("adam.m/" + name, m);
    for (const auto& [name, v] : optimizer->second_moment) data.tensors.emplace_back("adam.v/" + name, v);
  }
  return data;
}

HierarchicalModel HierarchicalModel::from_checkpoint(const CheckpointData& data,
                                                     OptimizerState* optimizer) {
  json meta;
  try {
    meta = json::parse(data.metadata_json);
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint metadata: ") + e.what());
  }
  ModelConfig config = config_from(meta.at("model"));
  std::vector<std::string> tokens = meta.at("vocabulary").get<std::vector<std::string>>();
  Vocabulary vocab = Vocabulary::from_tokens(tokens);
  if (vocab.size() != tokens.size()) throw IoError("checkpoint vocabulary has duplicate tokens");
  HierarchicalModel model(std::move(config), std::move(vocab), data.seed);
  std::size_t restored = 0;
  for (const auto& [name, t] : data.tensors) {
    if (name.rfind("param/", 0) == 0) {
      Parameter& p = model.params_.at(name.substr(6));
      if (!p.value.same_shape(t)) throw IoError("checkpoint shape mismatch for " + name);
      p.value = t;
      p.value.set_requires_grad(true);
      ++restored;
    } else if (optimizer && name.rfind("adam.m/", 0) == 0) {
      optimizer->first_moment[name.substr(7)] = t;
    } else if (optimizer && name.rfind("adam.v/", 0) == 0) {
      optimizer->second_moment[name.substr(7)] = t;
    }
  }
  if (restored != model.params_.size()) throw IoError("checkpoint is missing parameters");
  if (optimizer) {
    optimizer->step = data.step;
    if (auto it = meta.find("adam"); it != meta.end()) {
      optimizer->config.learning_rate = it->at("learning_rate").get<double>();
      optimizer->config.beta1 = it->at("beta1").get<double>();
      optimizer->config.beta2 = it->at("beta2").get<double>();
      optimizer->config.epsilon = it->at("epsilon").get<double>();
    }
  }
  return model;
}

}  // namespace converse
