#include "converse/conversational_gcn.hpp"

#include "converse/error.hpp"

namespace converse {

void validate(const ContentConfig& c) {
  if (c.embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (c.content_dim == 0 || c.content_dim % 2 != 0) {
    throw ConfigError("content_dim must be a positive even number");
  }
}

void validate(const GcnConfig& c) {
  if (c.layer_sizes.empty()) throw ConfigError("gcn needs at least one layer");
  if (c.layer_sizes.back() != kStanceClasses) throw ConfigError("last gcn layer must have 4 outputs");
  for (std::size_t s : c.layer_sizes) {
    if (s == 0) throw ConfigError("gcn layer sizes must be positive");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("gcn dropout must be in [0, 1)");
}

void add_content_parameters(ParameterSet& params, const ContentConfig& config,
                            std::size_t vocab_size, std::mt19937_64& rng) {
  validate(config);
  params.add("embedding", uniform_tensor({vocab_size, config.embedding_dim}, 0.5, rng),
             config.trainable_embeddings);
  add_gru_parameters(params, "bgru.fw", config.embedding_dim, config.content_dim / 2, rng);
  add_gru_parameters(params, "bgru.bw", config.embedding_dim, config.content_dim / 2, rng);
}

void add_gcn_parameters(ParameterSet& params, const GcnConfig& config, std::size_t input_dim,
                        std::mt19937_64& rng) {
  validate(config);
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < config.layer_sizes.size(); ++l) {
    const std::size_t out = config.layer_sizes[l];
    params.add("gcn." + std::to_string(l) + ".W", glorot_uniform(in, out, rng));
    params.add("gcn." + std::to_string(l) + ".b", Tensor({out}));
    in = out;
  }
}

ContentWeights bind_content(Graph& g, ParameterSet& params) {
  return {g.parameter(params.at("embedding")), bind_gru(g, params, "bgru.fw"),
          bind_gru(g, params, "bgru.bw")};
}

GcnWeights bind_gcn(Graph& g, ParameterSet& params, const GcnConfig& config) {
  GcnWeights w;
  for (std::size_t l = 0; l < config.layer_sizes.size(); ++l) {
    w.weights.push_back(g.parameter(params.at("gcn." + std::to_string(l) + ".W")));
    w.biases.push_back(g.parameter(params.at("gcn." + std::to_string(l) + ".b")));
  }
  return w;
}

Var encode_contents(const std::vector<std::vector<std::size_t>>& tweet_tokens,
                    const ContentWeights& w) {
  if (tweet_tokens.empty()) throw EmptySequence("encode_contents: thread has no tweets");
  std::vector<Var> rows;
  rows.reserve(tweet_tokens.size());
  for (const auto& tokens : tweet_tokens) {
    if (tokens.empty()) throw EmptySequence("encode_contents: tweet without tokens");
    Var embedded = ops::gather_rows(w.embedding, tokens);
    rows.push_back(bigru_encode(embedded, w.forward, w.backward));
  }
  return ops::stack_rows(rows);
}

StanceOutput gcn_forward(Var content, const Tensor& normalized_adjacency, const GcnConfig& config,
                         const GcnWeights& w, bool train, std::mt19937_64& rng) {
  Graph& g = *content.graph();
  const std::size_t n = g.value(content).rows();
  if (normalized_adjacency.rows() != n || normalized_adjacency.cols() != n) {
    throw ShapeMismatch("gcn_forward: adjacency is " + std::to_string(normalized_adjacency.rows()) +
                        "x" + std::to_string(normalized_adjacency.cols()) + " for " +
                        std::to_string(n) + " tweets");
  }
  if (w.weights.size() != config.layer_sizes.size()) throw ShapeMismatch("gcn_forward: layer count mismatch");
  Var adj = g.constant(normalized_adjacency);
  Var h = ops::dropout(content, config.dropout, train, rng);
  const std::size_t layers = w.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    // (Â H) W keeps row i of the product independent of rows outside i's receptive field.
    h = ops::tanh(ops::affine(ops::matmul(adj, h), w.weights[l], w.biases[l]));
    if (l + 1 < layers) h = ops::dropout(h, config.dropout, train, rng);
  }
  return {h, ops::softmax_rows(h)};
}

Var stance_loss_sum(const StanceOutput& out, std::span<const std::optional<std::size_t>> labels) {
  return ops::cross_entropy_rows(out.distributions, labels);
}

std::optional<Var> stance_loss(const StanceOutput& out,
                               std::span<const std::optional<std::size_t>> labels) {
  std::size_t labelled = 0;
  for (const auto& l : labels) labelled += l.has_value();
  if (labelled == 0) return std::nullopt;
  return ops::scale(stance_loss_sum(out, labels), 1.0 / static_cast<double>(labelled));
}

Stance predict_stance(std::span<const double> distribution) {
  if (distribution.size() != kStanceClasses) throw ShapeMismatch("predict_stance: expected 4 values");
  std::size_t best = 0;
  for (std::size_t k = 1; k < distribution.size(); ++k) {
    if (distribution[k] > distribution[best]) best = k;
  }
  return static_cast<Stance>(best);
}

}  // namespace converse
