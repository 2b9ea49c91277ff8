#pragma once

// Bottom component: BGRU content features per tweet, an L-layer graph
// convolution over the (customized) normalized adjacency, and per-tweet
// stance distributions.

#include <array>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "converse/nn.hpp"
#include "converse/thread_model.hpp"

namespace converse {

struct ContentConfig {
  std::size_t embedding_dim = 200;
  std::size_t content_dim = 200;  // forward and backward halves concatenated
  bool trainable_embeddings = false;
};

struct GcnConfig {
  std::vector<std::size_t> layer_sizes{200, kStanceClasses};
  AdjacencyVariant variant = AdjacencyVariant::customized;
  double dropout = 0.5;
};

// Throws ConfigError on an odd content_dim, an empty layer list or a final
// layer that is not 4 wide.
void validate(const ContentConfig& c);
void validate(const GcnConfig& c);

// Parameters: "embedding" [V, e], "bgru.fw.*", "bgru.bw.*".
void add_content_parameters(ParameterSet& params, const ContentConfig& config,
                            std::size_t vocab_size, std::mt19937_64& rng);
// Parameters: "gcn.<l>.W" [d_{l-1}, d_l], "gcn.<l>.b" [d_l].
void add_gcn_parameters(ParameterSet& params, const GcnConfig& config, std::size_t input_dim,
                        std::mt19937_64& rng);

struct ContentWeights {
  Var embedding;
  GruWeights forward;
  GruWeights backward;
};

struct GcnWeights {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

ContentWeights bind_content(Graph& g, ParameterSet& params);
GcnWeights bind_gcn(Graph& g, ParameterSet& params, const GcnConfig& config);

// Row i is c_i for the i-th tweet (token ids per tweet, chronological).
Var encode_contents(const std::vector<std::vector<std::size_t>>& tweet_tokens,
                    const ContentWeights& w);

struct StanceOutput {
  Var logits;         // [|C|, 4], the unnormalized s_i
  Var distributions;  // [|C|, 4], softmax per row
};

// H(l) = tanh(Â H(l-1) W(l) + b(l)) for every layer, then a row softmax.
// In train mode dropout hits the content input and every layer output
// except the last.
StanceOutput gcn_forward(Var content, const Tensor& normalized_adjacency, const GcnConfig& config,
                         const GcnWeights& w, bool train, std::mt19937_64& rng);

// Sum of cross entropies over tweets that carry a label;
// callers divide by the number of labelled tweets in the batch.
Var stance_loss_sum(const StanceOutput& out, std::span<const std::optional<std::size_t>> labels);
// Mean over labelled tweets; nullopt when no tweet is labelled.
std::optional<Var> stance_loss(const StanceOutput& out,
                               std::span<const std::optional<std::size_t>> labels);

// Argmax with ties going to the earlier class (support, deny, query, comment).
Stance predict_stance(std::span<const double> distribution);

}  // namespace converse
