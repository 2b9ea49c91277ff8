#pragma once

// Top component: a GRU over the chronological [c_i; s_i] sequence, max-pooled
// over time, then a single affine layer and softmax over the veracity
// classes. The cnn and none variants replace the temporal model for ablation.

#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "converse/nn.hpp"
#include "converse/thread_model.hpp"

namespace converse {

enum class RnnVariant { gru, cnn, none };
std::string_view to_string(RnnVariant v);
std::optional<RnnVariant> parse_rnn_variant(std::string_view s);

struct VeracityConfig {
  RnnVariant rnn = RnnVariant::gru;
  bool use_stance_features = true;
  std::size_t hidden_size = 100;
  std::vector<std::size_t> cnn_windows{2, 3, 4};
  std::size_t cnn_feature_maps = 100;
  double dropout = 0.5;  // on the FNN input
};

void validate(const VeracityConfig& c);

std::size_t veracity_input_dim(const VeracityConfig& c, std::size_t content_dim);
// Size of the pooled vector v fed to the FNN.
std::size_t pooled_dim(const VeracityConfig& c, std::size_t content_dim);

// Parameters: "veracity.gru.*" or "veracity.cnn.<w>.W/b", and "veracity.fnn.W/b".
void add_veracity_parameters(ParameterSet& params, const VeracityConfig& config,
                             std::size_t content_dim, std::mt19937_64& rng);

struct VeracityWeights {
  GruWeights gru;
  std::vector<Var> cnn_weights;
  std::vector<Var> cnn_biases;
  Var fnn_weight;
  Var fnn_bias;
};

VeracityWeights bind_veracity(Graph& g, ParameterSet& params, const VeracityConfig& config);

struct VeracityOutput {
  Var logits;        // [1, 3]
  Var distribution;  // [1, 3]
  Var pooled;        // [1, pooled_dim]
  // Per pooled dimension, the chronological tweet index that attained the
  // maximum (earliest on ties). For the cnn variant this is the first tweet
  // of the winning window.
  std::vector<std::size_t> argmax;
  std::size_t tweet_count = 0;
};

// content: [|C|, d] chronological; stance_logits: [|C|, 4], unnormalized.
VeracityOutput veracity_forward(Var content, Var stance_logits, const VeracityConfig& config,
                                const VeracityWeights& w, bool train, std::mt19937_64& rng);

Var veracity_loss(const VeracityOutput& out, Veracity label);

// Count of pooled dimensions won by each tweet; sums to pooled_dim.
std::vector<std::size_t> pooling_attribution(const VeracityOutput& out);

Veracity predict_veracity(std::span<const double> distribution);

}  // namespace converse
