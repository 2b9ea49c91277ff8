#pragma once

// The full hierarchical model: Conversational-GCN at the bottom feeding the
// stance-aware temporal model on top.

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "converse/checkpoint.hpp"
#include "converse/conversational_gcn.hpp"
#include "converse/nn.hpp"
#include "converse/stance_aware_rnn.hpp"
#include "converse/text.hpp"
#include "converse/thread_model.hpp"

namespace converse {

struct ModelConfig {
  ContentConfig content;
  GcnConfig gcn;
  VeracityConfig veracity;
};

void validate(const ModelConfig& c);
std::string model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const std::string& text);

// Everything a forward pass needs from one thread, in chronological order.
struct PreparedThread {
  std::string thread_id;
  std::vector<std::string> tweet_ids;
  std::vector<std::size_t> depths;
  std::vector<std::vector<std::size_t>> tokens;
  Tensor adjacency;  // normalized per the model's variant
  std::vector<std::optional<std::size_t>> stance_labels;
  std::optional<Veracity> veracity;

  std::size_t size() const noexcept { return tweet_ids.size(); }
  std::size_t labelled_tweets() const;
};

struct ThreadPrediction {
  std::string thread_id;
  std::vector<std::string> tweet_ids;
  std::vector<std::size_t> depths;
  std::vector<std::optional<Stance>> gold_stances;
  std::vector<Stance> stances;
  std::vector<std::array<double, kStanceClasses>> stance_probs;
  std::optional<Veracity> gold_veracity;
  Veracity veracity = Veracity::true_rumor;
  std::array<double, kVeracityClasses> veracity_probs{};
  std::vector<std::size_t> dims_won;  // pooling attribution per tweet
};

class HierarchicalModel {
 public:
  HierarchicalModel(ModelConfig config, Vocabulary vocabulary, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  ParameterSet& parameters() noexcept { return params_; }
  const ParameterSet& parameters() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Copies vectors for every vocabulary token found in the file. Returns the
  // number of rows replaced. Throws ConfigError on a dimension mismatch.
  std::size_t load_embeddings(const EmbeddingFile& file);

  PreparedThread prepare(const ConversationThread& thread) const;

  struct Bound {
    ContentWeights content;
    GcnWeights gcn;
    std::optional<VeracityWeights> veracity;
  };
  Bound bind(Graph& g, bool with_veracity = true);

  struct Forward {
    Var content;
    StanceOutput stance;
    std::optional<VeracityOutput> veracity;
  };
  Forward forward(const Bound& weights, const PreparedThread& thread, bool train,
                  std::mt19937_64& rng) const;

  // Evaluation-mode pass; safe to call concurrently.
  ThreadPrediction predict(const PreparedThread& thread) const;

  CheckpointData to_checkpoint(const OptimizerState* optimizer = nullptr) const;
  // Restores the model and, when requested, the optimizer moments.
  static HierarchicalModel from_checkpoint(const CheckpointData& data,
                                           OptimizerState* optimizer = nullptr);

 private:
  ModelConfig config_;
  Vocabulary vocabulary_;
  std::uint64_t seed_;
  ParameterSet params_;
};

}  // namespace converse
