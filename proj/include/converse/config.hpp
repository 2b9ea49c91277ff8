#pragma once

// Run configuration in INI form:
//
//   [train]     lambda, learning_rate, batch_size, max_epochs, patience,
//               dropout, seed, mode, clip_norm, select_on_dev
//   [content]   embedding_dim, content_dim, trainable_embeddings
//   [gcn]       layer_sizes (comma list), variant
//   [veracity]  rnn, use_stance_features, hidden_size, cnn_windows, cnn_feature_maps
//
// Unknown sections or keys are errors.

#include <filesystem>
#include <string>
#include <string_view>

#include "converse/model.hpp"
#include "converse/trainer.hpp"

namespace converse {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

// semeval (lr 0.001), pheme (lr 0.005), and desk: a reduced-width model for
// single-core runs on synthetic data.
RunConfig profile_config(std::string_view name);

// Keys present in the text override `base`. Throws ConfigError.
RunConfig parse_run_config(const std::string& ini_text, const RunConfig& base = {});
RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base = {});
std::string run_config_to_ini(const RunConfig& c);

}  // namespace converse
