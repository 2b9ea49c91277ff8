#include "converse/stance_aware_rnn.hpp"

#include <algorithm>

#include "converse/error.hpp"

namespace converse {

std::string_view to_string(RnnVariant v) {
  switch (v) {
    case RnnVariant::gru: return "gru";
    case RnnVariant::cnn: return "cnn";
    case RnnVariant::none: return "none";
  }
  return "?";
}

std::optional<RnnVariant> parse_rnn_variant(std::string_view s) {
  for (RnnVariant v : {RnnVariant::gru, RnnVariant::cnn, RnnVariant::none}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

void validate(const VeracityConfig& c) {
  if (c.rnn == RnnVariant::gru && c.hidden_size == 0) throw ConfigError("veracity hidden_size must be positive");
  if (c.rnn == RnnVariant::cnn) {
    if (c.cnn_windows.empty() || c.cnn_feature_maps == 0) throw ConfigError("cnn needs windows and feature maps");
    for (std::size_t w : c.cnn_windows) {
      if (w == 0) throw ConfigError("cnn window must be positive");
    }
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("veracity dropout must be in [0, 1)");
}

std::size_t veracity_input_dim(const VeracityConfig& c, std::size_t content_dim) {
  return content_dim + (c.use_stance_features ? kStanceClasses : 0);
}

std::size_t pooled_dim(const VeracityConfig& c, std::size_t content_dim) {
  switch (c.rnn) {
    case RnnVariant::gru: return c.hidden_size;
    case RnnVariant::cnn: return c.cnn_windows.size() * c.cnn_feature_maps;
    case RnnVariant::none: return veracity_input_dim(c, content_dim);
  }
  return 0;
}

void add_veracity_parameters(ParameterSet& params, const VeracityConfig& config,
                             std::size_t content_dim, std::mt19937_64& rng) {
  validate(config);
  const std::size_t in = veracity_input_dim(config, content_dim);
  if (config.rnn == RnnVariant::gru) {
    add_gru_parameters(params, "veracity.gru", in, config.hidden_size, rng);
  } else if (config.rnn == RnnVariant::cnn) {
    for (std::size_t w : config.cnn_windows) {
      const std::string p = "veracity.cnn." + std::to_string(w);
      params.add(p + ".W", glorot_uniform(w * in, config.cnn_feature_maps, rng));
      params.add(p + ".b", Tensor({config.cnn_feature_maps}));
    }
  }
  params.add("veracity.fnn.W", glorot_uniform(pooled_dim(config, content_dim), kVeracityClasses, rng));
  params.add("veracity.fnn.b", Tensor({kVeracityClasses}));
}

VeracityWeights bind_veracity(Graph& g, ParameterSet& params, const VeracityConfig& config) {
  VeracityWeights w;
  if (config.rnn == RnnVariant::gru) {
    w.gru = bind_gru(g, params, "veracity.gru");
  } else if (config.rnn == RnnVariant::cnn) {
    for (std::size_t win : config.cnn_windows) {
      const std::string p = "veracity.cnn." + std::to_string(win);
      w.cnn_weights.push_back(g.parameter(params.at(p + ".W")));
      w.cnn_biases.push_back(g.parameter(params.at(p + ".b")));
    }
  }
  w.fnn_weight = g.parameter(params.at("veracity.fnn.W"));
  w.fnn_bias = g.parameter(params.at("veracity.fnn.b"));
  return w;
}

VeracityOutput veracity_forward(Var content, Var stance_logits, const VeracityConfig& config,
                                const VeracityWeights& w, bool train, std::mt19937_64& rng) {
  const std::size_t n = content.rows();
  if (n == 0) throw EmptySequence("veracity_forward: empty thread");
  if (config.use_stance_features && stance_logits.rows() != n) {
    throw ShapeMismatch("veracity_forward: stance rows do not match content rows");
  }
  Var inputs = config.use_stance_features ? ops::concat_cols(content, stance_logits) : content;

  VeracityOutput out;
  out.tweet_count = n;
  ops::PoolResult pooled;
  switch (config.rnn) {
    case RnnVariant::gru: {
      auto states = gru_sequence(inputs, Direction::forward, w.gru);
      pooled = ops::max_pool_over_time(states);
      break;
    }
    case RnnVariant::none:
      pooled = ops::max_pool_rows(inputs);
      break;
    case RnnVariant::cnn: {
      const std::size_t widest = *std::max_element(config.cnn_windows.begin(), config.cnn_windows.end());
      std::vector<Var> parts;
      for (std::size_t i = 0; i < config.cnn_windows.size(); ++i) {
        Var windows = ops::unfold_windows(inputs, config.cnn_windows[i], widest);
        Var maps = ops::relu(ops::affine(windows, w.cnn_weights[i], w.cnn_biases[i]));
        auto part = ops::max_pool_rows(maps);
        parts.push_back(part.pooled);
        for (std::size_t a : part.argmax) pooled.argmax.push_back(std::min(a, n - 1));
      }
      Var joined = parts.front();
      for (std::size_t i = 1; i < parts.size(); ++i) joined = ops::concat_cols(joined, parts[i]);
      pooled.pooled = joined;
      break;
    }
  }
  out.pooled = pooled.pooled;
  out.argmax = std::move(pooled.argmax);
  Var fnn_in = ops::dropout(out.pooled, config.dropout, train, rng);
  out.logits = ops::affine(fnn_in, w.fnn_weight, w.fnn_bias);
  out.distribution = ops::softmax_rows(out.logits);
  return out;
}

Var veracity_loss(const VeracityOutput& out, Veracity label) {
  Tensor one_hot({kVeracityClasses});
  one_hot[static_cast<std::size_t>(label)] = 1.0;
  return ops::cross_entropy(out.distribution, one_hot);
}

std::vector<std::size_t> pooling_attribution(const VeracityOutput& out) {
  std::vector<std::size_t> counts(out.tweet_count, 0);
  for (std::size_t a : out.argmax) ++counts.at(a);
  return counts;
}

Veracity predict_veracity(std::span<const double> distribution) {
  if (distribution.size() != kVeracityClasses) throw ShapeMismatch("predict_veracity: expected 3 values");
  std::size_t best = 0;
  for (std::size_t k = 1; k < distribution.size(); ++k) {
    if (distribution[k] > distribution[best]) best = k;
  }
  return static_cast<Veracity>(best);
}

}  // namespace converse
