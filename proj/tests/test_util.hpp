#pragma once

#include <random>
#include <string>
#include <vector>

#include "converse/dataset_io.hpp"
#include "converse/thread_model.hpp"

namespace converse::testing {

// parents[i] < i, or -1 for the root. Tweet i is "t<i>" with timestamp i.
inline ConversationThread make_thread(const std::vector<int>& parents, const std::string& id = "th") {
  ConversationThread t;
  t.thread_id = id;
  t.event = "e";
  for (std::size_t i = 0; i < parents.size(); ++i) {
    Tweet w;
    w.id = "t" + std::to_string(i);
    if (parents[i] >= 0) w.parent_id = "t" + std::to_string(parents[i]);
    w.timestamp = static_cast<std::int64_t>(i);
    w.text = "tweet " + std::to_string(i);
    t.tweets.push_back(w);
  }
  return t;
}

inline std::vector<int> random_parents(std::size_t n, std::mt19937_64& rng) {
  std::vector<int> p(n, -1);
  for (std::size_t i = 1; i < n; ++i) {
    p[i] = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng));
  }
  return p;
}

inline Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t({rows, cols});
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// Hop distance between every pair of nodes in the undirected tree.
inline std::vector<std::vector<int>> hop_distances(const std::vector<int>& parents) {
  const std::size_t n = parents.size();
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (parents[i] >= 0) {
      nb[i].push_back(static_cast<std::size_t>(parents[i]));
      nb[static_cast<std::size_t>(parents[i])].push_back(i);
    }
  }
  std::vector<std::vector<int>> d(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> queue{s};
    d[s][s] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      for (std::size_t v : nb[queue[q]]) {
        if (d[s][v] < 0) {
          d[s][v] = d[s][queue[q]] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return d;
}

}  // namespace converse::testing
