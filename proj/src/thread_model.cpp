#include "converse/thread_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "converse/error.hpp"

namespace converse {

std::string_view to_string(Stance s) {
  switch (s) {
    case Stance::support: return "support";
    case Stance::deny: return "deny";
    case Stance::query: return "query";
    case Stance::comment: return "comment";
  }
  return "?";
}

std::string_view to_string(Veracity v) {
  switch (v) {
    case Veracity::true_rumor: return "true";
    case Veracity::false_rumor: return "false";
    case Veracity::unverified: return "unverified";
  }
  return "?";
}

std::optional<Stance> parse_stance(std::string_view s) {
  for (Stance st : kAllStances) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::optional<Veracity> parse_veracity(std::string_view s) {
  for (Veracity v : kAllVeracities) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string_view to_string(AdjacencyVariant v) {
  return v == AdjacencyVariant::original ? "original" : "customized";
}

std::optional<AdjacencyVariant> parse_adjacency_variant(std::string_view s) {
  if (s == "original") return AdjacencyVariant::original;
  if (s == "customized") return AdjacencyVariant::customized;
  return std::nullopt;
}

TreeIndex build_tree(std::span<const Tweet> tweets) {
  using K = TreeError::Kind;
  if (tweets.empty()) throw TreeError(K::empty_thread, "thread has no tweets");
  TreeIndex tree;
  const std::size_t n = tweets.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!tree.index_of.emplace(tweets[i].id, i).second) {
      throw TreeError(K::duplicate_id, "duplicate tweet id '" + tweets[i].id + "'");
    }
  }
  tree.parent.assign(n, std::nullopt);
  tree.children.assign(n, {});
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pid = tweets[i].parent_id;
    if (!pid) {
      roots.push_back(i);
      continue;
    }
    auto it = tree.index_of.find(*pid);
    if (it == tree.index_of.end()) {
      throw TreeError(K::orphan_tweet,
                      "tweet '" + tweets[i].id + "' replies to unknown tweet '" + *pid + "'");
    }
    tree.parent[i] = it->second;
    tree.children[it->second].push_back(i);
  }
  if (roots.size() > 1) {
    throw TreeError(K::multiple_roots, "thread has " + std::to_string(roots.size()) +
                                           " source tweets (parent_id null)");
  }
  if (roots.empty()) throw TreeError(K::cycle_detected, "no source tweet: reply relation is cyclic");
  tree.root = roots.front();

  // Every tweet must be reachable from the root; anything left over sits on a cycle.
  tree.depth.assign(n, 0);
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{tree.root};
  seen[tree.root] = true;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    ++reached;
    for (std::size_t c : tree.children[u]) {
      if (seen[c]) continue;
      seen[c] = true;
      tree.depth[c] = tree.depth[u] + 1;
      queue.push_back(c);
    }
  }
  if (reached != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i]) {
        throw TreeError(K::cycle_detected, "tweet '" + tweets[i].id + "' is on a reply cycle");
      }
    }
  }
  return tree;
}

std::size_t depth_of(const ConversationThread& thread, std::string_view tweet_id) {
  const TreeIndex tree = build_tree(thread.tweets);
  auto it = tree.index_of.find(std::string(tweet_id));
  if (it == tree.index_of.end()) {
    throw TreeError(TreeError::Kind::unknown_tweet, "unknown tweet '" + std::string(tweet_id) + "'");
  }
  return tree.depth[it->second];
}

std::vector<std::size_t> chronological_order(const ConversationThread& thread) {
  std::vector<std::size_t> order(thread.tweets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Tweet& ta = thread.tweets[a];
    const Tweet& tb = thread.tweets[b];
    if (ta.timestamp != tb.timestamp) return ta.timestamp < tb.timestamp;
    return ta.id < tb.id;
  });
  return order;
}

ThreadStructure analyze(const ConversationThread& thread) {
  const TreeIndex tree = build_tree(thread.tweets);
  ThreadStructure s;
  s.order = chronological_order(thread);
  const std::size_t n = s.order.size();
  std::vector<std::size_t> position(n);
  for (std::size_t k = 0; k < n; ++k) position[s.order[k]] = k;
  s.parent.assign(n, std::nullopt);
  s.depth.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t file_pos = s.order[k];
    if (tree.parent[file_pos]) s.parent[k] = position[*tree.parent[file_pos]];
    s.depth[k] = tree.depth[file_pos];
    s.max_depth = std::max(s.max_depth, s.depth[k]);
  }
  return s;
}

AdjacencyMatrix adjacency(const ConversationThread& thread) {
  const ThreadStructure s = analyze(thread);
  const std::size_t n = s.order.size();
  AdjacencyMatrix a{n, Tensor({n, n})};
  for (std::size_t i = 0; i < n; ++i) {
    a.entries(i, i) = 1.0;
    if (s.parent[i]) {
      a.entries(i, *s.parent[i]) = 1.0;
      a.entries(*s.parent[i], i) = 1.0;
    }
  }
  return a;
}

NormalizedAdjacency normalize(const AdjacencyMatrix& a, AdjacencyVariant variant) {
  const std::size_t n = a.size;
  if (a.entries.rows() != n || a.entries.cols() != n) throw ShapeMismatch("normalize: bad adjacency shape");
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) degree[i] += a.entries(i, j);
    if (!(degree[i] > 0.0)) throw DomainError("normalize: zero-degree row " + std::to_string(i));
  }
  Tensor hat({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (a.entries(i, j) != 0.0) hat(i, j) = a.entries(i, j) / std::sqrt(degree[i] * degree[j]);
    }
  }
  if (variant == AdjacencyVariant::original) return {variant, std::move(hat)};

  Tensor custom({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += hat(i, k) * hat(k, j);
      custom(i, j) = acc + (i == j ? 1.0 : 0.0);
    }
  }
  return {variant, std::move(custom)};
}

}  // namespace converse
