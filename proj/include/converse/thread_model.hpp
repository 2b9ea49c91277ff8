#pragma once

// Conversation threads as rooted reply trees, plus the structural artifacts
// the models consume. Everything downstream works in one index space: the
// chronological order of the tweets (timestamp, then id).

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "converse/tensor.hpp"

namespace converse {

enum class Stance : std::uint8_t { support = 0, deny = 1, query = 2, comment = 3 };
enum class Veracity : std::uint8_t { true_rumor = 0, false_rumor = 1, unverified = 2 };

inline constexpr std::size_t kStanceClasses = 4;
inline constexpr std::size_t kVeracityClasses = 3;
inline constexpr std::array<Stance, 4> kAllStances{Stance::support, Stance::deny, Stance::query,
                                                   Stance::comment};
inline constexpr std::array<Veracity, 3> kAllVeracities{Veracity::true_rumor, Veracity::false_rumor,
                                                        Veracity::unverified};

// Wire names used by the corpus format: support/deny/query/comment and
// true/false/unverified.
std::string_view to_string(Stance s);
std::string_view to_string(Veracity v);
std::optional<Stance> parse_stance(std::string_view s);
std::optional<Veracity> parse_veracity(std::string_view s);

struct Tweet {
  std::string id;
  std::optional<std::string> parent_id;  // none iff source tweet
  std::int64_t timestamp = 0;            // epoch milliseconds
  std::string text;
  std::optional<Stance> stance;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

struct ConversationThread {
  std::string thread_id;
  std::string event;
  std::vector<Tweet> tweets;
  std::optional<Veracity> veracity;

  friend bool operator==(const ConversationThread&, const ConversationThread&) = default;
};

// Parent/children maps over the tweets' positions in ConversationThread::tweets.
struct TreeIndex {
  std::size_t root = 0;
  std::vector<std::optional<std::size_t>> parent;
  std::vector<std::vector<std::size_t>> children;
  std::vector<std::size_t> depth;
  std::unordered_map<std::string, std::size_t> index_of;
};

// Validates the reply structure. Throws TreeError (empty_thread,
// duplicate_id, orphan_tweet, multiple_roots, cycle_detected).
TreeIndex build_tree(std::span<const Tweet> tweets);

// Throws TreeError(unknown_tweet) when the id is not in the thread.
std::size_t depth_of(const ConversationThread& thread, std::string_view tweet_id);

// order[k] = position in thread.tweets of the k-th tweet chronologically.
std::vector<std::size_t> chronological_order(const ConversationThread& thread);

struct AdjacencyMatrix {
  std::size_t size = 0;
  Tensor entries;  // [size, size], rows in chronological order
};

enum class AdjacencyVariant { original, customized };
std::string_view to_string(AdjacencyVariant v);
std::optional<AdjacencyVariant> parse_adjacency_variant(std::string_view s);

struct NormalizedAdjacency {
  AdjacencyVariant variant = AdjacencyVariant::customized;
  Tensor entries;
};

AdjacencyMatrix adjacency(const ConversationThread& thread);
// original:   D^{-1/2} A D^{-1/2}, D the row sums of A (self-loops included)
// customized: (D^{-1/2} A D^{-1/2})^2 + I
NormalizedAdjacency normalize(const AdjacencyMatrix& a, AdjacencyVariant variant);

// The thread re-expressed in chronological index space.
struct ThreadStructure {
  std::vector<std::size_t> order;                   // chronological -> file position
  std::vector<std::optional<std::size_t>> parent;   // chronological indices
  std::vector<std::size_t> depth;                   // chronological indices
  std::size_t max_depth = 0;
};

ThreadStructure analyze(const ConversationThread& thread);

}  // namespace converse
