#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "converse/thread_model.hpp"

namespace converse {

// A corpus thread may also carry a split tag ("train", "dev", "test") used
// by fixed-split evaluation.
struct CorpusThread : ConversationThread {
  std::optional<std::string> split;

  friend bool operator==(const CorpusThread&, const CorpusThread&) = default;
};

struct Corpus {
  std::string name;
  std::vector<CorpusThread> threads;
  std::set<std::string> stance_labeled_ids;  // threads with at least one stance label

  const CorpusThread& find(const std::string& thread_id) const;
  // Recomputes stance_labeled_ids and validates id uniqueness and trees.
  void reindex();
};

inline constexpr int kCorpusFormatVersion = 1;

// JSON Lines, one thread per line:
// {"thread_id": str, "event": str, "veracity": "true"|"false"|"unverified"|null,
//  "tweets": [{"id": str, "parent_id": str|null, "ts": int, "text": str,
//              "stance": "support"|"deny"|"query"|"comment"|null}]}
// An optional "split" string is honoured. Errors carry the 1-based line.
Corpus load_corpus(const std::filesystem::path& path, int format_version = kCorpusFormatVersion);
Corpus parse_corpus(std::istream& in, const std::string& name);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

// ---- folds -----------------------------------------------------------------

enum class FoldScheme { fixed_split, leave_one_event_out };

struct Fold {
  std::string name;  // event name, or "fixed"
  std::vector<std::string> train_ids;
  std::vector<std::string> dev_ids;
  std::vector<std::string> test_ids;
};

struct FoldPlan {
  FoldScheme scheme = FoldScheme::leave_one_event_out;
  std::vector<Fold> folds;
};

// leave_one_event_out: one fold per event (events in lexicographic order).
// fixed_split: one fold from the threads' split tags; merge_dev folds the
// dev threads into training. Throws MissingEventTag / DataError.
FoldPlan make_folds(const Corpus& corpus, FoldScheme scheme, bool merge_dev = false);

// Tags every thread with a split: a seeded shuffle, then the first
// test_fraction of threads go to test, the next dev_fraction to dev.
void assign_splits(Corpus& corpus, double dev_fraction, double test_fraction, std::uint64_t seed);

// ---- statistics ------------------------------------------------------------

struct CorpusStatistics {
  std::string corpus;
  std::size_t threads = 0;
  std::size_t tweets = 0;
  double avg_depth = 0.0;  // mean over threads of the deepest tweet's depth
  std::array<std::size_t, kStanceClasses> stance_counts{};
  std::array<std::size_t, kVeracityClasses> veracity_counts{};
};

CorpusStatistics corpus_statistics(const Corpus& corpus);
// Header: corpus,threads,tweets,avg_depth,support,deny,query,comment,true,false,unverified
std::string statistics_csv(const std::vector<CorpusStatistics>& rows);

// ---- synthetic corpora -----------------------------------------------------

// Per veracity class, a sequence of time phases, each with a distribution
// over (support, deny, query, comment).
using StanceDynamics = std::array<std::vector<std::array<double, kStanceClasses>>, kVeracityClasses>;

struct SyntheticSpec {
  std::size_t n_threads = 20;
  std::size_t min_tweets = 4;
  std::size_t max_tweets = 8;
  std::size_t vocab_size = 120;
  std::size_t n_events = 1;
  std::uint64_t seed = 7;
  std::size_t indicative_tokens = 2;  // stance-indicative tokens per tweet
  std::size_t noise_tokens = 3;
  std::int64_t lifespan_ms = 8 * 3600 * 1000;
  StanceDynamics stance_dynamics;
};

// Planted dynamics: support grows for true rumors, denial for false ones,
// queries for unverified ones.
StanceDynamics default_stance_dynamics();
SyntheticSpec default_synthetic_spec();

// Deterministic in the spec. Throws InvalidSpec.
Corpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace converse
