#include <algorithm>
#include <cmath>
#include <random>

#include "converse/dataset_io.hpp"
#include "converse/error.hpp"

namespace converse {

StanceDynamics default_stance_dynamics() {
  StanceDynamics d;
  //                        support deny  query comment
  d[0] = {{0.60, 0.04, 0.08, 0.28},
          {0.66, 0.03, 0.06, 0.25},
          {0.72, 0.02, 0.05, 0.21},
          {0.78, 0.02, 0.04, 0.16}};
  d[1] = {{0.15, 0.35, 0.08, 0.42},
          {0.10, 0.50, 0.07, 0.33},
          {0.06, 0.65, 0.06, 0.23},
          {0.04, 0.78, 0.04, 0.14}};
  d[2] = {{0.12, 0.04, 0.40, 0.44},
          {0.10, 0.04, 0.52, 0.34},
          {0.08, 0.03, 0.62, 0.27},
          {0.06, 0.02, 0.72, 0.20}};
  return d;
}

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec spec;
  spec.stance_dynamics = default_stance_dynamics();
  return spec;
}

namespace {

void validate(const SyntheticSpec& spec) {
  if (spec.min_tweets == 0 || spec.min_tweets > spec.max_tweets) {
    throw InvalidSpec("tweets_per_thread range is empty");
  }
  if (spec.vocab_size < 2 * kStanceClasses) throw InvalidSpec("vocab_size too small");
  if (spec.indicative_tokens + spec.noise_tokens == 0) throw InvalidSpec("tweets would be empty");
  if (spec.n_events == 0) throw InvalidSpec("n_events must be positive");
  if (spec.lifespan_ms <= 0) throw InvalidSpec("lifespan must be positive");
  for (const auto& phases : spec.stance_dynamics) {
    if (phases.empty()) throw InvalidSpec("stance dynamics need at least one phase");
    for (const auto& dist : phases) {
      double total = 0.0;
      for (double p : dist) {
        if (!(p >= 0.0)) throw InvalidSpec("negative stance probability");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw InvalidSpec("stance distribution does not sum to 1");
    }
  }
}

std::size_t draw(const std::array<double, kStanceClasses>& dist, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    acc += dist[k];
    if (u < acc) return k;
  }
  return dist.size() - 1;
}

}  // namespace

Corpus generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  Corpus corpus;
  corpus.name = "synthetic-" + std::to_string(spec.seed);

  // Vocabulary: half split evenly into stance-indicative pools, half noise.
  const std::size_t pool = spec.vocab_size / (2 * kStanceClasses);
  const std::size_t noise_pool = spec.vocab_size - pool * kStanceClasses;
  std::uniform_int_distribution<std::size_t> pick_pool(0, pool - 1);
  std::uniform_int_distribution<std::size_t> pick_noise(0, noise_pool - 1);
  std::uniform_int_distribution<std::size_t> pick_len(spec.min_tweets, spec.max_tweets);
  std::uniform_int_distribution<std::size_t> pick_event(0, spec.n_events - 1);
  std::uniform_int_distribution<std::int64_t> pick_offset(1, spec.lifespan_ms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr std::int64_t kEpoch = 1'500'000'000'000;
  constexpr std::int64_t kDay = 24 * 3600 * 1000;

  auto make_text = [&](std::size_t stance) {
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < spec.indicative_tokens; ++i) {
      tokens.push_back("s" + std::to_string(stance) + "w" + std::to_string(pick_pool(rng)));
    }
    for (std::size_t i = 0; i < spec.noise_tokens; ++i) {
      tokens.push_back("n" + std::to_string(pick_noise(rng)));
    }
    std::shuffle(tokens.begin(), tokens.end(), rng);
    std::string text;
    for (const auto& tok : tokens) text += (text.empty() ? "" : " ") + tok;
    return text;
  };

  for (std::size_t i = 0; i < spec.n_threads; ++i) {
    CorpusThread t;
    t.thread_id = "syn" + std::to_string(spec.seed) + "-" + std::to_string(i);
    const auto veracity = static_cast<Veracity>(i % kVeracityClasses);
    t.veracity = veracity;
    t.event = "event" + std::to_string(pick_event(rng));
    const std::size_t n = pick_len(rng);
    const std::int64_t start = kEpoch + static_cast<std::int64_t>(i) * kDay;

    std::vector<std::int64_t> offsets(n - 1);
    for (auto& o : offsets) o = pick_offset(rng);
    std::sort(offsets.begin(), offsets.end());

    Tweet source;
    source.id = t.thread_id + "-0";
    source.timestamp = start;
    source.stance = Stance::support;
    source.text = make_text(static_cast<std::size_t>(Stance::support));
    t.tweets.push_back(std::move(source));

    const auto& phases = spec.stance_dynamics[static_cast<std::size_t>(veracity)];
    for (std::size_t k = 1; k < n; ++k) {
      Tweet w;
      w.id = t.thread_id + "-" + std::to_string(k);
      const std::int64_t off = offsets[k - 1];
      w.timestamp = start + off;
      // Half the replies answer the source; the rest answer a random earlier reply.
      std::size_t parent = 0;
      if (k > 1 && unit(rng) >= 0.5) {
        parent = std::uniform_int_distribution<std::size_t>(1, k - 1)(rng);
      }
      w.parent_id = t.tweets[parent].id;
      const auto phase = std::min(
          phases.size() - 1,
          static_cast<std::size_t>(static_cast<double>(off) / static_cast<double>(spec.lifespan_ms) *
                                   static_cast<double>(phases.size())));
      const std::size_t stance = draw(phases[phase], rng);
      w.stance = static_cast<Stance>(stance);
      w.text = make_text(stance);
      t.tweets.push_back(std::move(w));
    }
    corpus.threads.push_back(std::move(t));
  }
  corpus.reindex();
  return corpus;
}

}  // namespace converse
