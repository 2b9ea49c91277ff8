#include "converse/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "converse/csv.hpp"
#include "converse/error.hpp"

namespace converse {

using json = nlohmann::ordered_json;

const CorpusThread& Corpus::find(const std::string& thread_id) const {
  for (const auto& t : threads) {
    if (t.thread_id == thread_id) return t;
  }
  throw DataError("unknown thread id '" + thread_id + "'");
}

void Corpus::reindex() {
  std::set<std::string> ids;
  stance_labeled_ids.clear();
  for (const auto& t : threads) {
    if (!ids.insert(t.thread_id).second) throw DataError("duplicate thread id '" + t.thread_id + "'");
    build_tree(t.tweets);
    if (std::any_of(t.tweets.begin(), t.tweets.end(), [](const Tweet& w) { return w.stance.has_value(); })) {
      stance_labeled_ids.insert(t.thread_id);
    }
  }
}

namespace {

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(line_prefix(line) + "missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) throw SchemaError(line_prefix(line) + "field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) {
    throw SchemaError(line_prefix(line) + "field '" + key + "' must be a string or null");
  }
  return v.get<std::string>();
}

CorpusThread parse_thread(const std::string& text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(line_prefix(line) + "invalid JSON: " + e.what());
  }
  if (!obj.is_object()) throw SchemaError(line_prefix(line) + "expected a JSON object");
  CorpusThread t;
  t.thread_id = require_string(obj, "thread_id", line);
  t.event = require_string(obj, "event", line);
  if (auto v = optional_string(obj, "veracity", line)) {
    t.veracity = parse_veracity(*v);
    if (!t.veracity) throw LabelError(line_prefix(line) + "unknown veracity label '" + *v + "'");
  }
  if (auto it = obj.find("split"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError(line_prefix(line) + "field 'split' must be a string");
    t.split = it->get<std::string>();
  }
  const json& tweets = require(obj, "tweets", line);
  if (!tweets.is_array()) throw SchemaError(line_prefix(line) + "field 'tweets' must be an array");
  for (const json& tw : tweets) {
    if (!tw.is_object()) throw SchemaError(line_prefix(line) + "tweet entries must be objects");
    Tweet w;
    w.id = require_string(tw, "id", line);
    w.parent_id = optional_string(tw, "parent_id", line);
    const json& ts = require(tw, "ts", line);
    if (!ts.is_number_integer()) throw SchemaError(line_prefix(line) + "field 'ts' must be an integer");
    w.timestamp = ts.get<std::int64_t>();
    w.text = require_string(tw, "text", line);
    if (auto s = optional_string(tw, "stance", line)) {
      w.stance = parse_stance(*s);
      if (!w.stance) throw LabelError(line_prefix(line) + "unknown stance label '" + *s + "'");
    }
    t.tweets.push_back(std::move(w));
  }
  try {
    build_tree(t.tweets);
  } catch (const TreeError& e) {
    throw TreeError(e.kind(), line_prefix(line) + "thread '" + t.thread_id + "': " + e.what());
  }
  return t;
}

json thread_to_json(const CorpusThread& t) {
  json obj;
  obj["thread_id"] = t.thread_id;
  obj["event"] = t.event;
  obj["veracity"] = t.veracity ? json(std::string(to_string(*t.veracity))) : json(nullptr);
  if (t.split) obj["split"] = *t.split;
  json tweets = json::array();
  for (const Tweet& w : t.tweets) {
    json tw;
    tw["id"] = w.id;
    tw["parent_id"] = w.parent_id ? json(*w.parent_id) : json(nullptr);
    tw["ts"] = w.timestamp;
    tw["text"] = w.text;
    tw["stance"] = w.stance ? json(std::string(to_string(*w.stance))) : json(nullptr);
    tweets.push_back(std::move(tw));
  }
  obj["tweets"] = std::move(tweets);
  return obj;
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& name) {
  Corpus corpus;
  corpus.name = name;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    CorpusThread t = parse_thread(text, line);
    if (!ids.insert(t.thread_id).second) {
      throw SchemaError(line_prefix(line) + "duplicate thread id '" + t.thread_id + "'");
    }
    corpus.threads.push_back(std::move(t));
  }
  corpus.reindex();
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, int format_version) {
  if (format_version != kCorpusFormatVersion) {
    throw SchemaError("unsupported corpus format version " + std::to_string(format_version));
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path.string());
  return parse_corpus(in, path.stem().string());
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& t : corpus.threads) out << thread_to_json(t).dump() << '\n';
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write corpus: " + path.string());
  write_corpus(corpus, out);
  if (!out) throw IoError("write failed: " + path.string());
}

void assign_splits(Corpus& corpus, double dev_fraction, double test_fraction, std::uint64_t seed) {
  if (!(dev_fraction >= 0.0 && test_fraction > 0.0 && dev_fraction + test_fraction < 1.0)) {
    throw DomainError("split fractions must leave a nonempty training set");
  }
  const std::size_t n = corpus.threads.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(n)));
  for (std::size_t k = 0; k < n; ++k) {
    corpus.threads[order[k]].split = k < n_test ? "test" : k < n_test + n_dev ? "dev" : "train";
  }
}

FoldPlan make_folds(const Corpus& corpus, FoldScheme scheme, bool merge_dev) {
  FoldPlan plan;
  plan.scheme = scheme;
  if (scheme == FoldScheme::leave_one_event_out) {
    std::map<std::string, std::vector<std::string>> by_event;
    for (const auto& t : corpus.threads) {
      if (t.event.empty()) throw MissingEventTag("thread '" + t.thread_id + "' has no event tag");
      by_event[t.event].push_back(t.thread_id);
    }
    if (by_event.size() < 2) {
      throw DataError("leave-one-event-out needs at least two events (found " +
                      std::to_string(by_event.size()) + ")");
    }
    for (const auto& [event, test_ids] : by_event) {
      Fold f;
      f.name = event;
      f.test_ids = test_ids;
      for (const auto& t : corpus.threads) {
        if (t.event != event) f.train_ids.push_back(t.thread_id);
      }
      plan.folds.push_back(std::move(f));
    }
    return plan;
  }

  Fold f;
  f.name = "fixed";
  for (const auto& t : corpus.threads) {
    if (!t.split) throw DataError("fixed split: thread '" + t.thread_id + "' has no split tag");
    if (*t.split == "train") {
      f.train_ids.push_back(t.thread_id);
    } else if (*t.split == "dev") {
      (merge_dev ? f.train_ids : f.dev_ids).push_back(t.thread_id);
    } else if (*t.split == "test") {
      f.test_ids.push_back(t.thread_id);
    } else {
      throw DataError("fixed split: unknown split tag '" + *t.split + "'");
    }
  }
  if (f.train_ids.empty() || f.test_ids.empty()) throw DataError("fixed split: empty train or test set");
  plan.folds.push_back(std::move(f));
  return plan;
}

CorpusStatistics corpus_statistics(const Corpus& corpus) {
  CorpusStatistics s;
  s.corpus = corpus.name;
  s.threads = corpus.threads.size();
  double depth_total = 0.0;
  for (const auto& t : corpus.threads) {
    s.tweets += t.tweets.size();
    const TreeIndex tree = build_tree(t.tweets);
    depth_total += static_cast<double>(*std::max_element(tree.depth.begin(), tree.depth.end()));
    for (const Tweet& w : t.tweets) {
      if (w.stance) ++s.stance_counts[static_cast<std::size_t>(*w.stance)];
    }
    if (t.veracity) ++s.veracity_counts[static_cast<std::size_t>(*t.veracity)];
  }
  s.avg_depth = s.threads ? depth_total / static_cast<double>(s.threads) : 0.0;
  return s;
}

std::string statistics_csv(const std::vector<CorpusStatistics>& rows) {
  std::ostringstream out;
  out << "corpus,threads,tweets,avg_depth,support,deny,query,comment,true,false,unverified\n";
  for (const auto& s : rows) {
    out << csv::escape(s.corpus) << ',' << s.threads << ',' << s.tweets << ',' << csv::number(s.avg_depth, 3);
    for (auto c : s.stance_counts) out << ',' << c;
    for (auto c : s.veracity_counts) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

}  // namespace converse
