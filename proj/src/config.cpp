#include "converse/config.hpp"

#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "converse/csv.hpp"
#include "converse/error.hpp"
#include "converse/report.hpp"

namespace converse {

namespace pt = boost::property_tree;

namespace {

std::vector<std::size_t> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError(key + ": empty list element");
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item.substr(b, e - b + 1), &used);
      if (used != e - b + 1 || v <= 0) throw ConfigError(key + ": expected positive integers");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ConfigError(key + ": expected positive integers");
    }
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

template <typename T>
T get(const pt::ptree& section, const std::string& where, const std::string& key) {
  try {
    return section.get<T>(key);
  } catch (const pt::ptree_error&) {
    throw ConfigError(where + "." + key + ": invalid value '" + section.get<std::string>(key, "") + "'");
  }
}

std::size_t get_size(const pt::ptree& s, const std::string& where, const std::string& key) {
  const long long v = get<long long>(s, where, key);
  if (v < 0) throw ConfigError(where + "." + key + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

bool get_bool(const pt::ptree& s, const std::string& where, const std::string& key) {
  const std::string v = s.get<std::string>(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where + "." + key + ": expected a boolean, got '" + v + "'");
}

void check_keys(const pt::ptree& section, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : section) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
  }
}

}  // namespace

RunConfig profile_config(std::string_view name) {
  RunConfig c;
  if (name == "semeval") return c;
  if (name == "pheme") {
    c.train.learning_rate = 0.005;
    return c;
  }
  if (name == "desk") {
    c.model.content.embedding_dim = 16;
    c.model.content.content_dim = 32;
    c.model.content.trainable_embeddings = true;
    c.model.gcn.layer_sizes = {32, kStanceClasses};
    c.model.veracity.hidden_size = 32;
    c.model.veracity.cnn_feature_maps = 16;
    c.train.learning_rate = 0.01;
    c.train.batch_size = 8;
    c.train.max_epochs = 60;
    c.train.dropout = 0.0;
    return c;
  }
  throw ConfigError("unknown profile '" + std::string(name) + "' (expected semeval, pheme or desk)");
}

RunConfig parse_run_config(const std::string& ini_text, const RunConfig& base) {
  pt::ptree tree;
  try {
    std::istringstream in(ini_text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c = base;
  for (const auto& [name, section] : tree) {
    if (!section.data().empty() && section.empty()) {
      throw ConfigError("config key '" + name + "' must be inside a section");
    }
    if (name == "train") {
      check_keys(section, name, {"lambda", "learning_rate", "batch_size", "max_epochs", "patience", "dropout",
                                 "seed", "mode", "clip_norm", "select_on_dev"});
      auto& t = c.train;
      if (section.count("lambda")) t.lambda = get<double>(section, name, "lambda");
      if (section.count("learning_rate")) t.learning_rate = get<double>(section, name, "learning_rate");
      if (section.count("batch_size")) t.batch_size = get_size(section, name, "batch_size");
      if (section.count("max_epochs")) t.max_epochs = get_size(section, name, "max_epochs");
      if (section.count("patience")) t.patience = get_size(section, name, "patience");
      if (section.count("dropout")) t.dropout = get<double>(section, name, "dropout");
      if (section.count("seed")) t.seed = get<std::uint64_t>(section, name, "seed");
      if (section.count("clip_norm")) t.clip_norm = get<double>(section, name, "clip_norm");
      if (section.count("select_on_dev")) t.select_on_dev = get_bool(section, name, "select_on_dev");
      if (section.count("mode")) {
        const auto m = parse_train_mode(section.get<std::string>("mode"));
        if (!m) throw ConfigError("train.mode must be joint, single-task or stance-only");
        t.mode = *m;
      }
    } else if (name == "content") {
      check_keys(section, name, {"embedding_dim", "content_dim", "trainable_embeddings"});
      auto& m = c.model.content;
      if (section.count("embedding_dim")) m.embedding_dim = get_size(section, name, "embedding_dim");
      if (section.count("content_dim")) m.content_dim = get_size(section, name, "content_dim");
      if (section.count("trainable_embeddings")) m.trainable_embeddings = get_bool(section, name, "trainable_embeddings");
    } else if (name == "gcn") {
      check_keys(section, name, {"layer_sizes", "variant"});
      auto& g = c.model.gcn;
      if (section.count("layer_sizes")) g.layer_sizes = parse_list("gcn.layer_sizes", section.get<std::string>("layer_sizes"));
      if (section.count("variant")) {
        const auto v = parse_adjacency_variant(section.get<std::string>("variant"));
        if (!v) throw ConfigError("gcn.variant must be original or customized");
        g.variant = *v;
      }
    } else if (name == "veracity") {
      check_keys(section, name, {"rnn", "use_stance_features", "hidden_size", "cnn_windows", "cnn_feature_maps"});
      auto& v = c.model.veracity;
      if (section.count("rnn")) {
        const auto r = parse_rnn_variant(section.get<std::string>("rnn"));
        if (!r) throw ConfigError("veracity.rnn must be gru, cnn or none");
        v.rnn = *r;
      }
      if (section.count("use_stance_features")) v.use_stance_features = get_bool(section, name, "use_stance_features");
      if (section.count("hidden_size")) v.hidden_size = get_size(section, name, "hidden_size");
      if (section.count("cnn_windows")) v.cnn_windows = parse_list("veracity.cnn_windows", section.get<std::string>("cnn_windows"));
      if (section.count("cnn_feature_maps")) v.cnn_feature_maps = get_size(section, name, "cnn_feature_maps");
    } else {
      throw ConfigError("unknown config section [" + name + "]");
    }
  }
  try {
    validate(c.model);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  validate(c.train);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, base);
}

std::string run_config_to_ini(const RunConfig& c) {
  auto real = [](double v) { return csv::number(v, 10); };
  const auto& t = c.train;
  const auto& m = c.model;
  std::string o;
  o += "[train]\n";
  o += "lambda = " + real(t.lambda) + "\n";
  o += "learning_rate = " + real(t.learning_rate) + "\n";
  o += "batch_size = " + std::to_string(t.batch_size) + "\n";
  o += "max_epochs = " + std::to_string(t.max_epochs) + "\n";
  o += "patience = " + std::to_string(t.patience) + "\n";
  o += "dropout = " + real(t.dropout ? *t.dropout : m.gcn.dropout) + "\n";
  o += "seed = " + std::to_string(t.seed) + "\n";
  o += "mode = " + std::string(to_string(t.mode)) + "\n";
  o += "clip_norm = " + real(t.clip_norm) + "\n";
  o += std::string("select_on_dev = ") + (t.select_on_dev ? "true" : "false") + "\n";
  o += "\n[content]\n";
  o += "embedding_dim = " + std::to_string(m.content.embedding_dim) + "\n";
  o += "content_dim = " + std::to_string(m.content.content_dim) + "\n";
  o += std::string("trainable_embeddings = ") + (m.content.trainable_embeddings ? "true" : "false") + "\n";
  o += "\n[gcn]\n";
  o += "layer_sizes = " + join(m.gcn.layer_sizes) + "\n";
  o += "variant = " + std::string(to_string(m.gcn.variant)) + "\n";
  o += "\n[veracity]\n";
  o += "rnn = " + std::string(to_string(m.veracity.rnn)) + "\n";
  o += std::string("use_stance_features = ") + (m.veracity.use_stance_features ? "true" : "false") + "\n";
  o += "hidden_size = " + std::to_string(m.veracity.hidden_size) + "\n";
  o += "cnn_windows = " + join(m.veracity.cnn_windows) + "\n";
  o += "cnn_feature_maps = " + std::to_string(m.veracity.cnn_feature_maps) + "\n";
  return o;
}

}  // namespace converse
