#include "mtlw/experiment_config.hpp"

#include <fstream>
#include <set>
#include <string>
#include <type_traits>

#include "mtlw/errors.hpp"

namespace mtlw::tools {

namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string prefix) : doc_(doc), prefix_(std::move(prefix)) {
    if (!doc_.is_object()) throw ConfigError(name(""), "expected a JSON object");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!doc_.contains(key)) return;
    seen_.insert(key);
    const json& v = doc_.at(key);
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t> || std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ConfigError(name(key), "expected an integer");
        if (!v.is_number_unsigned() && v.get<long long>() < 0) throw ConfigError(name(key), "must be >= 0");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(name(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(name(key), "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name(key), e.what());
    }
  }

  std::string name(const std::string& key) const {
    if (prefix_.empty()) return key;
    return key.empty() ? prefix_ : prefix_ + "." + key;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError(name(key), "unknown key");
    }
  }

 private:
  const json& doc_;
  std::string prefix_;
  std::set<std::string> seen_;
};

template <typename Fn>
void prefixed(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    throw ConfigError(prefix + "." + e.key(), what.substr(e.key().size() + 2));
  }
}

std::filesystem::path absolute_path(const std::filesystem::path& p) {
  return std::filesystem::absolute(p).lexically_normal();
}

}  // namespace

void ExperimentConfig::finalize() {
  generator.seed = seed;
  train.seed = seed;
  data_dir = absolute_path(data_dir);
  out_dir = absolute_path(out_dir);
  prefixed("generator", [&] { generator.validate(); });
  prefixed("train", [&] { train.validate(); });
  try {
    net.exits.validate();
  } catch (const StructuralError& e) {
    throw ConfigError("net.exits", e.what());
  }
  if (net.head_hidden == 0) throw ConfigError("net.head_hidden", "must be >= 1");
  for (std::size_t c : net.block_channels) {
    if (c == 0) throw ConfigError("net.block_channels", "every width must be >= 1");
  }
}

net::NetConfig ExperimentConfig::net_for(std::size_t feature_height) const {
  net::NetConfig nc = net;
  nc.input_channels = 1;
  nc.input_height = feature_height;
  nc.input_width = train.crop_width;
  try {
    nc.validate();
  } catch (const StructuralError& e) {
    throw ConfigError("train.crop_width", e.what());
  }
  return nc;
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  ExperimentConfig cfg;
  Section top(doc, "");
  top.get("seed", cfg.seed);
  std::string path;
  if (top.has("data_dir")) {
    top.get("data_dir", path);
    cfg.data_dir = path;
  }
  if (top.has("out_dir")) {
    top.get("out_dir", path);
    cfg.out_dir = path;
  }

  if (top.has("generator")) {
    Section g(top.raw("generator"), "generator");
    g.get("n_train", cfg.generator.n_train);
    g.get("n_val", cfg.generator.n_val);
    g.get("n_test", cfg.generator.n_test);
    g.get("H", cfg.generator.height);
    g.get("W", cfg.generator.width);
    g.get("latent_dim", cfg.generator.latent_dim);
    g.get("noise_std", cfg.generator.noise_std);
    g.reject_unknown();
  }

  if (top.has("net")) {
    Section n(top.raw("net"), "net");
    if (n.has("block_channels")) {
      const json& widths = n.raw("block_channels");
      if (!widths.is_array() || widths.size() != net::kNumBlocks) {
        throw ConfigError("net.block_channels", "expected an array of 5 integers");
      }
      for (std::size_t i = 0; i < net::kNumBlocks; ++i) {
        if (!widths[i].is_number_unsigned()) throw ConfigError("net.block_channels", "expected an array of 5 integers");
        cfg.net.block_channels[i] = widths[i].get<std::size_t>();
      }
    }
    n.get("head_hidden", cfg.net.head_hidden);
    if (n.has("exits")) {
      Section e(n.raw("exits"), "net.exits");
      e.get("age", cfg.net.exits.age_exit);
      e.get("country", cfg.net.exits.country_exit);
      e.get("emotion", cfg.net.exits.emotion_exit);
      e.reject_unknown();
    }
    n.reject_unknown();
  }

  if (top.has("train")) {
    Section t(top.raw("train"), "train");
    t.get("learning_rate", cfg.train.learning_rate);
    t.get("batch_size", cfg.train.batch_size);
    t.get("epochs", cfg.train.epochs);
    t.get("weight_decay", cfg.train.weight_decay);
    t.get("beta1", cfg.train.beta1);
    t.get("beta2", cfg.train.beta2);
    t.get("adam_epsilon", cfg.train.adam_epsilon);
    t.get("crop_width", cfg.train.crop_width);
    if (t.has("strategy")) {
      std::string name;
      t.get("strategy", name);
      const auto s = weighting::parse_strategy(name);
      if (!s) {
        throw ConfigError("train.strategy",
                          "unknown strategy \"" + name + "\"; valid names: " + weighting::valid_strategy_names());
      }
      cfg.train.weighting.strategy = *s;
    }
    t.get("restraint_target", cfg.train.weighting.restraint_target);
    t.get("temperature", cfg.train.weighting.temperature);
    t.get("clamp_epsilon", cfg.train.weighting.clamp_epsilon);
    if (t.has("single_task")) {
      const json& v = t.raw("single_task");
      if (!v.is_null()) {
        if (!v.is_string()) throw ConfigError("train.single_task", "expected emotion|country|age or null");
        const auto task = train::parse_task(v.get<std::string>());
        if (!task) throw ConfigError("train.single_task", "expected emotion|country|age or null");
        cfg.train.single_task = *task;
      }
    }
    t.reject_unknown();
  }
  top.reject_unknown();

  cfg.finalize();
  return cfg;
}

nlohmann::json read_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(read_config_document(path)); }

nlohmann::json to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["data_dir"] = c.data_dir.string();
  j["out_dir"] = c.out_dir.string();
  j["generator"] = {{"n_train", c.generator.n_train}, {"n_val", c.generator.n_val},
                    {"n_test", c.generator.n_test},   {"H", c.generator.height},
                    {"W", c.generator.width},         {"latent_dim", c.generator.latent_dim},
                    {"noise_std", c.generator.noise_std}};
  j["net"] = {{"block_channels", c.net.block_channels},
              {"head_hidden", c.net.head_hidden},
              {"exits",
               {{"age", c.net.exits.age_exit},
                {"country", c.net.exits.country_exit},
                {"emotion", c.net.exits.emotion_exit}}}};
  const train::TrainConfig& t = c.train;
  j["train"] = {{"learning_rate", t.learning_rate},
                {"batch_size", t.batch_size},
                {"epochs", t.epochs},
                {"weight_decay", t.weight_decay},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"adam_epsilon", t.adam_epsilon},
                {"crop_width", t.crop_width},
                {"strategy", std::string(weighting::strategy_name(t.weighting.strategy))},
                {"restraint_target", t.weighting.restraint_target},
                {"temperature", t.weighting.temperature},
                {"clamp_epsilon", t.weighting.clamp_epsilon},
                {"single_task", t.single_task ? json(std::string(train::task_name(*t.single_task))) : json(nullptr)}};
  return j;
}

void write_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(config).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace mtlw::tools
