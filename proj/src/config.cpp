#include "facies/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "facies/error.hpp"

namespace facies {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("config: bad value '" + text + "' for key '" + key + "'");
  return value;
}

std::string show(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field number(T RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v) { c.*member = parse_value<T>("", v); },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return show(c.*member);
            else
              return std::to_string(c.*member);
          }};
}

template <class E>
Field choice(E RunConfig::*member, std::vector<std::pair<std::string, E>> options) {
  return {[member, options](RunConfig& c, const std::string& v) {
            for (const auto& [name, value] : options)
              if (name == v) {
                c.*member = value;
                return;
              }
            std::string allowed;
            for (const auto& o : options) allowed += (allowed.empty() ? "" : "|") + o.first;
            throw ConfigError("config: bad value '" + v + "' (expected " + allowed + ")");
          },
          [member, options](const RunConfig& c) {
            for (const auto& [name, value] : options)
              if (value == c.*member) return name;
            return std::string("?");
          }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"window_ms", number(&RunConfig::window_ms)},
      {"dt_ms", number(&RunConfig::dt_ms)},
      {"horizon_ms", number(&RunConfig::horizon_ms)},
      {"alignment", choice(&RunConfig::alignment, {{"centered", Alignment::centered},
                                                   {"below", Alignment::below}})},
      {"inlines", number(&RunConfig::inlines)},
      {"crosslines", number(&RunConfig::crosslines)},
      {"offsets", number(&RunConfig::offsets)},
      {"snr", number(&RunConfig::snr)},
      {"layers", number(&RunConfig::layers)},
      {"filter_size", number(&RunConfig::filter_size)},
      {"maps", number(&RunConfig::maps)},
      {"slope", number(&RunConfig::slope)},
      {"learning_rate", number(&RunConfig::learning_rate)},
      {"epochs", number(&RunConfig::epochs)},
      {"batch_size", number(&RunConfig::batch_size)},
      {"corruption_prob", number(&RunConfig::corruption_prob)},
      {"unpool_mode", choice(&RunConfig::unpool_mode, {{"random", UnpoolMode::random},
                                                       {"recorded", UnpoolMode::recorded}})},
      {"decoder_activation",
       choice(&RunConfig::decoder_activation, {{"auto", DecoderActivationPolicy::automatic},
                                               {"identity", DecoderActivationPolicy::identity},
                                               {"leaky", DecoderActivationPolicy::leaky}})},
      {"cluster_mode", choice(&RunConfig::cluster_mode, {{"hard", ClusterMode::hard},
                                                         {"fuzzy", ClusterMode::fuzzy}})},
      {"clusters", number(&RunConfig::clusters)},
      {"fuzzifier", number(&RunConfig::fuzzifier)},
      {"max_iter", number(&RunConfig::max_iter)},
      {"tol", number(&RunConfig::tol)},
      {"restarts", number(&RunConfig::restarts)},
      {"pca_threshold", number(&RunConfig::pca_threshold)},
      {"seed", number(&RunConfig::seed)},
  };
  return table;
}

}  // namespace

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = learning_rate;
  t.epochs = epochs;
  t.corruption_prob = corruption_prob;
  t.batch_size = batch_size;
  t.seed = seed;
  t.slope = slope;
  return t;
}

ClusterConfig RunConfig::cluster_config() const {
  ClusterConfig c;
  c.clusters = clusters;
  c.fuzzifier = fuzzifier;
  c.max_iter = max_iter;
  c.tol = tol;
  c.seed = seed;
  c.mode = cluster_mode;
  c.restarts = restarts;
  return c;
}

void RunConfig::validate() const {
  if (!(window_ms > 0.0) || !(dt_ms > 0.0)) throw ConfigError("config: window_ms and dt_ms must be > 0");
  if (inlines == 0 || crosslines == 0 || offsets < 2)
    throw ConfigError("config: survey needs inlines, crosslines >= 1 and offsets >= 2");
  if (!(snr > 0.0)) throw ConfigError("config: snr must be > 0");
  if (layers == 0 || maps == 0) throw ConfigError("config: layers and maps must be >= 1");
  if (filter_size == 0 || filter_size % 2 == 0) throw ConfigError("config: filter_size must be odd");
  if (!(pca_threshold > 0.0 && pca_threshold <= 1.0))
    throw ConfigError("config: pca_threshold must lie in (0, 1]");
  try {
    train_config().validate();
    cluster_config().validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.first);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields())
    if (name == key) {
      try {
        field.set(cfg, value);
      } catch (const ConfigError&) {
        throw ConfigError("config: bad value '" + value + "' for key '" + key + "'");
      }
      return;
    }
  throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is);
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  for (const auto& [name, field] : fields()) os << name << " = " << field.get(cfg) << '\n';
}

}  // namespace facies
