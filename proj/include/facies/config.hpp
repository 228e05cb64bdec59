#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "facies/cae.hpp"
#include "facies/clustering.hpp"
#include "facies/features.hpp"

namespace facies {

enum class DecoderActivationPolicy { automatic, identity, leaky };

/// Every knob of a pipeline run. Text form is one `key = value` per line,
/// `#` starts a comment; unknown keys are rejected.
struct RunConfig {
  // survey / windowing
  double window_ms = 48.0;
  double dt_ms = 2.0;
  double horizon_ms = -1.0;  // < 0: central sample of each trace
  Alignment alignment = Alignment::centered;
  std::size_t inlines = 40;
  std::size_t crosslines = 40;
  std::size_t offsets = 24;
  double snr = 10.0;

  // autoencoder
  std::size_t layers = 2;
  std::size_t filter_size = 3;
  std::size_t maps = 10;
  double slope = 0.01;
  double learning_rate = 0.02;
  std::size_t epochs = 30;
  std::size_t batch_size = 1;
  double corruption_prob = 0.05;
  UnpoolMode unpool_mode = UnpoolMode::random;
  DecoderActivationPolicy decoder_activation = DecoderActivationPolicy::automatic;

  // clustering
  ClusterMode cluster_mode = ClusterMode::hard;
  std::size_t clusters = 3;
  double fuzzifier = 2.0;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::size_t restarts = 10;

  // baselines
  double pca_threshold = 0.9;

  std::uint64_t seed = 0;

  TrainConfig train_config() const;
  ClusterConfig cluster_config() const;
  void validate() const;
};

/// Names of all accepted keys, in documentation order.
const std::vector<std::string>& config_keys();

/// Applies one key/value pair; throws ConfigError on unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);
/// Writes every key with its current value; parse_config reads it back.
void write_config(std::ostream& os, const RunConfig& cfg);

}  // namespace facies
