// facies: command-line driver for the prestack facies pipeline.
//
//   facies synth    --cube survey.gcube --labels truth.csv
//   facies train    --cube survey.gcube --model model.ckpt
//   facies extract  --cube survey.gcube --model model.ckpt --features features.csv
//   facies cluster  --features features.csv --labels pred.csv
//   facies map      --labels pred.csv --out map.ppm
//   facies baseline pca|poststack --cube survey.gcube --labels pca.csv
//   facies score    --pred pred.csv --truth truth.csv
//   facies gradcheck

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "facies/checkpoint.hpp"
#include "facies/error.hpp"
#include "facies/gradcheck.hpp"
#include "facies/pipeline.hpp"

namespace {

using namespace facies;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::vector<std::string> overrides;

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "Run configuration file (key = value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", common.seed, "Seed for every random step (overrides the config)");
  cmd->add_option("--threads", common.threads, "Worker threads for extraction and clustering")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  cmd->add_option("--set", common.overrides, "Override one config key (key=value), repeatable");
}

SurveyGrid load_grid(const std::string& path, const RunConfig& cfg) {
  GatherCube cube = load_gather_cube(path);
  // The cube header carries the window length; the config's is ignored here.
  return cut_survey(cube, cfg.alignment, cfg.horizon_ms);
}

void warn_flagged(const SurveyGrid& grid) {
  if (const std::size_t flagged = count_flagged_windows(grid); flagged > 0)
    std::cerr << "warning: " << flagged << " of " << grid.windows.size()
              << " windows have traces without both a crest and a trough\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prestack seismic facies recognition with a convolutional autoencoder"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "Write a labelled synthetic survey");
  std::string cube_out = "survey.gcube", truth_out = "truth.csv";
  synth->add_option("--cube", cube_out, "Gather-cube output");
  synth->add_option("--labels", truth_out, "True label CSV output");
  add_common(synth, common);

  auto* train = app.add_subcommand("train", "Train the autoencoder layer by layer");
  std::string cube_in, model_path = "model.ckpt", loss_out;
  train->add_option("--cube", cube_in, "Gather-cube input")->required()->check(CLI::ExistingFile);
  train->add_option("--model", model_path, "Checkpoint output");
  train->add_option("--loss", loss_out, "Optional CSV of per-epoch losses");
  add_common(train, common);

  auto* extract = app.add_subcommand("extract", "Extract encoder features for every gather");
  std::string features_path = "features.csv";
  extract->add_option("--cube", cube_in, "Gather-cube input")->required()->check(CLI::ExistingFile);
  extract->add_option("--model", model_path, "Checkpoint input")->check(CLI::ExistingFile);
  extract->add_option("--features", features_path, "Feature CSV output");
  add_common(extract, common);

  auto* cluster_cmd = app.add_subcommand("cluster", "Cluster feature vectors into a facies map");
  std::string labels_path = "labels.csv";
  cluster_cmd->add_option("--features", features_path, "Feature CSV input")->check(CLI::ExistingFile);
  cluster_cmd->add_option("--labels", labels_path, "Label CSV output");
  add_common(cluster_cmd, common);

  auto* map = app.add_subcommand("map", "Render a label CSV as a P6 pixmap");
  std::string map_out = "map.ppm";
  map->add_option("--labels", labels_path, "Label CSV input")->check(CLI::ExistingFile);
  map->add_option("--out", map_out, "PPM output");
  std::size_t palette_size = 0;
  map->add_option("--palette-size", palette_size, "Palette length (default: labels in the map)");

  auto* baseline = app.add_subcommand("baseline", "Comparison pipelines (pca | poststack)");
  std::string method;
  baseline->add_option("method", method, "pca or poststack")
      ->required()
      ->check(CLI::IsMember({"pca", "poststack"}));
  baseline->add_option("--cube", cube_in, "Gather-cube input")->required()->check(CLI::ExistingFile);
  baseline->add_option("--labels", labels_path, "Label CSV output");
  std::string baseline_features;
  baseline->add_option("--features", baseline_features, "Optional feature CSV output");
  add_common(baseline, common);

  auto* score = app.add_subcommand("score", "Permutation-matched accuracy against true labels");
  std::string pred_path, truth_path;
  score->add_option("--pred", pred_path, "Predicted label CSV")->required()->check(CLI::ExistingFile);
  score->add_option("--truth", truth_path, "True label CSV")->required()->check(CLI::ExistingFile);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the backward pass");
  GradSuiteConfig grad_cfg;
  gradcheck->add_option("--configs", grad_cfg.configurations, "Random configurations");
  gradcheck->add_option("--seed", grad_cfg.seed, "Seed for the random configurations");
  bool verbose = false;
  gradcheck->add_flag("-v,--verbose", verbose, "Print every checked layer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) {
      const RunConfig cfg = common.load();
      const SyntheticSurvey survey = synthesize(cfg);
      save_gather_cube(cube_out, survey.cube);
      save_label_csv(truth_out, survey.labels);
      std::cout << "wrote " << cube_out << " (" << survey.cube.inlines << "x"
                << survey.cube.crosslines << " gathers, " << survey.cube.offsets << " offsets, "
                << survey.cube.samples << " samples) and " << truth_out << "\n";
    } else if (train->parsed()) {
      const RunConfig cfg = common.load();
      const SurveyGrid grid = load_grid(cube_in, cfg);
      warn_flagged(grid);
      const TrainResult result = train_on_grid(grid, cfg);
      save_checkpoint(model_path, result.model);
      for (std::size_t l = 0; l < result.loss_history.size(); ++l)
        std::cout << "layer " << l + 1 << ": loss " << result.loss_history[l].front() << " -> "
                  << result.loss_history[l].back() << "\n";
      if (!loss_out.empty()) {
        std::ostringstream os;
        os << "layer,epoch,loss\n";
        for (std::size_t l = 0; l < result.loss_history.size(); ++l)
          for (std::size_t e = 0; e < result.loss_history[l].size(); ++e)
            os << l << ',' << e << ',' << result.loss_history[l][e] << '\n';
        write_file(loss_out, os.str());
      }
      std::cout << "wrote " << model_path << "\n";
    } else if (extract->parsed()) {
      const RunConfig cfg = common.load();
      const SurveyGrid grid = load_grid(cube_in, cfg);
      const CaeModel model = load_checkpoint(model_path);
      const FeatureMatrix features = assemble_feature_matrix(grid, model, common.threads);
      save_feature_csv(features_path, features);
      std::cout << "wrote " << features_path << " (" << features.values.rows() << " x "
                << features.values.cols() << ")\n";
    } else if (cluster_cmd->parsed()) {
      const RunConfig cfg = common.load();
      const LabelGrid labels = cluster_to_map(load_feature_csv(features_path), cfg, common.threads);
      save_label_csv(labels_path, labels);
      std::cout << "wrote " << labels_path << "\n";
    } else if (map->parsed()) {
      const LabelGrid labels = load_label_csv(labels_path);
      const std::size_t n = palette_size > 0 ? palette_size : labels.class_count();
      write_file(map_out, render_map(labels, default_palette(n)));
      std::cout << "wrote " << map_out << " (" << labels.crosslines << "x" << labels.inlines
                << ")\n";
    } else if (baseline->parsed()) {
      const RunConfig cfg = common.load();
      const SurveyGrid grid = load_grid(cube_in, cfg);
      FeatureMatrix features;
      if (method == "pca") {
        PcaModel pca;
        features = pca_features(grid, cfg, &pca);
        std::cout << "pca: kept " << pca.retained << " of " << pca.dimension()
                  << " components (" << pca.cumulative_ratio(pca.retained) << " of variance)\n";
      } else {
        features = poststack_features(grid);
      }
      if (!baseline_features.empty()) save_feature_csv(baseline_features, features);
      save_label_csv(labels_path, cluster_to_map(features, cfg, common.threads));
      std::cout << "wrote " << labels_path << "\n";
    } else if (score->parsed()) {
      const MapScore s = score_map(load_label_csv(pred_path), load_label_csv(truth_path));
      std::printf("accuracy %.6f\n", s.accuracy);
      for (std::size_t c = 0; c < s.class_recall.size(); ++c)
        std::printf("class %zu recall %.6f\n", c, s.class_recall[c]);
    } else if (gradcheck->parsed()) {
      const GradSuiteReport report = run_gradient_suite(grad_cfg);
      if (verbose)
        for (const auto& c : report.cases) std::cout << c << "\n";
      std::printf("%zu components, %zu failures, max relative error %.3e (%s)\n",
                  report.total.components, report.total.failures,
                  report.total.max_relative_error, report.total.worst.c_str());
      return report.passed() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 4;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
