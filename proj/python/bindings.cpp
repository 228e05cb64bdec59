#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>

#include "facies/checkpoint.hpp"
#include "facies/clustering.hpp"
#include "facies/error.hpp"
#include "facies/gradcheck.hpp"
#include "facies/pipeline.hpp"

namespace py = pybind11;
using namespace facies;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Tensor::Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_tensor(const Tensor& t) {
  Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  Matrix m(a.shape(0), a.shape(1));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = a.at(i, j);
  return m;
}

Array from_matrix(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::array_t<std::size_t> from_labels(const LabelGrid& g) {
  py::array_t<std::size_t> out({g.inlines, g.crosslines});
  std::copy(g.labels.begin(), g.labels.end(), out.mutable_data());
  return out;
}

LabelGrid to_labels(const py::array_t<std::size_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ShapeError("label map must be 2-D");
  return LabelGrid{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                   std::vector<std::size_t>(a.data(), a.data() + a.size())};
}

RunConfig make_config(const py::dict& overrides) {
  RunConfig cfg;
  for (auto [key, value] : overrides) {
    const std::string k = py::str(key);
    std::string v = py::str(value);
    if (py::isinstance<py::bool_>(value)) v = value.cast<bool>() ? "true" : "false";
    set_config_value(cfg, k, v);
  }
  cfg.validate();
  return cfg;
}

py::dict cluster_dict(const ClusterResult& r) {
  py::dict d;
  d["labels"] = r.labels;
  d["centroids"] = from_matrix(r.centroids);
  d["memberships"] = from_matrix(r.memberships);
  d["objective"] = r.objective();
  d["history"] = r.objective_history;
  return d;
}

// A survey cut into windows, with ground truth when it was synthesized.
struct Survey {
  SurveyGrid grid;
  GatherCube cube;
  std::optional<LabelGrid> truth;
};

py::tuple features_tuple(const FeatureMatrix& fm) {
  return py::make_tuple(from_matrix(fm.values), fm.keys);
}

FeatureMatrix to_features(const Array& values, const std::vector<std::pair<std::size_t, std::size_t>>& keys) {
  FeatureMatrix fm{to_matrix(values), keys};
  if (fm.keys.size() != fm.values.rows()) throw ShapeError("one key per feature row is required");
  return fm;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prestack seismic facies recognition with a convolutional autoencoder";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_KeyError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def("config_keys", &config_keys, "Accepted run configuration keys");
  m.def(
      "default_config",
      [](const py::dict& overrides) {
        std::ostringstream os;
        write_config(os, make_config(overrides));
        return os.str();
      },
      py::arg("overrides") = py::dict(), "Run configuration as key = value text");

  // kernels
  m.def("conv2d_valid", [](const Array& x, const Array& k) {
    return from_tensor(conv2d_valid(to_tensor(x), to_tensor(k)));
  });
  m.def("conv2d_full", [](const Array& x, const Array& k) {
    return from_tensor(conv2d_full(to_tensor(x), to_tensor(k)));
  });
  m.def("maxpool2x2", [](const Array& x) {
    const auto p = maxpool2x2(to_tensor(x));
    py::array_t<std::uint8_t> offsets(std::vector<py::ssize_t>(p.indices.shape.begin(), p.indices.shape.end()));
    std::copy(p.indices.offsets.begin(), p.indices.offsets.end(), offsets.mutable_data());
    return py::make_tuple(from_tensor(p.values), offsets);
  }, "Returns (pooled, argmax offsets in 0..3)");
  m.def("unpool2x2", [](const Array& pooled, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& offsets) {
    const Tensor p = to_tensor(pooled);
    if (offsets.size() != static_cast<py::ssize_t>(p.size())) throw ShapeError("offsets must match the pooled tensor");
    PoolIndices idx{p.shape(), std::vector<std::uint8_t>(offsets.data(), offsets.data() + offsets.size())};
    return from_tensor(unpool2x2(p, idx));
  });
  m.def("leaky_relu", [](const Array& x, double slope) { return from_tensor(leaky_relu(to_tensor(x), slope)); },
        py::arg("x"), py::arg("slope") = 0.01);

  // clustering
  m.def(
      "kmeans",
      [](const Array& x, std::size_t clusters, std::uint64_t seed, std::size_t restarts,
         std::size_t threads) {
        ClusterConfig cfg;
        cfg.clusters = clusters;
        cfg.seed = seed;
        cfg.restarts = restarts;
        return cluster_dict(kmeans(to_matrix(x), cfg, threads));
      },
      py::arg("x"), py::arg("clusters"), py::arg("seed") = 0, py::arg("restarts") = 10,
      py::arg("threads") = 1);
  m.def(
      "fuzzy_cmeans",
      [](const Array& x, std::size_t clusters, double m, std::uint64_t seed, std::size_t threads) {
        ClusterConfig cfg;
        cfg.clusters = clusters;
        cfg.fuzzifier = m;
        cfg.seed = seed;
        cfg.mode = ClusterMode::fuzzy;
        return cluster_dict(fuzzy_cmeans(to_matrix(x), cfg, threads));
      },
      py::arg("x"), py::arg("clusters"), py::arg("m") = 2.0, py::arg("seed") = 0,
      py::arg("threads") = 1);
  m.def("update_centroids", [](const Array& x, const Array& u, double m) {
    return from_matrix(update_centroids(to_matrix(x), to_matrix(u), m));
  });

  // PCA
  m.def(
      "pca",
      [](const Array& x, double threshold) {
        const Matrix data = to_matrix(x);
        const PcaModel pm = pca_fit(data, threshold);
        py::dict d;
        d["mean"] = pm.mean;
        d["eigenvalues"] = pm.eigenvalues;
        d["eigenvectors"] = from_matrix(pm.eigenvectors);
        d["retained"] = pm.retained;
        d["projected"] = from_matrix(pca_transform(pm, data));
        return d;
      },
      py::arg("x"), py::arg("threshold") = 0.9);

  // scoring
  m.def("score_map", [](const py::array_t<std::size_t>& pred, const py::array_t<std::size_t>& truth) {
    const MapScore s = score_map(to_labels(pred), to_labels(truth));
    py::dict d;
    d["accuracy"] = s.accuracy;
    d["class_recall"] = s.class_recall;
    d["mapping"] = s.mapping;
    return d;
  });

  // pipeline
  py::class_<Survey>(m, "Survey")
      .def_property_readonly("inlines", [](const Survey& s) { return s.grid.inlines; })
      .def_property_readonly("crosslines", [](const Survey& s) { return s.grid.crosslines; })
      .def_property_readonly("offsets", [](const Survey& s) { return s.grid.offsets; })
      .def_property_readonly("truth", [](const Survey& s) -> py::object {
        if (!s.truth) return py::none();
        return from_labels(*s.truth);
      })
      .def_property_readonly("cube", [](const Survey& s) {
        const auto& c = s.cube;
        Array out({c.inlines, c.crosslines, c.offsets, c.samples});
        std::copy(c.data.begin(), c.data.end(), out.mutable_data());
        return out;
      }, "Gathers as [inline, crossline, offset, sample]")
      .def("window", [](const Survey& s, std::size_t il, std::size_t xl) {
        return from_tensor(s.grid.at(il, xl).samples);
      })
      .def("save", [](const Survey& s, const std::string& path) { save_gather_cube(path, s.cube); });

  m.def(
      "synthesize",
      [](const py::dict& config) {
        auto syn = synthesize(make_config(config));
        return Survey{std::move(syn.grid), std::move(syn.cube), std::move(syn.labels)};
      },
      py::arg("config") = py::dict());
  m.def(
      "load_survey",
      [](const std::string& path, const py::dict& config) {
        const RunConfig cfg = make_config(config);
        GatherCube cube = load_gather_cube(path);
        SurveyGrid grid = cut_survey(cube, cfg.alignment, cfg.horizon_ms);
        return Survey{std::move(grid), std::move(cube), std::nullopt};
      },
      py::arg("path"), py::arg("config") = py::dict());

  py::class_<CaeModel>(m, "Model")
      .def_property_readonly("input_shape", [](const CaeModel& mdl) { return mdl.input_shape; })
      .def_property_readonly("layers", [](const CaeModel& mdl) { return mdl.layers.size(); })
      .def_property_readonly("feature_length", &CaeModel::feature_length)
      .def("filters", [](const CaeModel& mdl, std::size_t layer) { return from_tensor(mdl.layers.at(layer).filters); })
      .def("save", [](const CaeModel& mdl, const std::string& path) { save_checkpoint(path, mdl); })
      .def("to_bytes", [](const CaeModel& mdl) {
        std::ostringstream os;
        write_checkpoint(os, mdl);
        return py::bytes(os.str());
      })
      .def_static("load", [](const std::string& path) { return load_checkpoint(path); });

  m.def(
      "train",
      [](const Survey& s, const py::dict& config) {
        const RunConfig cfg = make_config(config);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train_on_grid(s.grid, cfg);
        }
        return py::make_tuple(std::move(r.model), r.loss_history);
      },
      py::arg("survey"), py::arg("config") = py::dict(),
      "Greedy layer-wise training; returns (model, loss history per layer)");
  m.def(
      "extract_features",
      [](const Survey& s, const CaeModel& mdl, std::size_t threads) {
        FeatureMatrix fm;
        {
          py::gil_scoped_release release;
          fm = assemble_feature_matrix(s.grid, mdl, threads);
        }
        return features_tuple(fm);
      },
      py::arg("survey"), py::arg("model"), py::arg("threads") = 1,
      "Returns (features [windows, length], [(inline, crossline), ...])");
  m.def("poststack_features", [](const Survey& s) { return features_tuple(poststack_features(s.grid)); });
  m.def(
      "pca_features",
      [](const Survey& s, const py::dict& config) {
        return features_tuple(pca_features(s.grid, make_config(config)));
      },
      py::arg("survey"), py::arg("config") = py::dict());
  m.def(
      "cluster_to_map",
      [](const Array& values, const std::vector<std::pair<std::size_t, std::size_t>>& keys,
         const py::dict& config, std::size_t threads) {
        return from_labels(cluster_to_map(to_features(values, keys), make_config(config), threads));
      },
      py::arg("features"), py::arg("keys"), py::arg("config") = py::dict(), py::arg("threads") = 1);
  m.def(
      "render_map",
      [](const py::array_t<std::size_t>& labels, std::size_t palette_size) {
        const LabelGrid g = to_labels(labels);
        return py::bytes(render_map(g, default_palette(palette_size ? palette_size : g.class_count())));
      },
      py::arg("labels"), py::arg("palette_size") = 0, "Binary PPM image of a label map");

  m.def(
      "gradient_suite",
      [](std::size_t configurations, std::uint64_t seed) {
        GradSuiteConfig cfg;
        cfg.configurations = configurations;
        cfg.seed = seed;
        const auto r = run_gradient_suite(cfg);
        py::dict d;
        d["components"] = r.total.components;
        d["failures"] = r.total.failures;
        d["max_relative_error"] = r.total.max_relative_error;
        d["passed"] = r.passed();
        return d;
      },
      py::arg("configurations") = 20, py::arg("seed") = 0);
}
