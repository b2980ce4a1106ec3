#include "aof/attack.hpp"
#include "aof/classifier.hpp"
#include "aof/dataset.hpp"
#include "aof/defense.hpp"
#include "aof/error.hpp"
#include "aof/eval.hpp"
#include "aof/model_io.hpp"
#include "aof/spectral.hpp"
#include "aof/train.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace aof;

namespace {

std::vector<PointCloud> to_clouds(const std::vector<Points>& points, const std::vector<int>& labels) {
  if (!labels.empty() && labels.size() != points.size())
    throw InvalidArgument("labels and clouds differ in length");
  std::vector<PointCloud> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out.emplace_back(points[i], labels.empty() ? std::optional<int>() : labels[i]);
  return out;
}

py::dict eval_dict(const EvalReport& r) {
  py::dict d;
  d["asr"] = r.asr;
  d["total"] = r.total;
  d["correct_clean"] = r.correct_clean;
  d["attacked"] = r.attacked;
  d["fooled"] = r.fooled;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Spectral point cloud attacks: graph spectra, a PointNet-style classifier, attacks and defenses.";
  mod.attr("__version__") = AOF_VERSION;
  mod.attr("DEFAULT_POINTS") = kDefaultPoints;

  auto base = py::register_exception<Error>(mod, "AofError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(mod, "InvalidArgument", base.ptr());
  py::register_exception<IoError>(mod, "IoError", base.ptr());
  py::register_exception<ParseError>(mod, "ParseError", base.ptr());
  py::register_exception<DegenerateInput>(mod, "DegenerateInput", base.ptr());

  mod.def(
      "laplacian",
      [](const Points& p, int k, std::optional<double> bandwidth) { return laplacian(build_knn_graph(p, k, bandwidth)); },
      py::arg("points"), py::arg("k") = 10, py::arg("bandwidth") = py::none(),
      "Combinatorial Laplacian of the symmetric kNN graph with Gaussian weights.");

  mod.def(
      "spectral_basis",
      [](const Points& p, int k, std::optional<double> bandwidth) {
        const SpectralBasis b = spectral_basis(p, k, bandwidth);
        return py::make_tuple(b.eigenvalues(), b.eigenvectors());
      },
      py::arg("points"), py::arg("k") = 10, py::arg("bandwidth") = py::none(),
      "Ascending eigenvalues and orthonormal eigenvectors (columns) of the graph Laplacian.");

  mod.def(
      "lfc_split",
      [](const Points& p, Eigen::Index m, int k, std::optional<double> bandwidth) {
        const FrequencySplit s = lfc_split(PointCloud(p), m, k, bandwidth);
        return py::make_tuple(s.lfc.points(), s.hfc.points());
      },
      py::arg("points"), py::arg("m"), py::arg("k") = 10, py::arg("bandwidth") = py::none(),
      "Low- and high-frequency parts of a cloud; they sum to the input.");

  py::class_<ModelDims>(mod, "ModelDims")
      .def(py::init<int, int, int, int>(), py::arg("h1") = 64, py::arg("h2") = 128, py::arg("h3") = 64,
           py::arg("classes") = 5)
      .def_readwrite("h1", &ModelDims::h1)
      .def_readwrite("h2", &ModelDims::h2)
      .def_readwrite("h3", &ModelDims::h3)
      .def_readwrite("classes", &ModelDims::classes);

  py::class_<Classifier>(mod, "Classifier")
      .def_static("random", &Classifier::random, py::arg("dims"), py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"))
      .def("save", [](const Classifier& m, const std::filesystem::path& p) { save_model(m, p); }, py::arg("path"))
      .def_property_readonly("dims", &Classifier::dims)
      .def_property_readonly("parameter_count", &Classifier::parameter_count)
      .def("logits", [](const Classifier& m, const Points& p) { return logits(m, p); }, py::arg("points"))
      .def("predict", [](const Classifier& m, const Points& p) { return predict(m, p); }, py::arg("points"));

  mod.def(
      "shape_dataset",
      [](int per_class, Eigen::Index n_points, std::uint64_t seed) {
        const LabeledDataset ds = generate_shape_dataset(per_class, n_points, seed);
        py::list items;
        for (std::size_t i = 0; i < ds.size(); ++i)
          items.append(py::make_tuple(ds.clouds[i].points(), *ds.clouds[i].label,
                                      ds.splits[i] == Split::Train ? "train" : "test"));
        return py::make_tuple(items, ds.class_names);
      },
      py::arg("per_class"), py::arg("n_points") = kDefaultPoints, py::arg("seed") = 0,
      "Synthetic shape dataset as ([(points, label, split)], class_names).");

  mod.def(
      "train_on_shapes",
      [](int per_class, Eigen::Index n_points, const ModelDims& dims, int epochs, std::uint64_t seed) {
        const LabeledDataset ds = generate_shape_dataset(per_class, n_points, seed);
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.seed = seed;
        py::gil_scoped_release release;
        TrainResult r = train(ds, cfg, dims);
        py::gil_scoped_acquire acquire;
        return py::make_tuple(std::move(r.model), r.report.test_accuracy);
      },
      py::arg("per_class"), py::arg("n_points"), py::arg("dims"), py::arg("epochs") = 30, py::arg("seed") = 0,
      "Trains a classifier on a freshly generated shape dataset; returns (model, test accuracy).");

  mod.def(
      "attack",
      [](const Classifier& model, const Points& p, int label, const std::string& variant, Eigen::Index m, double gamma,
         double eps_inf, int iters, int inits, double lr, double kappa, int k, std::optional<int> target,
         std::uint64_t seed) {
        AttackConfig cfg;
        if (variant == "aof")
          cfg.variant = AttackVariant::Aof;
        else if (variant == "baseline")
          cfg.variant = AttackVariant::BaselineFullSpectrum;
        else
          throw InvalidArgument("unknown variant '" + variant + "'");
        cfg.m = m;
        cfg.gamma = gamma;
        cfg.eps_inf = eps_inf;
        cfg.n_iter = iters;
        cfg.inits = inits;
        cfg.learning_rate = lr;
        cfg.kappa = kappa;
        cfg.k = k;
        cfg.mode.target = target;
        const PointCloud cloud(p, label);
        py::gil_scoped_release release;
        const AttackResult r = run_attack(model, cloud, cfg, seed);
        py::gil_scoped_acquire acquire;
        py::dict d;
        d["adversarial"] = r.adversarial.points();
        d["perturbation"] = r.perturbation;
        d["success"] = r.success;
        d["victim_pred"] = r.victim_pred;
        d["iterations_used"] = r.iterations_used;
        d["final_loss"] = r.final_loss;
        d["m_used"] = r.m_used;
        return d;
      },
      py::arg("model"), py::arg("points"), py::arg("label"), py::arg("variant") = "aof", py::arg("m") = 100,
      py::arg("gamma") = 0.25, py::arg("eps_inf") = 0.18, py::arg("iters") = 200, py::arg("inits") = 2,
      py::arg("lr") = 0.01, py::arg("kappa") = 30.0, py::arg("k") = 10, py::arg("target") = py::none(),
      py::arg("seed") = 0);

  mod.def(
      "srs", [](const Points& p, Eigen::Index keep, std::uint64_t seed) { return srs(PointCloud(p), keep, seed).points(); },
      py::arg("points"), py::arg("keep"), py::arg("seed") = 0, "Keeps a uniform random subset of `keep` points.");
  mod.def(
      "sor", [](const Points& p, int k, double alpha) { return sor(PointCloud(p), k, alpha).points(); },
      py::arg("points"), py::arg("k") = 2, py::arg("alpha") = 1.1, "Statistical outlier removal.");

  mod.def(
      "asr",
      [](const Classifier& model, const std::vector<Points>& clean, const std::vector<int>& labels,
         const std::vector<Points>& adversarial) {
        return eval_dict(asr(model, to_clouds(clean, labels), to_clouds(adversarial, {})));
      },
      py::arg("model"), py::arg("clean"), py::arg("labels"), py::arg("adversarial"),
      "Attack success rate over the clouds the model classifies correctly.");
}
