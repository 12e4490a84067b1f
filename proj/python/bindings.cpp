// Python bindings for the masked-correlation core: centering and scoring,
// mask projection and ascent, and the synthetic data generator. Heavy
// lifting stays in the C++ library; these wrappers only translate between
// numpy arrays and the library types.

#include "pcicorr/correlation.hpp"
#include "pcicorr/eval.hpp"
#include "pcicorr/features.hpp"
#include "pcicorr/mask.hpp"
#include "pcicorr/rng.hpp"
#include "pcicorr/synthgen.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>

namespace py = pybind11;
using namespace pcicorr;

namespace {

FeatureBatch as_batch(const Eigen::MatrixXd& data, int modality_id) {
  return FeatureBatch{data, modality_id};
}

PgdConfig make_config(double budget, double step_size, double tolerable_error,
                      int max_iterations, double stop_tolerance) {
  PgdConfig cfg;
  cfg.step_size = step_size;
  cfg.sum_threshold = budget;
  cfg.tolerable_error =
      tolerable_error > 0.0 ? tolerable_error : 0.01 * budget;
  cfg.max_iterations = max_iterations;
  cfg.stop_tolerance = stop_tolerance;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_pcicorr, m) {
  m.doc() = "masked pairwise feature correlation (native core)";
  m.attr("__version__") = "0.1.0";

  m.def(
      "center",
      [](const Eigen::MatrixXd& features) {
        return center(as_batch(features, 0)).data;
      },
      py::arg("features"),
      "Subtract the per-column mean from every row (exact to a second "
      "correction pass). Rows are samples, columns are feature dimensions.");

  m.def(
      "covariance",
      [](const Eigen::MatrixXd& features) {
        return covariance(as_batch(features, 0)).matrix;
      },
      py::arg("features"),
      "Unbiased covariance (divisor n - 1) of a centered batch.");

  m.def(
      "soft_hgr",
      [](const Eigen::MatrixXd& f, const Eigen::MatrixXd& g) {
        return soft_hgr(as_batch(f, 0), as_batch(g, 1)).value;
      },
      py::arg("f"), py::arg("g"),
      "Whitening-free correlation score of two centered batches: the mean "
      "paired inner product minus half the trace of the covariance "
      "product.");

  m.def(
      "masked_corr_raw",
      [](const Eigen::MatrixXd& f, const Eigen::MatrixXd& g,
         const Eigen::VectorXd& weights) {
        return masked_corr_raw(as_batch(f, 0), as_batch(g, 1), weights);
      },
      py::arg("f"), py::arg("g"), py::arg("weights"),
      "Masked correlation of raw weights, with no feasibility constraint.");

  m.def(
      "masked_corr",
      [](const Eigen::MatrixXd& f, const Eigen::MatrixXd& g,
         const Eigen::VectorXd& weights, double budget, double slack) {
        const PciMask mask{weights, budget, {0, 1}};
        return masked_corr(as_batch(f, 0), as_batch(g, 1), mask, slack).value;
      },
      py::arg("f"), py::arg("g"), py::arg("weights"), py::arg("budget"),
      py::arg("slack") = -1.0,
      "Masked correlation of a feasible mask; the weights must lie in "
      "[0, 1] with sum at most budget + slack (slack < 0 means 1% of the "
      "budget).");

  m.def(
      "mask_gradient",
      [](const Eigen::MatrixXd& f, const Eigen::MatrixXd& g,
         const Eigen::VectorXd& weights) {
        const PciMask mask{weights, static_cast<double>(weights.size()),
                           {0, 1}};
        return mask_gradient(as_batch(f, 0), as_batch(g, 1), mask);
      },
      py::arg("f"), py::arg("g"), py::arg("weights"),
      "Ascent gradient of the masked correlation at the given weights.");

  m.def(
      "project",
      [](const Eigen::VectorXd& weights, double budget,
         double tolerable_error) {
        const PgdConfig cfg =
            make_config(budget, 2.0, tolerable_error, 500, 1e-6);
        const Projection proj = project(weights, cfg);
        py::dict out;
        out["weights"] = proj.weights;
        out["sum"] = proj.sum;
        out["shift"] = proj.shift;
        out["iterations"] = proj.iterations;
        return out;
      },
      py::arg("weights"), py::arg("budget"),
      py::arg("tolerable_error") = -1.0,
      "Project raw weights onto {w : 0 <= w_i <= 1, sum w <= budget}; the "
      "achieved sum lands within tolerable_error of the budget when the "
      "sum constraint binds (a negative tolerance means budget / 100).");

  m.def(
      "optimize_mask",
      [](const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, double budget,
         double step_size, double tolerable_error, int max_iterations,
         double stop_tolerance, std::optional<Eigen::VectorXd> initial) {
        const PgdConfig cfg = make_config(budget, step_size, tolerable_error,
                                          max_iterations, stop_tolerance);
        const PciMask init{
            initial ? *initial : Eigen::VectorXd::Zero(f.cols()),
            cfg.sum_threshold,
            {0, 1}};
        const OptimizeResult result =
            optimize_mask(as_batch(f, 0), as_batch(g, 1), init, cfg);
        py::dict out;
        out["weights"] = result.mask.weights;
        out["loss_trace"] = result.loss_trace;
        out["iterations"] = result.iterations;
        out["converged"] = result.converged;
        return out;
      },
      py::arg("f"), py::arg("g"), py::arg("budget"),
      py::arg("step_size") = 2.0, py::arg("tolerable_error") = -1.0,
      py::arg("max_iterations") = 500, py::arg("stop_tolerance") = 1e-6,
      py::arg("initial") = py::none(),
      "Maximize the masked correlation of two centered batches over the "
      "feasible mask set by projected gradient ascent (zero-initialized "
      "unless an initial feasible mask is given). Returns the final "
      "weights, the loss trace, and convergence information.");

  m.def(
      "generate",
      [](int modalities, int raw_dim, int feature_dim, long samples,
         const std::string& subsets, double private_noise, int classes,
         std::uint64_t seed) {
        SynthSpec spec;
        spec.modalities = modalities;
        spec.raw_dim = raw_dim;
        spec.feature_dim = feature_dim;
        spec.samples = samples;
        spec.subsets = parse_subsets(subsets);
        spec.private_noise = private_noise;
        spec.classes = classes;
        spec.seed = seed;
        const Dataset data = generate(spec);
        py::dict planted;
        for (int i = 0; i < modalities; ++i)
          for (int j = i + 1; j < modalities; ++j)
            planted[py::make_tuple(i, j)] = spec.planted_latent_dims(i, j);
        py::dict out;
        out["observations"] = data.observations;
        out["labels"] = data.labels;
        out["rotations"] = data.truth.rotations;
        out["planted"] = planted;
        return out;
      },
      py::arg("modalities") = 4, py::arg("raw_dim") = 16,
      py::arg("feature_dim") = 16, py::arg("samples") = 4096,
      py::arg("subsets") = "0,1:2:0.8; 2,3:2:0.8; 0,1,2,3:4:0.65",
      py::arg("private_noise") = 0.25, py::arg("classes") = 4,
      py::arg("seed") = 7,
      "Deterministically generate a planted multi-modal dataset. Returns "
      "per-modality observations, labels, the private rotations, and the "
      "planted latent dimensions of every modality pair.");

  m.def("gaussian_hgr_oracle", &gaussian_hgr_oracle, py::arg("rho"),
        "Maximal correlation of a bivariate Gaussian with correlation rho.");

  m.def(
      "derive_seed",
      [](std::uint64_t master, const std::string& component) {
        return derive_seed(master, component);
      },
      py::arg("master"), py::arg("component"),
      "Stable child seed for a named component of a seeded computation.");
}
