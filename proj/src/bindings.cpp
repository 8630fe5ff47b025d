// python bindings for the core operations
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mlgcp/artifacts.hpp"
#include "mlgcp/first_order.hpp"
#include "mlgcp/model_selection.hpp"
#include "mlgcp/nonparametrics.hpp"
#include "mlgcp/optimizer.hpp"

namespace py = pybind11;
using namespace mlgcp;

PYBIND11_MODULE(_core, m) {
  m.doc() = "multivariate log-Gaussian Cox process toolkit";

  py::class_<Window>(m, "Window")
      .def(py::init([](double x0, double y0, double x1, double y1) {
             Window w{x0, y0, x1, y1};
             w.validate();
             return w;
           }),
           py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"))
      .def_readonly("x0", &Window::x0)
      .def_readonly("y0", &Window::y0)
      .def_readonly("x1", &Window::x1)
      .def_readonly("y1", &Window::y1)
      .def("area", &Window::area);

  py::class_<Point>(m, "Point")
      .def(py::init([](double x, double y, int type) { return Point{x, y, type}; }),
           py::arg("x"), py::arg("y"), py::arg("type"))
      .def_readonly("x", &Point::x)
      .def_readonly("y", &Point::y)
      .def_readonly("type", &Point::type);

  py::class_<PointPattern>(m, "PointPattern")
      .def(py::init([](std::vector<Point> points, Window window, int n_types) {
             PointPattern p;
             p.points = std::move(points);
             p.window = window;
             p.n_types = n_types;
             p.validate();
             return p;
           }),
           py::arg("points"), py::arg("window"), py::arg("n_types"))
      .def_readonly("points", &PointPattern::points)
      .def_readonly("window", &PointPattern::window)
      .def_readonly("n_types", &PointPattern::n_types)
      .def("type_counts", &PointPattern::type_counts)
      .def("__len__", [](const PointPattern& p) { return p.points.size(); });

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init([](const Window& w, const Eigen::MatrixXd& values) {
             ScalarField f;
             f.window = w;
             f.nx = static_cast<int>(values.rows());
             f.ny = static_cast<int>(values.cols());
             f.values.assign(values.data(), values.data() + values.size());
             return f;
           }),
           py::arg("window"), py::arg("values"),
           "values[ix, iy] over cell centers, x-major")
      .def_readonly("window", &ScalarField::window)
      .def_readonly("nx", &ScalarField::nx)
      .def_readonly("ny", &ScalarField::ny)
      .def_property_readonly("values",
                             [](const ScalarField& f) {
                               return Eigen::Map<const Eigen::MatrixXd>(
                                   f.values.data(), f.nx, f.ny);
                             })
      .def("value_at", &ScalarField::value_at)
      .def("integral", &ScalarField::integral);

  py::class_<Theta>(m, "Theta")
      .def(py::init([](Eigen::MatrixXd alpha, Eigen::VectorXd xi, Eigen::VectorXd sigma2,
                       Eigen::VectorXd phi) {
             Theta t;
             t.alpha = std::move(alpha);
             t.xi = std::move(xi);
             t.sigma2 = std::move(sigma2);
             t.phi = std::move(phi);
             t.validate();
             return t;
           }),
           py::arg("alpha"), py::arg("xi"), py::arg("sigma2"), py::arg("phi"))
      .def_readonly("alpha", &Theta::alpha)
      .def_readonly("xi", &Theta::xi)
      .def_readonly("sigma2", &Theta::sigma2)
      .def_readonly("phi", &Theta::phi)
      .def("log_g", &Theta::log_g);

  py::class_<FirstOrder>(m, "FirstOrder")
      .def_readonly("beta", &FirstOrder::beta)
      .def_static("uniform", &FirstOrder::uniform);

  m.def("cross_pcf", &cross_pcf, py::arg("theta"), py::arg("i"), py::arg("j"),
        py::arg("r"));

  m.def(
      "simulate_grf",
      [](const Window& w, int nx, int ny, const std::string& family, double scale,
         std::uint64_t seed) {
        CorrelationModel c{family == "gaussian" ? CorrFamily::Gaussian
                                                : CorrFamily::Exponential,
                           scale};
        return simulate_grf(w, nx, ny, c, seed);
      },
      py::arg("window"), py::arg("nx"), py::arg("ny"), py::arg("family"),
      py::arg("scale"), py::arg("seed"));

  m.def(
      "simulate_mlgcp",
      [](const ScalarField& rho0, const Eigen::MatrixXd& gamma, const Theta& theta,
         const std::string& family, std::uint64_t seed) {
        SimulationSpec spec;
        spec.rho0 = rho0;
        spec.gamma = gamma;
        spec.theta = theta;
        spec.field_family =
            family == "gaussian" ? CorrFamily::Gaussian : CorrFamily::Exponential;
        spec.rng_seed = seed;
        return simulate_mlgcp(spec);
      },
      py::arg("rho0"), py::arg("gamma"), py::arg("theta"),
      py::arg("family") = "exponential", py::arg("seed") = 1);

  m.def(
      "estimate_beta",
      [](const PointPattern& pattern, int baseline) {
        return estimate_beta(pattern, {}, baseline).first_order;
      },
      py::arg("pattern"), py::arg("baseline"));

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("theta_hat", &FitResult::theta_hat)
      .def_readonly("objective", &FitResult::objective)
      .def_readonly("lambda_", &FitResult::lambda)
      .def_readonly("trace", &FitResult::trace)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("frozen_types", &FitResult::frozen_types)
      .def_property_readonly("zero_mask", [](const FitResult& f) {
        return Eigen::MatrixXd(f.zero_mask.cast<double>());
      });

  m.def(
      "fit",
      [](const PointPattern& pattern, const FirstOrder& fo, double R, int q,
         double lambda, std::uint64_t seed, int max_outer) {
        LikelihoodContext ctx(pattern, fo, R);
        OptimizerConfig cfg;
        cfg.init_length_scale = pattern.window.shorter_side();
        cfg.max_outer_iterations = max_outer;
        return fit(ctx, q, cfg, lambda, seed);
      },
      py::arg("pattern"), py::arg("first_order"), py::arg("R"), py::arg("q"),
      py::arg("lambda_") = 0.0, py::arg("seed") = 1, py::arg("max_outer") = 200);

  m.def(
      "neg_log_cl",
      [](const PointPattern& pattern, const FirstOrder& fo, double R,
         const Theta& theta) {
        LikelihoodContext ctx(pattern, fo, R);
        return neg_log_cl(ctx, theta);
      },
      py::arg("pattern"), py::arg("first_order"), py::arg("R"), py::arg("theta"));

  py::class_<CVResult>(m, "CVResult")
      .def_readonly("q_grid", &CVResult::q_grid)
      .def_readonly("lambda_grid", &CVResult::lambda_grid)
      .def_readonly("q_min", &CVResult::q_min)
      .def_readonly("q_1se", &CVResult::q_1se)
      .def_readonly("lambda_star", &CVResult::lambda_star);

  m.def(
      "select_q_lambda",
      [](const PointPattern& pattern, const FirstOrder& fo, double R,
         std::vector<int> q_grid, std::vector<double> lambda_grid, int K, int L,
         std::uint64_t seed) {
        LikelihoodContext ctx(pattern, fo, R);
        OptimizerConfig cfg;
        cfg.init_length_scale = pattern.window.shorter_side();
        return select_q_lambda(ctx, q_grid, lambda_grid, K, L, cfg, seed);
      },
      py::arg("pattern"), py::arg("first_order"), py::arg("R"), py::arg("q_grid"),
      py::arg("lambda_grid"), py::arg("K") = 5, py::arg("L") = 1, py::arg("seed") = 1);

  m.def("kernel_intensity", &kernel_intensity, py::arg("pattern"), py::arg("b"),
        py::arg("nx"), py::arg("ny"));
  m.def("estimate_rho0", &estimate_rho0, py::arg("pattern"), py::arg("first_order"),
        py::arg("b"), py::arg("nx"), py::arg("ny"));
  m.def("read_pattern_csv", &read_pattern_csv, py::arg("path"), py::arg("window"),
        py::arg("n_types"));
  m.def("write_pattern_csv", &write_pattern_csv, py::arg("pattern"), py::arg("path"));
}
