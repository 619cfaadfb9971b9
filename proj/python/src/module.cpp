#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fracdiff/checkpoint.hpp"
#include "fracdiff/datasets.hpp"
#include "fracdiff/error.hpp"
#include "fracdiff/fbm_noise.hpp"
#include "fracdiff/forward_model.hpp"
#include "fracdiff/metrics.hpp"
#include "fracdiff/pipeline.hpp"
#include "fracdiff/reverse_sampler.hpp"

namespace py = pybind11;
using namespace fracdiff;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::pair<Schedule, KernelTables> tables_for(double H, const std::string& kind, int m, double r, std::size_t K) {
  return build_normalized_tables(Schedule::make(parse_dynamics(kind)), build_space_grid(HurstIndex(H), m, r),
                                 {K, std::max<std::size_t>(1, K / 1000)});
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Generative diffusion with fractional noise: C++ core";

  static py::exception<Error> base(mod, "FracdiffError");
  static py::exception<Error> unsupported(mod, "UnsupportedError", base.ptr());
  static py::exception<Error> numerical(mod, "NumericalError", base.ptr());
  static py::exception<Error> config(mod, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
      switch (e.kind()) {
        case ErrorKind::Unsupported: py::set_error(unsupported, msg.c_str()); break;
        case ErrorKind::Numerical: py::set_error(numerical, msg.c_str()); break;
        case ErrorKind::Config:
        case ErrorKind::Parse:
        case ErrorKind::InvalidArgument: py::set_error(config, msg.c_str()); break;
        default: py::set_error(base, msg.c_str());
      }
    }
  });

  py::class_<SpaceGrid>(mod, "SpaceGrid")
      .def_readonly("H", &SpaceGrid::H)
      .def_readonly("m", &SpaceGrid::m)
      .def_readonly("r", &SpaceGrid::r)
      .def_readonly("x", &SpaceGrid::x)
      .def_readonly("q", &SpaceGrid::q)
      .def_readonly("eta", &SpaceGrid::eta)
      .def_property_readonly("c_h", &SpaceGrid::c_h)
      .def("to_json", &SpaceGrid::to_text);

  mod.def("space_grid", [](double H, int m, double r, double T) { return build_space_grid(HurstIndex(H), m, r, T); },
          py::arg("H"), py::arg("m") = 40, py::arg("r") = 1.35, py::arg("T") = 1.0,
          "Geometric speed grid and normalized weights of the OU approximation.");
  mod.def("fbm_covariance", [](double H, double s, double t) { return fbm_covariance(HurstIndex(H), s, t); });
  mod.def("approx_covariance", &approx_covariance, py::arg("grid"), py::arg("s"), py::arg("t"));

  mod.def(
      "simulate_noise",
      [](const SpaceGrid& grid, double T, std::size_t K, std::size_t n_paths, std::uint64_t seed,
         std::size_t record_stride, int threads) {
        NoiseOptions opt;
        opt.record_stride = record_stride;
        opt.threads = threads;
        std::vector<NoisePath> paths;
        {
          py::gil_scoped_release release;
          paths = simulate_noise(grid, uniform_time_grid(T, K), n_paths, seed, opt);
        }
        const auto n_rec = static_cast<Eigen::Index>(paths.front().times.size());
        RowMatrix w(static_cast<Eigen::Index>(n_paths), n_rec);
        for (std::size_t p = 0; p < n_paths; ++p) {
          for (Eigen::Index k = 0; k < n_rec; ++k) w(static_cast<Eigen::Index>(p), k) = paths[p].w(k, 0);
        }
        return py::make_tuple(paths.front().times, w);
      },
      py::arg("grid"), py::arg("T") = 1.0, py::arg("K") = 10000, py::arg("n_paths") = 100, py::arg("seed") = 0,
      py::arg("record_stride") = 100, py::arg("threads") = 1,
      "Returns (times, W) with W[path, record] of the approximate noise.");

  py::class_<KernelTables>(mod, "KernelTables")
      .def_readonly("H", &KernelTables::H)
      .def_readonly("times", &KernelTables::times)
      .def_readonly("sigma2", &KernelTables::sigma2)
      .def_readonly("c_values", &KernelTables::c_vals)
      .def("c", &KernelTables::c)
      .def("var", &KernelTables::var)
      .def("rho", &KernelTables::rho)
      .def("alpha", &alpha_at, py::arg("t"), py::arg("s"));

  mod.def(
      "kernel_tables",
      [](double H, const std::string& kind, int m, double r, std::size_t K) { return tables_for(H, kind, m, r, K).second; },
      py::arg("H"), py::arg("kind") = "FVP", py::arg("m") = 40, py::arg("r") = 1.35, py::arg("K") = 10000,
      "Perturbation-kernel tables of the normalized schedule.");

  mod.def(
      "sample_marginal",
      [](const KernelTables& tables, const Eigen::MatrixXd& x0, const Eigen::VectorXd& t, std::uint64_t seed) {
        Engine e = make_engine(seed);
        const auto b = sample_marginal(tables, x0, t, e);
        return py::make_tuple(b.x_t, b.xi);
      },
      py::arg("tables"), py::arg("x0"), py::arg("t"), py::arg("seed") = 0);

  mod.def(
      "sample_gaussian_reference",
      [](double H, const std::string& kind, const std::string& method, std::size_t n, int steps, std::uint64_t seed, int dim) {
        const auto [sched, tb] = tables_for(H, kind, 40, 1.35, 10000);
        GaussianScore gs{&tb};
        SamplerConfig cfg;
        cfg.method = parse_method(method);
        cfg.n_samples = n;
        cfg.n_steps = steps;
        cfg.seed = seed;
        Eigen::MatrixXd out;
        {
          py::gil_scoped_release release;
          out = sample(tb, sched.coefficients().mu, [&](const Eigen::MatrixXd& x, double t) { return gs.score(x, t); },
                       ScoreSource::Analytic, dim, cfg);
        }
        return Eigen::MatrixXd(out.transpose());
      },
      py::arg("H"), py::arg("kind") = "FVP", py::arg("method") = "SDE", py::arg("n") = 1000, py::arg("steps") = 1000,
      py::arg("seed") = 0, py::arg("dim") = 1,
      "Reverse sampling of N(0, I) data with its exact marginal score. Rows are samples.");

  mod.def(
      "half_moons", [](std::size_t n, double noise, std::uint64_t seed) { return half_moons(n, noise, seed).raw(); },
      py::arg("n"), py::arg("noise_std") = kDefaultMoonNoise, py::arg("seed") = 0);

  mod.def(
      "train",
      [](const std::string& config_text) {
        const RunConfig cfg = RunConfig::parse(config_text);
        std::string path;
        {
          py::gil_scoped_release release;
          path = cmd_train(cfg);
        }
        return path;
      },
      py::arg("config"), "Trains from key=value config text and returns the checkpoint path.");

  mod.def(
      "sample",
      [](const std::string& checkpoint, const std::string& method, std::size_t n, int steps, std::uint64_t seed) {
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        SamplerConfig cfg;
        cfg.method = parse_method(method);
        cfg.n_samples = n;
        cfg.n_steps = steps;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return sample_checkpoint(ckpt, cfg);
      },
      py::arg("checkpoint"), py::arg("method") = "SDE", py::arg("n") = 1000, py::arg("steps") = 1000,
      py::arg("seed") = 0, "Samples in original coordinates, one per row.");

  mod.def(
      "evaluate",
      [](const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, std::uint64_t seed) {
        MetricConfig cfg;
        cfg.seed = seed;
        cfg.vendi.seed = seed;
        const auto r = evaluate(real, gen, cfg);
        py::dict d;
        d["wsd"] = r.wsd;
        d["ip"] = r.ip;
        d["ir"] = r.ir;
        d["vs"] = r.vs;
        return d;
      },
      py::arg("real"), py::arg("gen"), py::arg("seed") = 0, "WSD, IP, IR and VS as a dict.");
  mod.def(
      "sliced_wasserstein",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int n_slices, std::uint64_t seed) {
        Engine e = make_engine(seed);
        return sliced_wasserstein(a, b, n_slices, e);
      },
      py::arg("real"), py::arg("gen"), py::arg("n_slices") = 256, py::arg("seed") = 0);
  mod.def(
      "vendi_score",
      [](const Eigen::MatrixXd& gen, const std::string& kernel, double bandwidth) {
        VendiOptions o;
        o.kernel = kernel == "rbf" ? VendiKernel::Rbf : VendiKernel::Cosine;
        o.bandwidth = bandwidth;
        return vendi_score(gen, o);
      },
      py::arg("gen"), py::arg("kernel") = "cosine", py::arg("bandwidth") = 0.0);
}
