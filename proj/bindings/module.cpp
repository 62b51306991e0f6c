#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wavedp/experiment.hpp"
#include "wavedp/io.hpp"
#include "wavedp/losses.hpp"
#include "wavedp/oracle.hpp"
#include "wavedp/sobol.hpp"
#include "wavedp/trainer.hpp"

namespace py = pybind11;
using namespace wavedp;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor tensor_from_array(const DoubleArray& a) {
    std::vector<int64_t> shape;
    for (py::ssize_t d = 0; d < a.ndim(); ++d) shape.push_back(a.shape(d));
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor(std::move(shape), std::move(data));
}

py::array_t<double> array_from_tensor(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<double> out(shape);
    std::copy(t.data(), t.data() + t.size(), out.mutable_data());
    return out;
}

py::array_t<double> array_from_sequence(const FieldSequence& seq) {
    py::array_t<double> out({static_cast<py::ssize_t>(seq.frames.size()),
                             static_cast<py::ssize_t>(seq.m), static_cast<py::ssize_t>(seq.m)});
    double* dst = out.mutable_data();
    for (const Tensor& f : seq.frames) {
        std::copy(f.data(), f.data() + f.size(), dst);
        dst += f.size();
    }
    return out;
}

FieldSequence sequence_from_array(const DoubleArray& a, double dr, double dt) {
    if (a.ndim() != 3 || a.shape(1) != a.shape(2))
        throw std::invalid_argument("field array must be (frames, m, m)");
    FieldSequence seq;
    seq.m = a.shape(1);
    seq.dr = dr;
    seq.dt = dt;
    const double* src = a.data();
    for (py::ssize_t n = 0; n < a.shape(0); ++n) {
        Tensor f({seq.m, seq.m});
        std::copy(src, src + f.size(), f.data());
        src += f.size();
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

SensorSet sensors_from_list(const std::vector<std::pair<int64_t, int64_t>>& ij) {
    SensorSet out;
    for (const auto& [i, j] : ij) out.indices.push_back({i, j});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Differentiable 2-D wave solver and sound field reconstruction core";

    py::class_<CourantReport>(m, "CourantReport")
        .def_readonly("ok", &CourantReport::ok)
        .def_readonly("ratio", &CourantReport::ratio);

    m.def(
        "courant_check",
        [](double c, double dt, double dr) { return courant_check({c, dt, 1, dr}); },
        py::arg("c"), py::arg("dt"), py::arg("dr"),
        "2-D stability check; ok iff c*dt*sqrt(2) < dr");

    m.def(
        "simulate",
        [](const DoubleArray& p0, double c, double dt, double dr, int64_t n_frames,
           const std::string& boundary) {
            Tensor t = tensor_from_array(p0);
            if (t.rank() != 2 || t.rows() != t.cols())
                throw std::invalid_argument("p0 must be a square matrix");
            const int64_t m = t.rows();
            const Boundary b = boundary == "rigid" ? Boundary::Rigid : Boundary::Absorbing;
            const SolverConfig cfg = SolverConfig::checked(c, dt, n_frames, dr, b);
            return array_from_sequence(simulate(Grid2D(m, dr, std::move(t)), cfg));
        },
        py::arg("p0"), py::arg("c"), py::arg("dt"), py::arg("dr"), py::arg("n_frames"),
        py::arg("boundary") = "absorbing",
        "Explicit rollout of the wave equation; returns (n_frames, m, m)");

    m.def(
        "gaussian_pulse_pressure",
        [](double r, double t, double sigma, double amplitude) {
            return gaussian_pulse_pressure({0.0, 0.0, amplitude, sigma}, r, t);
        },
        py::arg("r"), py::arg("t"), py::arg("sigma") = 0.02, py::arg("amplitude") = 1.0,
        "Free-field pressure of a Gaussian initial pulse at radius r, time t");

    m.def("bessel_j0", &bessel_j0, py::arg("x"));

    m.def(
        "nmse",
        [](const DoubleArray& model, const DoubleArray& ref) {
            return nmse(tensor_from_array(model), tensor_from_array(ref));
        },
        py::arg("model"), py::arg("reference"),
        "Squared error normalized by the reference energy");

    m.def(
        "sample_sensors",
        [](int count, double min_dist, int64_t m, double extent, uint64_t seed) {
            GridSpec grid{m, extent / static_cast<double>(m - 1)};
            SensorRegion region;
            SensorSet set = sample_sensors(count, region, min_dist, grid, seed);
            std::vector<std::pair<int64_t, int64_t>> out;
            for (const auto& ij : set.indices) out.emplace_back(ij[0], ij[1]);
            return out;
        },
        py::arg("count"), py::arg("min_dist"), py::arg("m"), py::arg("extent") = 1.0,
        py::arg("seed") = 0);

    m.def(
        "sobol",
        [](int64_t count, int dims) {
            SobolSequence seq(dims);
            std::vector<double> lo(static_cast<size_t>(dims), 0.0);
            std::vector<double> hi(static_cast<size_t>(dims), 1.0);
            return array_from_tensor(seq.next_batch(count, lo, hi));
        },
        py::arg("count"), py::arg("dims") = 2);

    py::class_<MlpParams>(m, "Siren")
        .def(py::init([](const std::vector<int64_t>& widths, double omega0, uint64_t seed) {
                 return siren_init(widths, omega0, seed);
             }),
             py::arg("widths"), py::arg("omega0") = 30.0, py::arg("seed") = 1)
        .def_property_readonly("param_count", &MlpParams::param_count)
        .def_property_readonly("omega0", [](const MlpParams& p) { return p.omega0; })
        .def(
            "__call__",
            [](const MlpParams& p, const DoubleArray& coords, double extent, double duration) {
                Tensor c = tensor_from_array(coords);
                const InputBox box =
                    c.cols() == 2 ? InputBox::square(extent) : InputBox::cube(extent, duration);
                return array_from_tensor(siren_forward(p, c, box));
            },
            py::arg("coords"), py::arg("extent") = 1.0, py::arg("duration") = 0.343)
        .def("save", [](const MlpParams& p, const std::string& path) { write_mlp(path, p); })
        .def_static("load", [](const std::string& path) { return read_mlp(path); });

    py::class_<LossRow>(m, "LossRow")
        .def_readonly("iteration", &LossRow::iteration)
        .def_readonly("total", &LossRow::total)
        .def_readonly("data", &LossRow::data)
        .def_readonly("sp", &LossRow::sp)
        .def_readonly("lambda_data", &LossRow::lambda_data)
        .def_readonly("lambda_sp", &LossRow::lambda_sp);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("params", &TrainResult::params)
        .def_readonly("wall_seconds", &TrainResult::wall_seconds)
        .def_readonly("iterations", &TrainResult::iterations)
        .def_property_readonly("log", [](const TrainResult& r) { return r.log; });

    m.def(
        "train_dp",
        [](const DoubleArray& observations,
           const std::vector<std::pair<int64_t, int64_t>>& sensors, int64_t grid_m,
           double extent, double duration, double c, int64_t n_iters, double lr,
           uint64_t net_seed) {
            Measurements obs;
            obs.values = tensor_from_array(observations);
            DpRunConfig cfg;
            cfg.grid_m = grid_m;
            cfg.extent = extent;
            cfg.n_samples = obs.sample_count();
            cfg.duration = duration;
            cfg.c = c;
            cfg.n_iters = n_iters;
            cfg.lr = lr;
            cfg.net_seed = net_seed;
            return dp_train(cfg, obs, sensors_from_list(sensors));
        },
        py::arg("observations"), py::arg("sensors"), py::arg("grid_m"), py::arg("extent") = 1.0,
        py::arg("duration") = 0.343, py::arg("c") = 1.0, py::arg("n_iters") = 1000,
        py::arg("lr") = 1e-4, py::arg("net_seed") = 1,
        "Fit the initial condition through the differentiable rollout; "
        "observations is (n_sensors, n_samples)");

    m.def(
        "rollout",
        [](const MlpParams& params, int64_t grid_m, double extent, int64_t n_samples,
           double duration, double c, int64_t upsample) {
            DpRunConfig cfg;
            cfg.grid_m = grid_m;
            cfg.extent = extent;
            cfg.n_samples = n_samples;
            cfg.duration = duration;
            cfg.c = c;
            return array_from_sequence(dp_rollout(params, cfg, upsample));
        },
        py::arg("params"), py::arg("grid_m"), py::arg("extent") = 1.0, py::arg("n_samples") = 50,
        py::arg("duration") = 0.343, py::arg("c") = 1.0, py::arg("upsample") = 1);

    m.def(
        "write_field",
        [](const std::string& path, const DoubleArray& frames, double dr, double dt) {
            write_field(path, sequence_from_array(frames, dr, dt));
        },
        py::arg("path"), py::arg("frames"), py::arg("dr"), py::arg("dt"));

    m.def("read_field", [](const std::string& path) {
        FieldSequence seq = read_field(path);
        return py::make_tuple(array_from_sequence(seq), seq.dr, seq.dt);
    });
}
