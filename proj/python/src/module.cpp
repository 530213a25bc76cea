#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "foilgen/aero.hpp"
#include "foilgen/dataset.hpp"
#include "foilgen/error.hpp"
#include "foilgen/geometry.hpp"
#include "foilgen/joukowski_inverse.hpp"
#include "foilgen/metrics.hpp"
#include "foilgen/pipeline.hpp"
#include "foilgen/vae.hpp"

namespace py = pybind11;
using namespace foilgen;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;

Points to_array(const geometry::AirfoilShape& s) {
    Points out({static_cast<py::ssize_t>(s.size()), py::ssize_t{2}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < s.size(); ++i) {
        v(i, 0) = s[i].x;
        v(i, 1) = s[i].y;
    }
    return out;
}

geometry::AirfoilShape from_array(const Points& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw ShapeError("expected an (n, 2) array of points");
    auto v = a.unchecked<2>();
    std::vector<geometry::Point2> pts(static_cast<std::size_t>(a.shape(0)));
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {v(i, 0), v(i, 1)};
    return geometry::AirfoilShape(std::move(pts));
}

Matrix flat_rows(const std::vector<Points>& shapes) {
    if (shapes.empty()) return {};
    const auto first = from_array(shapes.front());
    Matrix m(static_cast<Eigen::Index>(shapes.size()), static_cast<Eigen::Index>(2 * first.size()));
    for (std::size_t r = 0; r < shapes.size(); ++r) {
        const auto flat = geometry::flatten(from_array(shapes[r]));
        if (flat.size() != static_cast<std::size_t>(m.cols())) throw ShapeError("shapes differ in point count");
        for (std::size_t c = 0; c < flat.size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[c];
    }
    return m;
}

py::dict roundness_dict(const jinv::InverseFitResult& r, bool converged) {
    py::dict d;
    d["w"] = r.w;
    d["c_j"] = r.c_j;
    d["ell"] = r.ell;
    d["m"] = r.m;
    d["circle"] = py::make_tuple(r.fit.a, r.fit.b, r.fit.r_fit);
    d["branch"] = r.branch;
    d["converged"] = converged;
    return d;
}

vae::ModelConfig model_config(const std::string& kind, int latent_dim, int points, bool use_label,
                              const std::vector<int>& hidden, const std::string& activation) {
    vae::ModelConfig c;
    c.kind = vae::latent_kind_from_string(kind);
    c.latent_dim = latent_dim;
    c.points = points;
    c.use_label = use_label;
    c.hidden = hidden;
    c.hidden_activation = nn::activation_from_string(activation);
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Airfoil datasets, lift labels, roundness and conditional VAEs";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<DegenerateShapeError>(m, "DegenerateShapeError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<ModelError>(m, "ModelError", base.ptr());
    auto format = py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<ChecksumError>(m, "ChecksumError", format.ptr());

    m.attr("DEFAULT_POINTS") = geometry::kDefaultPoints;

    m.def(
        "naca4",
        [](double m_camber, double p_pos, double t_thick, std::size_t n) {
            return to_array(geometry::naca4_profile({m_camber, p_pos, t_thick}, n));
        },
        py::arg("m"), py::arg("p"), py::arg("t"), py::arg("n") = geometry::kDefaultPoints,
        "NACA 4-digit section as an (n, 2) array, trailing edge first, closed.");
    m.def(
        "joukowski",
        [](double a, double b, double r, std::size_t n) {
            const auto j = geometry::joukowski_airfoil({a, b, r}, n);
            return py::make_tuple(to_array(j.shape), j.ell, j.m);
        },
        py::arg("a"), py::arg("b"), py::arg("r") = 1.1, py::arg("n") = geometry::kDefaultPoints,
        "Joukowski section for circle centre (a, b) and radius r. Returns (points, ell, m).");
    m.def(
        "resample", [](const Points& p, std::size_t n) { return to_array(geometry::resample(from_array(p).points(), n)); },
        py::arg("points"), py::arg("n"));
    m.def(
        "flatten", [](const Points& p) { return geometry::flatten(from_array(p)); }, py::arg("points"),
        "Flat layout (x_1..x_n, y_1..y_n).");
    m.def(
        "unflatten", [](const std::vector<double>& s) { return to_array(geometry::unflatten(s, s.size() / 2)); },
        py::arg("flat"));
    m.def(
        "invariant_violation", [](const Points& p) { return geometry::invariant_violation(from_array(p)); },
        py::arg("points"), "None for a valid outline, else a description of the first violated invariant.");

    m.def(
        "lift_coefficient",
        [](const Points& p, double alpha) { return aero::solve_lift(from_array(p), aero::FlowCondition{alpha}).c_l; },
        py::arg("points"), py::arg("alpha") = 5.0, "Panel-method lift coefficient at alpha degrees.");
    m.def(
        "pressure",
        [](const Points& p, double alpha) {
            const auto s = aero::solve_lift(from_array(p), aero::FlowCondition{alpha});
            return py::make_tuple(s.c_l, s.gamma, s.cp);
        },
        py::arg("points"), py::arg("alpha") = 5.0, "Returns (c_l, gamma per node, cp per panel).");

    m.def(
        "roundness",
        [](const Points& p) {
            try {
                return roundness_dict(jinv::roundness(from_array(p)), true);
            } catch (const jinv::RoundnessError& e) {
                return roundness_dict(e.best(), false);
            }
        },
        py::arg("points"), "Inverse Joukowski fit. w is the mean squared circle residual.");

    m.def(
        "shape_variation", [](const std::vector<Points>& shapes) { return metrics::shape_variation(flat_rows(shapes)); },
        py::arg("shapes"));
    m.def(
        "set_distance",
        [](const std::vector<Points>& a, const std::vector<Points>& b) {
            return metrics::set_distance(flat_rows(a), flat_rows(b));
        },
        py::arg("a"), py::arg("b"));

    py::class_<dataset::Dataset>(m, "Dataset")
        .def_static("load", &dataset::load, py::arg("path"))
        .def("save", [](const dataset::Dataset& d, const std::string& p) { dataset::save(d, p); }, py::arg("path"))
        .def_readonly("points", &dataset::Dataset::points)
        .def_property_readonly("alpha", [](const dataset::Dataset& d) { return d.flow.alpha_deg; })
        .def_readonly("meta", &dataset::Dataset::meta)
        .def("__len__", [](const dataset::Dataset& d) { return d.items.size(); })
        .def_property_readonly("labels",
                               [](const dataset::Dataset& d) {
                                   std::vector<double> v;
                                   for (const auto& it : d.items) v.push_back(it.c_l);
                                   return v;
                               })
        .def_property_readonly("families",
                               [](const dataset::Dataset& d) {
                                   std::vector<std::string> v;
                                   for (const auto& it : d.items) v.emplace_back(dataset::to_string(it.family));
                                   return v;
                               })
        .def("shape", [](const dataset::Dataset& d, std::size_t i) { return to_array(d.items.at(i).shape); })
        .def("params", [](const dataset::Dataset& d, std::size_t i) { return d.items.at(i).params; })
        .def("split", [](const dataset::Dataset& d, std::uint64_t seed) {
            const auto s = dataset::split(d, seed);
            return py::make_tuple(s.train, s.test);
        });

    m.def(
        "build_naca",
        [](const std::vector<double>& m_camber, const std::vector<double>& p_pos, const std::vector<double>& t_thick,
           double alpha, std::size_t n) {
            dataset::NacaGrid g{m_camber, p_pos, t_thick};
            return dataset::build_naca(g, {alpha}, n);
        },
        py::arg("m"), py::arg("p"), py::arg("t"), py::arg("alpha") = 5.0, py::arg("n") = geometry::kDefaultPoints,
        "Labelled NACA grid. m = 0 pairs only with p = 0.");

    py::class_<vae::CvaeModel>(m, "Model")
        .def(py::init([](const std::string& kind, int latent_dim, int points, bool use_label,
                         const std::vector<int>& hidden, const std::string& activation, std::uint64_t seed) {
                 return vae::CvaeModel::make(model_config(kind, latent_dim, points, use_label, hidden, activation), seed);
             }),
             py::arg("kind") = "sphere", py::arg("latent_dim") = 2, py::arg("points") = geometry::kDefaultPoints,
             py::arg("use_label") = true, py::arg("hidden") = std::vector<int>{500, 500}, py::arg("activation") = "relu",
             py::arg("seed") = 1)
        .def_static("load", &vae::load_checkpoint, py::arg("path"))
        .def_static("from_json", [](const std::string& s) { return vae::checkpoint_from_json(s); })
        .def("save", [](const vae::CvaeModel& mdl, const std::string& p) { vae::save_checkpoint(mdl, p); })
        .def("to_json", &vae::checkpoint_to_json)
        .def_property_readonly("kind", [](const vae::CvaeModel& mdl) { return std::string(vae::to_string(mdl.config.kind)); })
        .def_property_readonly("latent_dim", [](const vae::CvaeModel& mdl) { return mdl.config.latent_dim; })
        .def_property_readonly("latent_width", [](const vae::CvaeModel& mdl) { return mdl.config.latent_width(); })
        .def_property_readonly("points", [](const vae::CvaeModel& mdl) { return mdl.config.points; })
        .def(
            "encode",
            [](const vae::CvaeModel& mdl, const Points& p, double label) {
                return vae::latent_mean(vae::encode(mdl, geometry::flatten(from_array(p)), label));
            },
            py::arg("points"), py::arg("c_l"), "Posterior mean latent.")
        .def(
            "decode", [](const vae::CvaeModel& mdl, const Vector& z, double label) { return to_array(vae::decode(mdl, z, label)); },
            py::arg("z"), py::arg("c_l"))
        .def(
            "sample",
            [](const vae::CvaeModel& mdl, std::size_t count, std::uint64_t seed) {
                Rng rng(seed);
                return pipeline::sample_latents(mdl, count, pipeline::Sampling::Random, nullptr, rng);
            },
            py::arg("count"), py::arg("seed") = 1, "Prior draws, one latent per row.")
        .def(
            "train",
            [](const vae::CvaeModel& mdl, const dataset::Dataset& data, int epochs, int batch_size, double lr,
               double kl_weight, std::uint64_t seed, std::uint64_t split_seed) {
                const auto b = pipeline::split_batches(data, dataset::split(data, split_seed));
                nn::TrainConfig tc;
                tc.epochs = epochs;
                tc.batch_size = batch_size;
                tc.adam.learning_rate = lr;
                tc.kl_weight = kl_weight;
                tc.seed = seed;
                vae::TrainResult r;
                {
                    py::gil_scoped_release release;
                    r = vae::train(mdl, b.train, b.test, tc);
                }
                std::vector<double> train_loss, test_loss;
                for (const auto& e : r.trace.train) train_loss.push_back(e.total);
                for (const auto& e : r.trace.test) test_loss.push_back(e.total);
                return py::make_tuple(r.model, train_loss, test_loss);
            },
            py::arg("data"), py::arg("epochs") = 500, py::arg("batch_size") = 64, py::arg("lr") = 1e-3,
            py::arg("kl_weight") = 1.0, py::arg("seed") = 1, py::arg("split_seed") = 1,
            "Returns (trained model, train loss per epoch, test loss per epoch). The model itself is unchanged.");
}
