#include <shotrb/pipeline.hpp>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

namespace py = pybind11;
using namespace shotrb;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }
std::span<const int> view(const IntArray& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }

// (n, 3) rows of depth, left-right, entry angle.
const double* factor_rows(const Array& f, std::size_t& n) {
    if (f.ndim() != 2 || f.shape(1) != 3) throw py::value_error("factors must have shape (n, 3)");
    n = static_cast<std::size_t>(f.shape(0));
    return f.data();
}

ShotContext context(std::pair<double, double> release, std::pair<double, double> hoop, double hoop_height,
                    double rim_radius) {
    ShotContext ctx{Vec2(release.first, release.second), Vec2(hoop.first, hoop.second), hoop_height, rim_radius};
    ctx.validate();
    return ctx;
}

py::dict factors_dict(const ShotFactors& f) {
    py::dict d;
    d["depth"] = f.depth;
    d["left_right"] = f.left_right;
    d["entry_angle"] = f.entry_angle;
    d["valid"] = f.valid;
    d["fill_prob"] = f.fill_prob ? py::cast(*f.fill_prob) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "shotrb core bindings";

    py::register_exception<Error>(m, "ShotrbError", PyExc_ValueError);

    m.def(
        "measure_shot",
        [](const Array& samples, std::pair<double, double> release, std::pair<double, double> hoop, int outcome,
           const std::string& method, double hoop_height, double rim_radius) {
            if (samples.ndim() != 2 || samples.shape(1) != 4)
                throw py::value_error("samples must have shape (n, 4): t, x, y, z");
            std::vector<TrackingSample> s(static_cast<std::size_t>(samples.shape(0)));
            const double* d = samples.data();
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = {d[4 * i], d[4 * i + 1], d[4 * i + 2], d[4 * i + 3]};
            MeasureCfg cfg;
            if (method == "ols") cfg.method = FitMethod::Ols;
            else if (method != "bayes") throw py::value_error("method must be 'bayes' or 'ols'");
            const auto meas = measure_shot(s, context(release, hoop, hoop_height, rim_radius), outcome, cfg);
            auto out = factors_dict(meas.factors);
            out["reason"] = std::string(to_string(meas.reason));
            return out;
        },
        py::arg("samples"), py::arg("release_xy"), py::arg("hoop_xy"), py::arg("outcome") = 0,
        py::arg("method") = "bayes", py::arg("hoop_height") = 10.0, py::arg("rim_radius") = 0.75,
        "Fit one tracked shot and return its rim-plane factors (inches, degrees).");

    m.def(
        "trajectory",
        [](std::pair<double, double> release, std::pair<double, double> hoop, double depth, double left_right,
           double entry_angle, double xy_noise, double z_noise, std::uint64_t seed) {
            SimConfig cfg;
            cfg.xy_noise = xy_noise;
            cfg.z_noise = z_noise;
            std::mt19937_64 rng(seed);
            ShotFactors f{depth, left_right, entry_angle, true, std::nullopt};
            const auto s = gen_trajectory(context(release, hoop, 10.0, 0.75), f, cfg, rng);
            Array out({static_cast<py::ssize_t>(s.size()), py::ssize_t{4}});
            auto a = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto r = static_cast<py::ssize_t>(i);
                a(r, 0) = s[i].t, a(r, 1) = s[i].x, a(r, 2) = s[i].y, a(r, 3) = s[i].z;
            }
            return out;
        },
        py::arg("release_xy"), py::arg("hoop_xy"), py::arg("depth"), py::arg("left_right"), py::arg("entry_angle"),
        py::arg("xy_noise") = 0.0, py::arg("z_noise") = 0.0, py::arg("seed") = 1,
        "Simulated tracking samples (n, 4) for a shot with the given true factors.");

    m.def(
        "sample_factors",
        [](std::size_t n, std::uint64_t seed, double spread) {
            SimConfig cfg;
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            Array f({static_cast<py::ssize_t>(n), py::ssize_t{3}});
            Array p(static_cast<py::ssize_t>(n));
            IntArray y(static_cast<py::ssize_t>(n));
            auto fa = f.mutable_unchecked<2>();
            auto pa = p.mutable_unchecked<1>();
            auto ya = y.mutable_unchecked<1>();
            for (py::ssize_t i = 0; i < static_cast<py::ssize_t>(n); ++i) {
                const auto t = gen_shot_truth(cfg, spread, rng);
                fa(i, 0) = t.factors.depth, fa(i, 1) = t.factors.left_right, fa(i, 2) = t.factors.entry_angle;
                pa(i) = t.p;
                ya(i) = u(rng) < t.p ? 1 : 0;
            }
            return py::make_tuple(f, p, y);
        },
        py::arg("n"), py::arg("seed") = 1, py::arg("spread") = 1.0,
        "Simulated true factors, make probabilities and outcomes: (factors (n, 3), p (n,), outcome (n,)).");

    m.def(
        "expand_factors",
        [](double d, double lr, double a) {
            const auto x = expand_factors(d, lr, a);
            return std::vector<double>(x.begin(), x.end());
        },
        py::arg("depth"), py::arg("left_right"), py::arg("entry_angle"));

    py::class_<ProbModel>(m, "ProbModel")
        .def_property_readonly("raw_coef",
                               [](const ProbModel& p) {
                                   const auto c = p.raw_coef();
                                   return std::vector<double>(c.data(), c.data() + c.size());
                               })
        .def_property_readonly("standard_errors",
                               [](const ProbModel& p) {
                                   const ProbModel::Vec se = p.raw_covariance().diagonal().cwiseSqrt();
                                   return std::vector<double>(se.data(), se.data() + se.size());
                               })
        .def_readonly("converged", &ProbModel::converged)
        .def_readonly("iterations", &ProbModel::iterations)
        .def_readonly("train_n", &ProbModel::train_n)
        .def(
            "predict",
            [](const ProbModel& p, const Array& factors) {
                std::size_t n = 0;
                const double* d = factor_rows(factors, n);
                Array out(static_cast<py::ssize_t>(n));
                auto o = out.mutable_unchecked<1>();
                for (std::size_t i = 0; i < n; ++i)
                    o(static_cast<py::ssize_t>(i)) =
                        predict_make_prob(p, expand_factors(d[3 * i], d[3 * i + 1], d[3 * i + 2]));
                return out;
            },
            py::arg("factors"));

    m.def(
        "train_logistic",
        [](const Array& factors, const IntArray& outcomes) {
            std::size_t n = 0;
            const double* d = factor_rows(factors, n);
            if (static_cast<std::size_t>(outcomes.size()) != n) throw Error(ErrorCode::LengthMismatch, "outcomes");
            std::vector<LabeledRow> rows(n);
            for (std::size_t i = 0; i < n; ++i)
                rows[i] = {expand_factors(d[3 * i], d[3 * i + 1], d[3 * i + 2]), outcomes.data()[i]};
            return train_logistic(rows);
        },
        py::arg("factors"), py::arg("outcomes"), "Logistic make-probability model on the quadratic factor basis.");

    m.def("score_brier", [](const Array& p, const IntArray& y) { return score_brier(view(p), view(y)); });
    m.def("score_logloss", [](const Array& p, const IntArray& y) { return score_logloss(view(p), view(y)); });
    m.def("score_misclassification",
          [](const Array& p, const IntArray& y) { return score_misclassification(view(p), view(y)); });

    m.def("raw_fg_pct", [](const IntArray& y) { return raw_fg_pct(view(y)); });
    m.def("rb_fg_pct", [](const Array& p) { return rb_fg_pct(view(p)); });
    m.def("fit_beta_mle", [](const Array& values) {
        const auto f = fit_beta_mle(view(values));
        py::dict d;
        d["alpha"] = f.alpha;
        d["beta"] = f.beta;
        d["theta"] = f.theta;
        d["v"] = f.v;
        d["loglik"] = f.loglik;
        d["converged"] = f.converged;
        return d;
    });
    m.def(
        "shrink_estimate",
        [](double theta, double v, double alpha0, double beta0) { return shrink_estimate(theta, v, {alpha0, beta0}); },
        py::arg("theta_hat"), py::arg("v_hat"), py::arg("alpha0") = 3.5, py::arg("beta0") = 6.5);
    m.def("raw_variance", &raw_variance, py::arg("theta"), py::arg("n"));
    m.def("rb_variance", &rb_variance, py::arg("alpha"), py::arg("beta"), py::arg("n"));
    m.def("normal_ci", &normal_ci, py::arg("theta_hat"), py::arg("variance"), py::arg("level") = 0.9);

    m.def("default_config", [] { return PipelineConfig{}.to_text(); }, "Every config key with its default value.");
    m.def(
        "run_pipeline",
        [](const std::string& out, const std::string& config_text, unsigned jobs, bool use_cache) {
            PipelineConfig cfg;
            cfg.apply_text(config_text);
            cfg.out = out;
            RunOptions opts;
            opts.jobs = jobs;
            opts.use_cache = use_cache;
            py::gil_scoped_release release;
            return run_pipeline(cfg, opts).string();
        },
        py::arg("out"), py::arg("config_text") = "", py::arg("jobs") = 1, py::arg("use_cache") = true,
        "Run every stage into `out` and return that directory.");
}
