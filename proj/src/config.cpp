#include <shotrb/config.hpp>
#include <shotrb/io.hpp>

#include <cmath>
#include <functional>

namespace shotrb {

namespace {

using Getter = std::function<std::string(const PipelineConfig&)>;
using Setter = std::function<void(PipelineConfig&, std::string_view)>;

struct Entry {
    std::string key;
    Getter get;
    Setter set;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw Error(ErrorCode::ConfigError,
                std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(value) + "'");
}

double to_num(std::string_view key, std::string_view v) {
    try {
        return parse_double(v, key);
    } catch (const Error&) {
        bad_value(key, v, "a number");
    }
}

long long to_int(std::string_view key, std::string_view v) {
    try {
        return parse_int(v, key);
    } catch (const Error&) {
        bad_value(key, v, "an integer");
    }
}

std::size_t to_count(std::string_view key, std::string_view v) {
    const auto n = to_int(key, v);
    if (n < 0) bad_value(key, v, "a non-negative integer");
    return static_cast<std::size_t>(n);
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, v, "true or false");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

// Prior means use "league" for the data-driven default.
std::string from_mean(double m) { return std::isnan(m) ? "league" : format_double(m); }
double to_mean(std::string_view key, std::string_view v) {
    if (v == "league") return std::numeric_limits<double>::quiet_NaN();
    return to_num(key, v);
}

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += format_double(xs[i]);
    }
    return out;
}

std::vector<double> split_nums(std::string_view key, std::string_view v) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const auto part = v.substr(start, comma == v.npos ? v.npos : comma - start);
        out.push_back(to_num(key, part));
        if (comma == v.npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
Entry num_entry(std::string key, T PipelineConfig::*group, double std::remove_reference_t<T>::*field) {
    return {key, [=](const PipelineConfig& c) { return format_double((c.*group).*field); },
            [=](PipelineConfig& c, std::string_view v) { (c.*group).*field = to_num(key, v); }};
}

Entry double_entry(std::string key, std::function<double&(PipelineConfig&)> ref) {
    return {key, [=](const PipelineConfig& c) { return format_double(ref(const_cast<PipelineConfig&>(c))); },
            [=](PipelineConfig& c, std::string_view v) { ref(c) = to_num(key, v); }};
}

Entry count_entry(std::string key, std::function<std::size_t&(PipelineConfig&)> ref) {
    return {key, [=](const PipelineConfig& c) { return std::to_string(ref(const_cast<PipelineConfig&>(c))); },
            [=](PipelineConfig& c, std::string_view v) { ref(c) = to_count(key, v); }};
}

Entry bool_entry(std::string key, std::function<bool&(PipelineConfig&)> ref) {
    return {key, [=](const PipelineConfig& c) { return from_bool(ref(const_cast<PipelineConfig&>(c))); },
            [=](PipelineConfig& c, std::string_view v) { ref(c) = to_bool(key, v); }};
}

Entry path_entry(std::string key, std::function<std::filesystem::path&(PipelineConfig&)> ref) {
    return {key, [=](const PipelineConfig& c) { return ref(const_cast<PipelineConfig&>(c)).string(); },
            [=](PipelineConfig& c, std::string_view v) { ref(c) = std::filesystem::path(std::string(v)); }};
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> e;
        e.push_back({"seed", [](const PipelineConfig& c) { return std::to_string(c.seed); },
                     [](PipelineConfig& c, std::string_view v) {
                         const auto n = to_int("seed", v);
                         if (n < 0) bad_value("seed", v, "a non-negative integer");
                         c.seed = static_cast<std::uint64_t>(n);
                     }});
        e.push_back(path_entry("out", [](PipelineConfig& c) -> auto& { return c.out; }));
        // Hoop geometry, shared by the simulator and trajectory measurement.
        e.push_back(double_entry("court.hoop_height", [](PipelineConfig& c) -> auto& { return c.sim.hoop_height; }));
        e.push_back(double_entry("court.rim_radius", [](PipelineConfig& c) -> auto& { return c.sim.rim_radius; }));
        e.push_back(path_entry("input.shots", [](PipelineConfig& c) -> auto& { return c.input.shots; }));
        e.push_back(path_entry("input.tracking", [](PipelineConfig& c) -> auto& { return c.input.tracking; }));
        e.push_back(path_entry("input.train_shots", [](PipelineConfig& c) -> auto& { return c.input.train_shots; }));
        e.push_back(
            path_entry("input.train_tracking", [](PipelineConfig& c) -> auto& { return c.input.train_tracking; }));

        e.push_back(count_entry("sim.n_players", [](PipelineConfig& c) -> auto& { return c.sim.n_players; }));
        e.push_back(count_entry("sim.n_games", [](PipelineConfig& c) -> auto& { return c.sim.n_games; }));
        for (auto cls : kShotClasses) {
            const std::string tag(to_string(cls));
            const auto i = index_of(cls);
            e.push_back(count_entry("sim.shots_min." + tag,
                                    [i](PipelineConfig& c) -> auto& { return c.sim.shots[i].min; }));
            e.push_back(count_entry("sim.shots_max." + tag,
                                    [i](PipelineConfig& c) -> auto& { return c.sim.shots[i].max; }));
            e.push_back(double_entry("sim.skill_alpha." + tag,
                                     [i](PipelineConfig& c) -> auto& { return c.sim.skill[i].alpha0; }));
            e.push_back(double_entry("sim.skill_beta." + tag,
                                     [i](PipelineConfig& c) -> auto& { return c.sim.skill[i].beta0; }));
        }
        e.push_back(double_entry("sim.bowl_peak", [](PipelineConfig& c) -> auto& { return c.sim.bowl.peak_prob; }));
        e.push_back(double_entry("sim.bowl_depth_center",
                                 [](PipelineConfig& c) -> auto& { return c.sim.bowl.depth_center; }));
        e.push_back(double_entry("sim.bowl_angle_center",
                                 [](PipelineConfig& c) -> auto& { return c.sim.bowl.angle_center; }));
        e.push_back(double_entry("sim.bowl_depth_width",
                                 [](PipelineConfig& c) -> auto& { return c.sim.bowl.depth_width; }));
        e.push_back(
            double_entry("sim.bowl_lr_width", [](PipelineConfig& c) -> auto& { return c.sim.bowl.lr_width; }));
        e.push_back(double_entry("sim.bowl_angle_width",
                                 [](PipelineConfig& c) -> auto& { return c.sim.bowl.angle_width; }));
        e.push_back(num_entry("sim.depth_sd", &PipelineConfig::sim, &SimConfig::depth_sd));
        e.push_back(num_entry("sim.lr_sd", &PipelineConfig::sim, &SimConfig::lr_sd));
        e.push_back(num_entry("sim.angle_sd", &PipelineConfig::sim, &SimConfig::angle_sd));
        e.push_back(num_entry("sim.xy_noise", &PipelineConfig::sim, &SimConfig::xy_noise));
        e.push_back(num_entry("sim.z_noise", &PipelineConfig::sim, &SimConfig::z_noise));
        e.push_back(num_entry("sim.sample_rate", &PipelineConfig::sim, &SimConfig::sample_rate));
        e.push_back(num_entry("sim.release_height", &PipelineConfig::sim, &SimConfig::release_height));
        e.push_back(double_entry("sim.hoop_x", [](PipelineConfig& c) -> auto& { return c.sim.hoop_xy.x(); }));
        e.push_back(double_entry("sim.hoop_y", [](PipelineConfig& c) -> auto& { return c.sim.hoop_xy.y(); }));
        e.push_back(num_entry("sim.three_min", &PipelineConfig::sim, &SimConfig::three_min));
        e.push_back(num_entry("sim.three_max", &PipelineConfig::sim, &SimConfig::three_max));
        e.push_back(num_entry("sim.two_min", &PipelineConfig::sim, &SimConfig::two_min));
        e.push_back(num_entry("sim.two_max", &PipelineConfig::sim, &SimConfig::two_max));
        e.push_back(num_entry("sim.free_throw", &PipelineConfig::sim, &SimConfig::free_throw));
        e.push_back(bool_entry("sim.geometric_outcomes",
                               [](PipelineConfig& c) -> auto& { return c.sim.geometric_outcomes; }));
        e.push_back(num_entry("sim.ball_radius", &PipelineConfig::sim, &SimConfig::ball_radius));
        e.push_back(bool_entry("sim.train_season", [](PipelineConfig& c) -> auto& { return c.sim_train_season; }));

        e.push_back({"traj.method",
                     [](const PipelineConfig& c) { return std::string(c.traj.method == FitMethod::Ols ? "ols" : "bayes"); },
                     [](PipelineConfig& c, std::string_view v) {
                         if (v == "ols")
                             c.traj.method = FitMethod::Ols;
                         else if (v == "bayes")
                             c.traj.method = FitMethod::Bayes;
                         else
                             bad_value("traj.method", v, "ols or bayes");
                     }});
        // The prior precision is isotropic in the hoop-centred frame.
        e.push_back({"traj.prior_precision",
                     [](const PipelineConfig& c) { return format_double(c.traj.bayes.prior_precision(0, 0)); },
                     [](PipelineConfig& c, std::string_view v) {
                         c.traj.bayes.prior_precision = to_num("traj.prior_precision", v) * Mat6::Identity();
                     }});
        e.push_back(double_entry("traj.pseudo_weight",
                                 [](PipelineConfig& c) -> auto& { return c.traj.bayes.pseudo_weight; }));
        e.push_back(double_entry("traj.release_height",
                                 [](PipelineConfig& c) -> auto& { return c.traj.bayes.release_height; }));
        e.push_back(double_entry("traj.noise_shape0",
                                 [](PipelineConfig& c) -> auto& { return c.traj.bayes.noise_shape0; }));
        e.push_back(double_entry("traj.noise_scale0",
                                 [](PipelineConfig& c) -> auto& { return c.traj.bayes.noise_scale0; }));
        e.push_back(count_entry("traj.min_samples",
                                [](PipelineConfig& c) -> auto& { return c.traj.validity.min_samples; }));
        e.push_back(
            double_entry("traj.max_rmse", [](PipelineConfig& c) -> auto& { return c.traj.validity.max_rmse; }));
        e.push_back(double_entry("traj.tangency_tol",
                                 [](PipelineConfig& c) -> auto& { return c.traj.validity.tangency_tol; }));
        e.push_back(
            double_entry("traj.max_condition", [](PipelineConfig& c) -> auto& { return c.traj.max_condition; }));

        e.push_back(
            double_entry("filter.min_arc_length", [](PipelineConfig& c) -> auto& { return c.filter.min_arc_length; }));
        e.push_back(count_entry("filter.min_samples", [](PipelineConfig& c) -> auto& { return c.filter.min_samples; }));

        e.push_back({"model.max_iterations",
                     [](const PipelineConfig& c) { return std::to_string(c.model.train.max_iterations); },
                     [](PipelineConfig& c, std::string_view v) {
                         c.model.train.max_iterations = static_cast<int>(to_int("model.max_iterations", v));
                     }});
        e.push_back(
            double_entry("model.tolerance", [](PipelineConfig& c) -> auto& { return c.model.train.tolerance; }));
        e.push_back(
            double_entry("model.max_abs_coef", [](PipelineConfig& c) -> auto& { return c.model.train.max_abs_coef; }));
        e.push_back(count_entry("model.min_rows", [](PipelineConfig& c) -> auto& { return c.model.train.min_rows; }));
        e.push_back(count_entry("model.cv_folds", [](PipelineConfig& c) -> auto& { return c.model.cv_folds; }));

        e.push_back(double_entry("shrink.prior_count", [](PipelineConfig& c) -> auto& { return c.shrink.prior_count; }));
        for (auto cls : kShotClasses) {
            const std::string key = "shrink.prior_mean." + std::string(to_string(cls));
            const auto i = index_of(cls);
            e.push_back({key, [i](const PipelineConfig& c) { return from_mean(c.shrink.prior_mean[i]); },
                         [i, key](PipelineConfig& c, std::string_view v) { c.shrink.prior_mean[i] = to_mean(key, v); }});
        }

        e.push_back({"estimate.half", [](const PipelineConfig& c) { return std::to_string(c.estimate.half); },
                     [](PipelineConfig& c, std::string_view v) {
                         c.estimate.half = static_cast<int>(to_int("estimate.half", v));
                     }});
        e.push_back(double_entry("estimate.ci_level", [](PipelineConfig& c) -> auto& { return c.estimate.ci_level; }));

        e.push_back(count_entry("eval.min_attempts", [](PipelineConfig& c) -> auto& { return c.eval.min_attempts; }));
        e.push_back({"eval.fractions", [](const PipelineConfig& c) { return join(c.eval.fractions); },
                     [](PipelineConfig& c, std::string_view v) { c.eval.fractions = split_nums("eval.fractions", v); }});
        e.push_back(count_entry("eval.rmse_seeds", [](PipelineConfig& c) -> auto& { return c.eval.rmse_seeds; }));
        e.push_back(count_entry("eval.sd_repeats", [](PipelineConfig& c) -> auto& { return c.eval.sd_repeats; }));
        e.push_back(double_entry("eval.sd_cov_scale", [](PipelineConfig& c) -> auto& { return c.eval.sd_cov_scale; }));
        e.push_back({"eval.sd_class", [](const PipelineConfig& c) { return std::string(to_string(c.eval.sd_class)); },
                     [](PipelineConfig& c, std::string_view v) {
                         try {
                             c.eval.sd_class = parse_shot_class(v);
                         } catch (const Error&) {
                             bad_value("eval.sd_class", v, "3PT, FT or 2PT");
                         }
                     }});
        return e;
    }();
    return table;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

ShrinkCfg PipelineConfig::default_shrink() {
    ShrinkCfg s;
    s.prior_count = 10.0;
    s.prior_mean[index_of(ShotClass::ThreePoint)] = 0.35;
    return s;
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    for (const auto& e : entries())
        if (e.key == key) {
            e.set(*this, value);
            return;
        }
    throw Error(ErrorCode::ConfigError, "unknown key '" + std::string(key) + "'");
}

void PipelineConfig::apply_text(std::string_view text, std::string_view source) {
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == text.npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == line.npos)
            throw Error(ErrorCode::ConfigError,
                        std::string(source) + " line " + std::to_string(line_no) + ": expected key = value");
        try {
            set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const Error& err) {
            throw Error(ErrorCode::ConfigError,
                        std::string(source) + " line " + std::to_string(line_no) + ": " + err.what());
        }
    }
}

std::string PipelineConfig::to_text() const {
    std::string out;
    for (const auto& e : entries()) out += e.key + " = " + e.get(*this) + "\n";
    return out;
}

std::string PipelineConfig::section_text(std::string_view section) const {
    std::string out;
    const std::string prefix = std::string(section) + ".";
    for (const auto& e : entries())
        if (e.key.rfind(prefix, 0) == 0) out += e.key + " = " + e.get(*this) + "\n";
    return out;
}

void PipelineConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
    if (out.empty()) fail("out must be set");
    if (input.shots.empty() != input.tracking.empty()) fail("input.shots and input.tracking must be given together");
    if (input.train_shots.empty() != input.train_tracking.empty())
        fail("input.train_shots and input.train_tracking must be given together");
    for (const auto* p : {&input.shots, &input.tracking, &input.train_shots, &input.train_tracking})
        if (!p->empty() && !std::filesystem::is_regular_file(*p)) fail("input file not found: " + p->string());
    if (input.shots.empty()) {
        try {
            sim.validate();
        } catch (const Error& e) {
            fail(std::string("sim: ") + e.what());
        }
    }
    if (!(traj.bayes.prior_precision(0, 0) > 0.0)) fail("traj.prior_precision must be positive");
    if (!(traj.bayes.pseudo_weight >= 0.0)) fail("traj.pseudo_weight must be non-negative");
    if (!(traj.validity.max_rmse > 0.0)) fail("traj.max_rmse must be positive");
    if (!(filter.min_arc_length >= 0.0)) fail("filter.min_arc_length must be non-negative");
    if (model.train.max_iterations < 1) fail("model.max_iterations must be at least 1");
    if (model.cv_folds < 2) fail("model.cv_folds must be at least 2");
    if (!(shrink.prior_count > 0.0)) fail("shrink.prior_count must be positive");
    for (double m : shrink.prior_mean)
        if (!std::isnan(m) && !(m > 0.0 && m < 1.0)) fail("shrink.prior_mean must be in (0,1) or 'league'");
    if (estimate.half < 0 || estimate.half > 2) fail("estimate.half must be 0, 1 or 2");
    if (!(estimate.ci_level > 0.0 && estimate.ci_level < 1.0)) fail("estimate.ci_level must be in (0,1)");
    if (eval.fractions.empty()) fail("eval.fractions must not be empty");
    for (double f : eval.fractions)
        if (!(f > 0.0 && f <= 1.0)) fail("eval.fractions must lie in (0,1]");
    if (eval.rmse_seeds < 1) fail("eval.rmse_seeds must be at least 1");
    if (eval.sd_repeats < 1) fail("eval.sd_repeats must be at least 1");
    if (!(eval.sd_cov_scale >= 0.0)) fail("eval.sd_cov_scale must be non-negative");
}

PipelineConfig load_config(const std::filesystem::path& path) {
    PipelineConfig cfg;
    cfg.apply_text(read_file(path), path.string());
    return cfg;
}

}  // namespace shotrb
