#include <shotrb/estimators.hpp>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace shotrb {

std::string_view to_string(ShotClass c) noexcept {
    switch (c) {
        case ShotClass::ThreePoint: return "3PT";
        case ShotClass::FreeThrow: return "FT";
        case ShotClass::TwoPoint: return "2PT";
    }
    return "?";
}

ShotClass parse_shot_class(std::string_view s) {
    if (s == "3PT") return ShotClass::ThreePoint;
    if (s == "2PT") return ShotClass::TwoPoint;
    if (s == "FT") return ShotClass::FreeThrow;
    throw Error(ErrorCode::InvalidArgument, "unknown shot class '" + std::string(s) + "'");
}

int point_value(ShotClass c) noexcept {
    switch (c) {
        case ShotClass::ThreePoint: return 3;
        case ShotClass::TwoPoint: return 2;
        case ShotClass::FreeThrow: return 1;
    }
    return 0;
}

std::string_view to_string(EstimatorKind k) noexcept { return k == EstimatorKind::Raw ? "raw" : "rb"; }

double raw_fg_pct(std::span<const int> outcomes) {
    if (outcomes.empty()) throw Error(ErrorCode::EmptyShots, "no shots");
    const auto makes = std::count_if(outcomes.begin(), outcomes.end(), [](int o) { return o != 0; });
    return static_cast<double>(makes) / static_cast<double>(outcomes.size());
}

double raw_fg_pct(std::span<const ShotObs> shots) {
    if (shots.empty()) throw Error(ErrorCode::EmptyShots, "no shots");
    std::size_t makes = 0;
    for (const auto& s : shots) makes += static_cast<std::size_t>(s.outcome != 0);
    return static_cast<double>(makes) / static_cast<double>(shots.size());
}

double rb_fg_pct(std::span<const double> p_makes) {
    if (p_makes.empty()) throw Error(ErrorCode::EmptyShots, "no shots");
    return std::accumulate(p_makes.begin(), p_makes.end(), 0.0) / static_cast<double>(p_makes.size());
}

double rb_fg_pct(std::span<const ShotObs> shots) {
    if (shots.empty()) throw Error(ErrorCode::EmptyShots, "no shots");
    double sum = 0.0;
    for (const auto& s : shots) sum += s.p_make;
    return sum / static_cast<double>(shots.size());
}

// ---------------------------------------------------------------------------

NelderMeadResult nelder_mead_minimize(const Objective& f, std::vector<double> x0, const NelderMeadCfg& cfg) {
    const std::size_t dim = x0.size();
    if (dim == 0) throw Error(ErrorCode::InvalidArgument, "empty start point");

    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(dim + 1, x0);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += cfg.initial_step;
    std::vector<double> fv(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) fv[i] = eval(simplex[i]);
    if (!std::isfinite(fv[0])) throw Error(ErrorCode::InvalidArgument, "objective not finite at start");

    std::vector<std::size_t> order(dim + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2(dim + 1);
        std::vector<double> f2(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) {
            s2[i] = std::move(simplex[order[i]]);
            f2[i] = fv[order[i]];
        }
        simplex = std::move(s2);
        fv = std::move(f2);
    };

    auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        // a + t (b - a)
        std::vector<double> out(dim);
        for (std::size_t i = 0; i < dim; ++i) out[i] = a[i] + t * (b[i] - a[i]);
        return out;
    };

    NelderMeadResult res;
    sort_simplex();
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        double fspread = 0.0, xspread = 0.0;
        for (std::size_t i = 1; i <= dim; ++i) {
            fspread = std::max(fspread, std::abs(fv[i] - fv[0]));
            for (std::size_t j = 0; j < dim; ++j)
                xspread = std::max(xspread, std::abs(simplex[i][j] - simplex[0][j]));
        }
        if (fspread <= cfg.tolerance && xspread <= cfg.tolerance) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j] / static_cast<double>(dim);

        const auto& worst = simplex[dim];
        const auto xr = affine(centroid, worst, -cfg.reflection);
        const double fr = eval(xr);

        bool do_shrink = false;
        if (fr < fv[0]) {
            const auto xe = affine(centroid, worst, -cfg.reflection * cfg.expansion);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[dim] = xe;
                fv[dim] = fe;
            } else {
                simplex[dim] = xr;
                fv[dim] = fr;
            }
        } else if (fr < fv[dim - 1]) {
            simplex[dim] = xr;
            fv[dim] = fr;
        } else if (fr < fv[dim]) {
            const auto xc = affine(centroid, worst, -cfg.reflection * cfg.contraction);
            const double fc = eval(xc);
            if (fc <= fr) {
                simplex[dim] = xc;
                fv[dim] = fc;
            } else {
                do_shrink = true;
            }
        } else {
            const auto xcc = affine(centroid, worst, cfg.contraction);
            const double fcc = eval(xcc);
            if (fcc < fv[dim]) {
                simplex[dim] = xcc;
                fv[dim] = fcc;
            } else {
                do_shrink = true;
            }
        }
        if (do_shrink) {
            for (std::size_t i = 1; i <= dim; ++i) {
                simplex[i] = affine(simplex[0], simplex[i], cfg.shrink);
                fv[i] = eval(simplex[i]);
            }
        }
        sort_simplex();
    }
    res.iterations = it;
    res.x = simplex[0];
    res.value = fv[0];
    return res;
}

// ---------------------------------------------------------------------------

namespace {

void check_unit_interval(std::span<const double> values) {
    for (double p : values)
        if (!(p > 0.0 && p < 1.0))
            throw Error(ErrorCode::InvalidArgument, "Beta fit needs values strictly inside (0, 1)");
}

std::pair<double, double> mean_var(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double p : values) var += (p - mean) * (p - mean);
    return {mean, var / n};
}

}  // namespace

std::pair<double, double> beta_moments_start(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyShots, "no values");
    const auto [mean, var] = mean_var(values);
    if (!(var > 1e-10)) throw Error(ErrorCode::DegenerateSample, "sample variance is zero");
    double common = mean * (1.0 - mean) / var - 1.0;
    if (!(common > 0.0)) common = 0.5;
    return {mean * common, (1.0 - mean) * common};
}

double beta_log_likelihood(std::span<const double> values, double alpha, double beta) {
    double slog = 0.0, slog1m = 0.0;
    for (double p : values) {
        slog += std::log(p);
        slog1m += std::log1p(-p);
    }
    const double n = static_cast<double>(values.size());
    return (alpha - 1.0) * slog + (beta - 1.0) * slog1m -
           n * (std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta));
}

BetaFit fit_beta_mle(std::span<const double> values, const NelderMeadCfg& cfg) {
    if (values.size() < 5) throw Error(ErrorCode::InvalidArgument, "Beta fit needs at least 5 values");
    check_unit_interval(values);
    const auto [a0, b0] = beta_moments_start(values);

    double slog = 0.0, slog1m = 0.0;
    for (double p : values) {
        slog += std::log(p);
        slog1m += std::log1p(-p);
    }
    const double n = static_cast<double>(values.size());
    const double mlog = slog / n, mlog1m = slog1m / n;

    // Mean negative log-likelihood in log-shape coordinates.
    auto objective = [mlog, mlog1m](std::span<const double> x) {
        const double a = std::exp(x[0]), b = std::exp(x[1]);
        return -((a - 1.0) * mlog + (b - 1.0) * mlog1m -
                 (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)));
    };
    const auto r = nelder_mead_minimize(objective, {std::log(a0), std::log(b0)}, cfg);

    BetaFit fit;
    fit.alpha = std::exp(r.x[0]);
    fit.beta = std::exp(r.x[1]);
    fit.v = fit.alpha + fit.beta;
    fit.theta = fit.alpha / fit.v;
    fit.loglik = -r.value * n;
    fit.converged = r.converged;
    return fit;
}

// ---------------------------------------------------------------------------

BetaPrior BetaPrior::from_mean(double mean, double count) {
    if (!(mean > 0.0 && mean < 1.0) || !(count > 0.0))
        throw Error(ErrorCode::InvalidArgument, "prior mean must be in (0,1) and count positive");
    return {mean * count, (1.0 - mean) * count};
}

double shrink_estimate(double theta_hat, double v_hat, const BetaPrior& prior) {
    if (!(v_hat >= 0.0)) throw Error(ErrorCode::InvalidArgument, "v_hat must be non-negative");
    if (!(prior.alpha0 > 0.0 && prior.beta0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "prior shapes must be positive");
    if (std::isinf(v_hat)) return theta_hat;
    return (prior.alpha0 + theta_hat * v_hat) / (prior.alpha0 + prior.beta0 + v_hat);
}

double raw_variance(double theta, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::EmptyShots, "n must be at least 1");
    return theta * (1.0 - theta) / static_cast<double>(n);
}

double rb_variance(double alpha, double beta, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::EmptyShots, "n must be at least 1");
    if (!(alpha > 0.0 && beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "Beta shapes must be positive");
    const double s = alpha + beta;
    return alpha * beta / (static_cast<double>(n) * s * s * (s + 1.0));
}

double rb_variance_mean_concentration(double theta, double v, std::size_t n) {
    return rb_variance(theta * v, (1.0 - theta) * v, n);
}

double estimator_variance(EstimatorKind kind, std::pair<double, double> params, std::size_t n) {
    return kind == EstimatorKind::Raw ? raw_variance(params.first, n)
                                      : rb_variance(params.first, params.second, n);
}

std::pair<double, double> normal_ci(double theta_hat, double variance, double level) {
    if (!(variance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative variance");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must be in (0,1)");
    const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
    const double half = z * std::sqrt(variance);
    return {std::clamp(theta_hat - half, 0.0, 1.0), std::clamp(theta_hat + half, 0.0, 1.0)};
}

double true_shooting_from_points(double points, std::size_t fga, std::size_t fta) {
    if (fga + fta == 0) throw Error(ErrorCode::NoAttempts, "no field-goal or free-throw attempts");
    return points / (2.0 * (static_cast<double>(fga) + 0.44 * static_cast<double>(fta)));
}

double true_shooting_pct(EstimatorKind kind, const PlayerShots& player) {
    double points = 0.0;
    for (const auto c : kShotClasses)
        for (const auto& s : player.shots(c))
            points += point_value(c) * (kind == EstimatorKind::Raw ? (s.outcome != 0 ? 1.0 : 0.0) : s.p_make);
    const std::size_t fga = player.attempts(ShotClass::ThreePoint) + player.attempts(ShotClass::TwoPoint);
    return true_shooting_from_points(points, fga, player.attempts(ShotClass::FreeThrow));
}

double true_shooting_from_rates(const PlayerShots& player, const std::array<double, 3>& rates) {
    double points = 0.0;
    for (const auto c : kShotClasses)
        points += point_value(c) * rates[index_of(c)] * static_cast<double>(player.attempts(c));
    const std::size_t fga = player.attempts(ShotClass::ThreePoint) + player.attempts(ShotClass::TwoPoint);
    return true_shooting_from_points(points, fga, player.attempts(ShotClass::FreeThrow));
}

ClassEstimate estimate_class(std::span<const ShotObs> shots, const BetaPrior& prior, double ci_level) {
    ClassEstimate e;
    e.n = shots.size();
    e.theta_raw = raw_fg_pct(shots);
    e.theta_rb = rb_fg_pct(shots);
    const double weight = static_cast<double>(e.n);
    e.theta_shrunk_raw = shrink_estimate(e.theta_raw, weight, prior);
    e.theta_shrunk_rb = shrink_estimate(e.theta_rb, weight, prior);
    e.var_raw = raw_variance(e.theta_raw, e.n);

    std::vector<double> modeled;
    for (const auto& s : shots)
        if (!s.filled && s.p_make > 0.0 && s.p_make < 1.0) modeled.push_back(s.p_make);
    e.n_valid = modeled.size();
    e.var_rb = e.var_raw;
    if (modeled.size() >= 5) {
        try {
            e.beta = fit_beta_mle(modeled);
            e.var_rb = rb_variance(e.beta->alpha, e.beta->beta, e.n);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::DegenerateSample) throw;
        }
    }
    std::tie(e.ci_lo, e.ci_hi) = normal_ci(e.theta_rb, e.var_rb, ci_level);
    return e;
}

}  // namespace shotrb
