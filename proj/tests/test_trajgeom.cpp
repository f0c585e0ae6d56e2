#include "support.hpp"

#include <doctest.h>

using namespace shotrb;
using namespace testing_support;

namespace {

// Curved horizontal path so that x, y, x^2, y^2, xy are not collinear.
std::vector<TrackingSample> surface_samples(const Vec6& beta, std::size_t n) {
    std::vector<TrackingSample> s;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 0.04 * static_cast<double>(i);
        const double x = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        const double y = 0.5 * std::sin(3.0 * x);
        const double z = beta[0] + beta[1] * x + beta[2] * y + beta[3] * x * x + beta[4] * y * y + beta[5] * x * y;
        s.push_back({t, x, y, z});
    }
    return s;
}

Vec6 paper_beta() {
    Vec6 b;
    b << 7.0, 8.0, 0.0, -4.0, 0.0, 0.0;
    return b;
}

// Fit whose restriction to the x axis is the given quadratic in s.
QuadraticFit along_x(double c0, double c1, double c2) {
    QuadraticFit f;
    f.beta << c0, c1, 0.0, c2, 0.0, 0.0;
    return f;
}

LinePath x_axis() {
    LinePath p;
    p.origin_xy = Vec2::Zero();
    p.direction_xy = Vec2::UnitX();
    p.speed = 1.0;
    return p;
}

ShotContext x_axis_context() { return {Vec2(0.0, 0.0), Vec2(20.0, 0.0), 10.0, 0.75}; }

std::vector<TrackingSample> transform(const std::vector<TrackingSample>& s, const Eigen::Matrix2d& m, const Vec2& pivot,
                                      const Vec2& shift) {
    std::vector<TrackingSample> out;
    for (const auto& p : s) {
        const Vec2 q = m * (Vec2(p.x, p.y) - pivot) + pivot + shift;
        out.push_back({p.t, q.x(), q.y(), p.z});
    }
    return out;
}

double on_grid(double v) { return std::ldexp(std::round(std::ldexp(v, 16)), -16); }

}  // namespace

TEST_CASE("OLS recovers an exactly quadratic surface") {
    const auto s = surface_samples(paper_beta(), 25);
    const auto fit = fit_quadratic_ols(s);
    const Vec6 b = fit.court_beta();
    CHECK((b - paper_beta()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(fit.residual_rmse < 1e-9);
    CHECK(fit.n_samples == 25);
}

TEST_CASE("OLS needs six samples") {
    const auto s = surface_samples(paper_beta(), 5);
    CHECK_THROWS_AS(fit_quadratic_ols(s), Error);
    try {
        fit_quadratic_ols(s);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
    }
}

TEST_CASE("OLS on collinear samples is rank deficient") {
    std::vector<TrackingSample> s;
    for (int i = 0; i < 20; ++i) s.push_back({0.04 * i, 1.0 + 0.5 * i, 2.0 + 0.25 * i, 7.0 + 0.1 * i});
    try {
        fit_quadratic_ols(s);
        FAIL("expected RankDeficient");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
    }
}

TEST_CASE("OLS is unbiased with 3 standard errors under z noise") {
    // Truth in the fit's own frame: the exact fit of the noise-free samples.
    const auto clean = surface_samples(paper_beta(), 25);
    const auto exact = fit_quadratic_ols(clean);
    const double sigma = 0.4;
    const Mat6 cov = sigma * sigma * exact.precision.inverse();

    std::mt19937_64 rng(2024);
    std::normal_distribution<double> noise(0.0, sigma);
    const int trials = 100;
    Vec6 sum = Vec6::Zero();
    int inside = 0;
    for (int k = 0; k < trials; ++k) {
        auto s = clean;
        for (auto& p : s) p.z += noise(rng);
        const auto fit = fit_quadratic_ols(s);
        CHECK((fit.origin - exact.origin).norm() < 1e-12);
        sum += fit.beta;
        for (int i = 0; i < 6; ++i) inside += std::abs(fit.beta[i] - exact.beta[i]) <= 3.0 * std::sqrt(cov(i, i));
    }
    const Vec6 avg = sum / trials;
    for (int i = 0; i < 6; ++i) CHECK(std::abs(avg[i] - exact.beta[i]) <= 3.0 * std::sqrt(cov(i, i) / trials));
    CHECK(inside >= static_cast<int>(0.98 * 6 * trials));
}

TEST_CASE("Bayesian fit with a vanishing prior matches OLS") {
    // A grid of samples around the hoop keeps every coefficient well determined.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.4);
    const ShotContext ctx{Vec2(24.0, 0.0), Vec2(0.0, 0.0), 10.0, 0.75};
    std::vector<TrackingSample> s;
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
            const double x = i - 4.0, y = j - 4.0;
            const double z = 10.0 + 0.5 * x - 0.3 * y - 0.2 * x * x - 0.1 * y * y + 0.05 * x * y + noise(rng);
            s.push_back({0.04 * (9 * i + j), x, y, z});
        }
    BayesCfg cfg;
    cfg.pseudo_weight = 0.0;
    cfg.prior_precision = 1e-6 * Mat6::Identity();
    const Vec6 ols = fit_quadratic_ols(s).court_beta();
    const Vec6 bayes = fit_quadratic_bayes(s, ctx, cfg).court_beta();
    CHECK((bayes - ols).norm() / ols.norm() < 1e-6);
}

TEST_CASE("dominant pseudo-points pin the surface at release and rim") {
    const auto ctx = three_point_context(30.0);
    std::mt19937_64 rng(11);
    const auto s = trajectory(ctx, factors(11.0, 1.0, 45.0), 0.15, 0.4, rng);
    BayesCfg cfg;
    cfg.pseudo_weight = 1e6;
    const auto fit = fit_quadratic_bayes(s, ctx, cfg);
    CHECK(std::abs(fit.height_at(ctx.release_xy) - 7.0) < 1e-3);
    CHECK(std::abs(fit.height_at(ctx.hoop_xy) - 10.0) < 1e-3);
}

TEST_CASE("Bayesian fit posterior is a valid precision") {
    const auto ctx = three_point_context(-20.0);
    std::mt19937_64 rng(3);
    const auto s = trajectory(ctx, factors(10.0, 0.0, 44.0), 0.15, 0.4, rng);
    const auto fit = fit_quadratic_bayes(s, ctx);
    CHECK((fit.precision - fit.precision.transpose()).norm() < 1e-9 * fit.precision.norm());
    Eigen::SelfAdjointEigenSolver<Mat6> eig(fit.precision);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    CHECK(fit.residual_rmse >= 0.0);
    CHECK(fit.noise_variance() > 0.0);
}

TEST_CASE("Bayesian fit rejects empty input") {
    const auto ctx = three_point_context(0.0);
    CHECK_THROWS_AS(fit_quadratic_bayes({}, ctx), Error);
}

TEST_CASE("horizontal path on an exact line") {
    const ShotContext ctx{Vec2(0.0, 0.0), Vec2(30.0, 40.0), 10.0, 0.75};
    std::vector<TrackingSample> s;
    for (int i = 0; i < 20; ++i) s.push_back({0.04 * i, 0.6 * 10.0 * 0.04 * i, 0.8 * 10.0 * 0.04 * i, 8.0});
    const auto path = fit_horizontal_path(s, ctx);
    CHECK(path.direction_xy.x() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(path.direction_xy.y() == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(path.speed == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(path.origin_xy.norm() < 1e-12);
    for (const auto& p : s) {
        const Vec2 xy(p.x, p.y);
        const double sdist = (xy - path.origin_xy).dot(path.direction_xy);
        CHECK((path.at(sdist) - xy).norm() < 1e-12);
    }
}

TEST_CASE("horizontal path does not depend on sample order") {
    const auto ctx = three_point_context(40.0);
    std::mt19937_64 rng(9);
    const auto s = trajectory(ctx, factors(11.0, 0.0, 45.0), 0.15, 0.4, rng);
    auto rev = s;
    std::reverse(rev.begin(), rev.end());
    const auto a = fit_horizontal_path(s, ctx);
    const auto b = fit_horizontal_path(rev, ctx);
    CHECK((a.direction_xy - b.direction_xy).norm() < 1e-12);
    CHECK((a.origin_xy - b.origin_xy).norm() < 1e-12);
    CHECK(a.speed == doctest::Approx(b.speed).epsilon(1e-12));
    CHECK(a.direction_xy.dot(ctx.shooter_axis()) > 0.0);
}

TEST_CASE("horizontal path direction under xy noise") {
    std::mt19937_64 rng(77);
    int ok = 0;
    for (int k = 0; k < 100; ++k) {
        const auto ctx = three_point_context(-60.0 + 1.2 * k);
        const auto s = trajectory(ctx, factors(11.0, 0.0, 45.0), 0.1, 0.0, rng);
        const auto path = fit_horizontal_path(s, ctx);
        const double cosang = std::clamp(path.direction_xy.dot(ctx.shooter_axis()), -1.0, 1.0);
        ok += std::acos(cosang) * 180.0 / kPi < 2.0;
    }
    CHECK(ok == 100);
}

TEST_CASE("stationary samples fall back to the shooter axis") {
    const ShotContext ctx{Vec2(0.0, 0.0), Vec2(0.0, 15.0), 10.0, 0.75};
    std::vector<TrackingSample> s;
    for (int i = 0; i < 10; ++i) s.push_back({0.04 * i, 0.0, 0.0, 7.0 + i});
    const auto path = fit_horizontal_path(s, ctx);
    CHECK((path.direction_xy - Vec2(0.0, 1.0)).norm() < 1e-12);

    const ShotContext same{Vec2(1.0, 1.0), Vec2(1.0, 1.0), 10.0, 0.75};
    try {
        fit_horizontal_path(s, same);
        FAIL("expected DegeneratePath");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegeneratePath);
    }
}

TEST_CASE("rim crossing takes the descending root") {
    const auto hit = rim_crossing(along_x(7.0, 8.0, -4.0), x_axis(), x_axis_context());
    CHECK(hit.arclength == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(hit.dz_ds == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK((hit.xy - Vec2(1.5, 0.0)).norm() < 1e-12);
}

TEST_CASE("rim crossing rejects tangency and misses") {
    for (const auto& fit : {along_x(10.0, 0.0, -1.0), along_x(9.0, 0.0, -1.0)}) {
        try {
            rim_crossing(fit, x_axis(), x_axis_context());
            FAIL("expected NoDescendingCrossing");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoDescendingCrossing);
        }
    }
}

TEST_CASE("shot factors at reference crossings") {
    const auto ctx = x_axis_context();
    const Vec2 u = ctx.shooter_axis();

    const auto centre = compute_shot_factors(ctx.hoop_xy, -1e12, ctx);
    CHECK(centre.depth == 9.0);
    CHECK(centre.left_right == 0.0);
    CHECK(centre.entry_angle == doctest::Approx(90.0).epsilon(1e-9));
    CHECK(centre.valid);

    const auto deep = compute_shot_factors(ctx.hoop_xy + (2.0 / 12.0) * u, -1.0, ctx);
    CHECK(deep.depth == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(deep.entry_angle == doctest::Approx(45.0).epsilon(1e-12));

    // Facing +x, the shooter's left is +y.
    const auto left = compute_shot_factors(ctx.hoop_xy + Vec2(0.0, 3.0 / 12.0), -1.0, ctx);
    CHECK(left.left_right == doctest::Approx(-3.0).epsilon(1e-12));

    const auto front = compute_shot_factors(ctx.hoop_xy - ctx.rim_radius * u, -1.0, ctx);
    CHECK(std::abs(front.depth) < 1e-12);

    CHECK_THROWS_AS(compute_shot_factors(ctx.hoop_xy, 0.0, ctx), Error);
}

TEST_CASE("validity rules and fill probabilities") {
    const auto ctx = three_point_context(10.0);
    std::mt19937_64 rng(21);
    const auto s = trajectory(ctx, factors(11.0, 0.0, 45.0), 0.15, 0.4, rng);

    const auto clean = measure_shot(s, ctx, 1);
    CHECK(clean.factors.valid);
    CHECK(clean.reason == InvalidReason::None);
    CHECK_FALSE(clean.factors.fill_prob.has_value());

    const std::vector<TrackingSample> seven(s.begin(), s.begin() + 7);
    const auto few = measure_shot(seven, ctx, 0);
    CHECK_FALSE(few.factors.valid);
    CHECK(few.reason == InvalidReason::TooFewSamples);
    CHECK(few.factors.fill_prob == 0.0);

    QuadraticFit poor;
    poor.residual_rmse = 1.6;
    const auto d = validate_trajectory(s, poor, true);
    CHECK_FALSE(d.valid);
    CHECK(d.reason == InvalidReason::PoorFit);
    CHECK(invalid_factors(1).fill_prob == 1.0);

    // Heavy height noise trips the residual check through measure_shot too.
    std::mt19937_64 rng2(4);
    const auto noisy = trajectory(ctx, factors(11.0, 0.0, 45.0), 0.15, 3.0, rng2);
    const auto bad = measure_shot(noisy, ctx, 1);
    CHECK_FALSE(bad.factors.valid);
    CHECK(bad.reason == InvalidReason::PoorFit);
    CHECK(bad.factors.fill_prob == 1.0);
}

TEST_CASE("factors are translation equivariant") {
    auto ctx = three_point_context(25.0);
    ctx.release_xy = ctx.release_xy.unaryExpr(&on_grid);
    std::mt19937_64 rng(31);
    // Coordinates on a 2^-16 grid so that the integer shift is exact in floating point; otherwise the
    // rounding of the shifted inputs is amplified by the nearly collinear design.
    auto s = trajectory(ctx, factors(12.0, -1.5, 41.0), 0.15, 0.4, rng);
    for (auto& p : s) {
        p.x = on_grid(p.x);
        p.y = on_grid(p.y);
    }
    const Vec2 shift(37.0, -12.0);
    const auto moved = transform(s, Eigen::Matrix2d::Identity(), Vec2::Zero(), shift);
    const ShotContext mctx{ctx.release_xy + shift, ctx.hoop_xy + shift, ctx.hoop_height, ctx.rim_radius};
    for (auto method : {FitMethod::Bayes, FitMethod::Ols}) {
        MeasureCfg cfg;
        cfg.method = method;
        const auto a = measure_shot(s, ctx, 1, cfg).factors;
        const auto b = measure_shot(moved, mctx, 1, cfg).factors;
        REQUIRE(a.valid);
        REQUIRE(b.valid);
        CHECK(std::abs(a.depth - b.depth) < 1e-9);
        CHECK(std::abs(a.left_right - b.left_right) < 1e-9);
        CHECK(std::abs(a.entry_angle - b.entry_angle) < 1e-9);
    }
}

TEST_CASE("factors are rotation equivariant and reflection flips left-right") {
    const auto ctx = three_point_context(-35.0);
    std::mt19937_64 rng(41);
    const auto s = trajectory(ctx, factors(10.0, 2.5, 47.0), 0.15, 0.4, rng);
    const auto base = measure_shot(s, ctx, 1).factors;
    REQUIRE(base.valid);

    for (double deg : {17.0, 90.0, 200.0}) {
        const double r = deg * kPi / 180.0;
        Eigen::Matrix2d rot;
        rot << std::cos(r), -std::sin(r), std::sin(r), std::cos(r);
        const auto rs = transform(s, rot, ctx.hoop_xy, Vec2::Zero());
        const ShotContext rctx{rot * (ctx.release_xy - ctx.hoop_xy) + ctx.hoop_xy, ctx.hoop_xy, 10.0, 0.75};
        const auto f = measure_shot(rs, rctx, 1).factors;
        REQUIRE(f.valid);
        // Rotated coordinates carry rounding error, so the match is numerical rather than exact.
        CHECK(std::abs(f.depth - base.depth) < 1e-6);
        CHECK(std::abs(f.left_right - base.left_right) < 1e-6);
        CHECK(std::abs(f.entry_angle - base.entry_angle) < 1e-6);
    }

    // Reflect across the shooter axis through the hoop.
    const Vec2 u = ctx.shooter_axis();
    const Eigen::Matrix2d refl = 2.0 * u * u.transpose() - Eigen::Matrix2d::Identity();
    const auto ms = transform(s, refl, ctx.hoop_xy, Vec2::Zero());
    const auto f = measure_shot(ms, ctx, 1).factors;
    REQUIRE(f.valid);
    CHECK(std::abs(f.depth - base.depth) < 1e-6);
    CHECK(std::abs(f.left_right + base.left_right) < 1e-6);
    CHECK(std::abs(f.entry_angle - base.entry_angle) < 1e-6);
}

TEST_CASE("Bayesian depth spread is smaller than OLS under height noise") {
    std::mt19937_64 rng(1234);
    std::vector<double> bayes, ols;
    MeasureCfg ocfg;
    ocfg.method = FitMethod::Ols;
    for (int k = 0; k < 1000; ++k) {
        const auto ctx = three_point_context(-75.0 + 0.15 * k);
        const auto s = trajectory(ctx, factors(11.0, 0.0, 45.0), 0.15, 0.4, rng);
        const auto b = measure_shot(s, ctx, 1);
        const auto o = measure_shot(s, ctx, 1, ocfg);
        if (b.factors.valid) bayes.push_back(b.factors.depth);
        if (o.factors.valid) ols.push_back(o.factors.depth);
    }
    REQUIRE(bayes.size() > 900);
    REQUIRE(ols.size() > 900);
    CHECK(sample_sd(bayes) < sample_sd(ols));
}

TEST_CASE("resampled factors reuse the fitted path") {
    const auto ctx = three_point_context(5.0);
    std::mt19937_64 rng(8);
    const auto s = trajectory(ctx, factors(11.0, 0.0, 45.0), 0.15, 0.4, rng);
    const auto m = measure_shot(s, ctx, 1);
    REQUIRE(m.fit);
    const auto f = factors_for_beta(*m.fit, m.fit->beta, *m.path, ctx);
    REQUIRE(f);
    CHECK(f->depth == doctest::Approx(m.factors.depth).epsilon(1e-12));
    CHECK(f->entry_angle == doctest::Approx(m.factors.entry_angle).epsilon(1e-12));
    Vec6 flat = Vec6::Zero();
    flat[0] = 5.0;
    CHECK_FALSE(factors_for_beta(*m.fit, flat, *m.path, ctx).has_value());
}
