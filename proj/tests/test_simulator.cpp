#include "support.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace shotrb;
using namespace testing_support;

namespace {

SimConfig only_threes(std::size_t players, std::size_t shots) {
    SimConfig cfg;
    cfg.n_players = players;
    cfg.shots = {CountRange{shots, shots}, CountRange{0, 0}, CountRange{0, 0}};
    return cfg;
}

}  // namespace

TEST_CASE("league generation is seeded") {
    SimConfig cfg;
    cfg.n_players = 50;
    const auto a = gen_league(cfg);
    const auto b = gen_league(cfg);
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].player_id == b[i].player_id);
        CHECK(a[i].theta == b[i].theta);
        CHECK(a[i].spread == b[i].spread);
    }
    cfg.seed = 2;
    CHECK(gen_league(cfg)[0].theta != a[0].theta);
}

TEST_CASE("league skill follows the prior") {
    SimConfig cfg;
    cfg.n_players = 10000;
    const auto league = gen_league(cfg);
    std::vector<double> theta;
    for (const auto& p : league) theta.push_back(p.theta[index_of(ShotClass::ThreePoint)]);
    CHECK(std::abs(mean(theta) - 0.35) <= 0.005);

    // Higher skill means tighter factors.
    const SkillCalibration calib(cfg);
    CHECK(calib.spread_for(0.5) < calib.spread_for(0.3));
    CHECK(calib.mean_prob(calib.spread_for(0.4)) == doctest::Approx(0.4).epsilon(1e-6));

    cfg.n_players = 200;
    cfg.skill[0] = BetaPrior::from_mean(0.35, 1e8);
    for (const auto& p : gen_league(cfg)) CHECK(std::abs(p.theta[0] - 0.35) < 1e-3);
}

TEST_CASE("noise-free trajectories round-trip through trajgeom") {
    SimConfig cfg;
    cfg.xy_noise = 0.0;
    cfg.z_noise = 0.0;
    MeasureCfg mcfg;
    mcfg.bayes.pseudo_weight = 0.0;
    mcfg.bayes.prior_precision = 1e-10 * Mat6::Identity();
    std::mt19937_64 rng(10);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto ctx = three_point_context(-70.0 + 0.7 * k, 8.0 + 0.09 * k);
        const auto truth = gen_shot_truth(cfg, 1.0, rng);
        // The track lies in a vertical plane; the tiny prior keeps the
        // cross-track terms determined.
        const auto samples = gen_trajectory(ctx, truth.factors, cfg, rng);
        const auto m = measure_shot(samples, ctx, 1, mcfg);
        REQUIRE(m.factors.valid);
        worst = std::max({worst, std::abs(m.factors.depth - truth.factors.depth),
                          std::abs(m.factors.left_right - truth.factors.left_right),
                          std::abs(m.factors.entry_angle - truth.factors.entry_angle)});
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("height noise leaves depth unbiased") {
    SimConfig cfg;
    cfg.xy_noise = 0.0;
    cfg.z_noise = 0.4;
    MeasureCfg mcfg;
    mcfg.bayes.pseudo_weight = 0.0;
    std::mt19937_64 rng(100);
    std::vector<double> err;
    for (int k = 0; k < 1000; ++k) {
        const auto ctx = three_point_context(-75.0 + 0.15 * k);
        const auto f = factors(11.0, 0.0, 45.0);
        const auto samples = gen_trajectory(ctx, f, cfg, rng);
        const auto m = measure_shot(samples, ctx, 1, mcfg);
        if (m.factors.valid) err.push_back(m.factors.depth - 11.0);
    }
    REQUIRE(err.size() > 900);
    const double se = sample_sd(err) / std::sqrt(static_cast<double>(err.size()));
    CHECK(std::abs(mean(err)) <= 3.0 * se);
}

TEST_CASE("tracking runs at the sample rate") {
    SimConfig cfg;
    std::mt19937_64 rng(1);
    for (double angle : {35.0, 45.0, 55.0}) {
        const auto ctx = three_point_context(10.0);
        const auto s = gen_trajectory(ctx, factors(11.0, 0.0, angle), cfg, rng);
        // Flight time from the generated arc: horizontal distance over horizontal speed.
        const Vec2 cross = crossing_point(ctx, 11.0, 0.0);
        const double len = (cross - ctx.release_xy).norm();
        const double slope = std::tan(angle * kPi / 180.0);
        const double curv = (10.0 - 7.0 + len * slope) / (len * len);
        const double flight = len / std::sqrt(32.174 / (2.0 * curv));
        CHECK(std::abs(static_cast<double>(s.size()) - flight * 25.0) <= 1.0);
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].t - s[i - 1].t == doctest::Approx(0.04));
    }
    CHECK_THROWS_AS(gen_trajectory(three_point_context(0.0), factors(11.0, 0.0, 0.0), cfg, rng), Error);
    try {
        gen_trajectory(three_point_context(0.0), factors(11.0, 0.0, -5.0), cfg, rng);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InfeasibleFactors);
    }
}

TEST_CASE("crossing point geometry") {
    const auto ctx = three_point_context(30.0);
    const Vec2 u = ctx.shooter_axis();
    const Vec2 c = crossing_point(ctx, 9.0, 0.0);
    CHECK((c - ctx.hoop_xy).norm() < 1e-12);
    const auto f = compute_shot_factors(crossing_point(ctx, 12.5, -2.0), -1.0, ctx);
    CHECK(f.depth == doctest::Approx(12.5).epsilon(1e-12));
    CHECK(f.left_right == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK((crossing_point(ctx, 21.0, 0.0) - (ctx.hoop_xy + u)).norm() < 1e-12);
}

TEST_CASE("dataset bookkeeping") {
    SimConfig cfg;
    cfg.n_players = 30;
    cfg.n_games = 20;
    cfg.shots = {CountRange{40, 60}, CountRange{10, 20}, CountRange{0, 0}};
    const auto s = gen_dataset(cfg);
    REQUIRE(s.shots.size() == s.truth.size());
    CHECK(s.players.size() == 30);

    std::map<std::string, std::array<std::size_t, 3>> counts;
    std::set<std::string> first, second, ids;
    for (std::size_t i = 0; i < s.shots.size(); ++i) {
        const auto& r = s.shots[i];
        ++counts[r.player_id][index_of(r.shot_class)];
        (r.period_half == 1 ? first : second).insert(r.game_id);
        ids.insert(r.shot_id);
        CHECK(s.truth[i].shot_id == r.shot_id);
        CHECK(r.points == point_value(r.shot_class));
        CHECK(r.samples.size() >= 8);
    }
    CHECK(ids.size() == s.shots.size());
    for (const auto& [id, c] : counts) {
        CHECK(c[0] >= 40);
        CHECK(c[0] <= 60);
        CHECK(c[1] >= 10);
        CHECK(c[1] <= 20);
        CHECK(c[2] == 0);
    }
    for (const auto& g : first) CHECK(second.count(g) == 0);
    CHECK(first.size() + second.size() <= 20);

    const auto again = gen_dataset(cfg);
    REQUIRE(again.shots.size() == s.shots.size());
    for (std::size_t i = 0; i < s.shots.size(); ++i) {
        CHECK(again.shots[i].outcome == s.shots[i].outcome);
        CHECK(again.shots[i].samples.back().z == s.shots[i].samples.back().z);
    }

    auto exact = only_threes(260, 100);
    exact.n_games = 82;
    const auto big = gen_dataset(exact);
    CHECK(big.shots.size() == 26000);
}

TEST_CASE("league make rate matches the skill prior") {
    auto cfg = only_threes(400, 100);
    const auto s = gen_dataset(cfg);
    double made = 0.0;
    for (const auto& r : s.shots) made += r.outcome;
    const double rate = made / static_cast<double>(s.shots.size());
    // Between-player variance of the mean skill plus Bernoulli noise.
    const double var_theta = 3.5 * 6.5 / (100.0 * 11.0);
    const double sigma = std::sqrt(var_theta / 400.0 + 0.35 * 0.65 / static_cast<double>(s.shots.size()));
    CHECK(std::abs(rate - 0.35) <= 2.0 * sigma);
}

TEST_CASE("players make shots at their true rate") {
    auto cfg = only_threes(3, 10000);
    cfg.n_games = 10;
    const auto s = gen_dataset(cfg);
    std::map<std::string, std::pair<double, double>> tally;
    for (const auto& r : s.shots) {
        tally[r.player_id].first += r.outcome;
        tally[r.player_id].second += 1.0;
    }
    for (const auto& p : s.players) {
        const auto [made, n] = tally.at(p.player_id);
        CHECK(std::abs(made / n - p.theta[0]) <= 0.01);
    }
}

TEST_CASE("geometric make rule") {
    auto cfg = only_threes(5, 50);
    cfg.geometric_outcomes = true;
    const auto s = gen_dataset(cfg);
    for (std::size_t i = 0; i < s.shots.size(); ++i) {
        const auto& f = s.truth[i].factors;
        const auto ctx = s.shots[i].context();
        const Vec2 c = crossing_point(ctx, f.depth, f.left_right);
        const double opening = 0.75 - 0.39 / std::sin(f.entry_angle * kPi / 180.0);
        CHECK(s.shots[i].outcome == ((c - ctx.hoop_xy).norm() <= opening ? 1 : 0));
        CHECK(s.truth[i].p == s.shots[i].outcome);
    }
}
