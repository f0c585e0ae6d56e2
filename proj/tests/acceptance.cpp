// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <shotrb/pipeline.hpp>

#include <CLI11.hpp>
#include <boost/random/beta_distribution.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace shotrb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;
std::set<int> known_fail;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass && !known_fail.count(id)) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " (" << o.detail << ")"
              << std::endl;
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// --- 1 ---------------------------------------------------------------------

Outcome grand_mean_scores() {
    const auto t0 = Clock::now();
    SimConfig cfg;
    cfg.n_players = 1000;
    cfg.seed = 11;
    const auto league = gen_league(cfg);
    std::mt19937_64 rng(mix_seed(cfg.seed, 99));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> y;
    for (const auto& p : league)
        for (int k = 0; k < 100; ++k) y.push_back(u(rng) < p.theta[0] ? 1 : 0);
    const std::vector<double> c(y.size(), 0.35);
    const double brier = score_brier(c, y), ll = score_logloss(c, y);
    const double secs = seconds_since(t0);
    const bool pass = std::abs(brier - 0.2275) <= 0.002 && std::abs(ll - 0.6474) <= 0.005 && secs < 10.0;
    return {pass, "n=" + std::to_string(y.size()) + " brier=" + fmt(brier) + " logloss=" + fmt(ll) +
                      " time=" + fmt(secs, 2) + "s"};
}

// --- 2 and 7 ---------------------------------------------------------------

struct Replication {
    double mse_raw = 0.0, mse_rb = 0.0;              // against true theta, true probabilities
    double mae_raw = 0.0, mae_rb = 0.0, mae_srb = 0.0;  // second-half prediction, estimated probabilities
    std::vector<double> rmse_raw, rmse_rb;           // by game fraction, estimated probabilities
    double rmse_full_raw = -1.0;
};

const std::vector<double> kFractions{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};

PipelineConfig replication_config(std::uint64_t seed) {
    PipelineConfig cfg;
    cfg.seed = seed;
    cfg.sim.n_players = 260;
    cfg.sim.shots = {CountRange{200, 200}, CountRange{0, 0}, CountRange{0, 0}};
    cfg.sim.seed = seed;
    // Between-player spread of a real league (sd about 0.047) rather than the
    // much wider default skill prior.
    cfg.sim.skill[0] = BetaPrior::from_mean(0.35, 100.0);
    return cfg;
}

std::vector<FactorRow> measure(const std::vector<ShotRecord>& shots, const PipelineConfig& cfg) {
    return measure_shots(shots, cfg, jobs()).factors;
}

Replication replicate(std::uint64_t rep) {
    const auto cfg = replication_config(mix_seed(2024, rep));
    const auto season = gen_dataset(cfg.sim);
    auto train_sim = cfg.sim;
    train_sim.seed = mix_seed(cfg.seed, 0x747261696e);
    const auto train = gen_dataset(train_sim);

    Replication out;

    // True probabilities against true skill, first half.
    {
        std::map<std::string, std::pair<std::vector<int>, std::vector<double>>> by_player;
        for (std::size_t i = 0; i < season.shots.size(); ++i) {
            const auto& s = season.shots[i];
            if (s.period_half != 1) continue;
            by_player[s.player_id].first.push_back(s.outcome);
            by_player[s.player_id].second.push_back(season.truth[i].p);
        }
        std::size_t n = 0;
        for (const auto& p : season.players) {
            const auto it = by_player.find(p.player_id);
            if (it == by_player.end()) continue;
            const double theta = p.theta[0];
            out.mse_raw += std::pow(raw_fg_pct(it->second.first) - theta, 2);
            out.mse_rb += std::pow(rb_fg_pct(it->second.second) - theta, 2);
            ++n;
        }
        out.mse_raw /= static_cast<double>(n);
        out.mse_rb /= static_cast<double>(n);
    }

    // Noisy trajectories through measurement, a model trained on the other season, and estimation.
    const auto train_factors = measure(train.shots, cfg);
    std::vector<LabeledRow> rows;
    for (std::size_t i = 0; i < train.shots.size(); ++i)
        if (train_factors[i].factors.valid)
            rows.push_back({build_features(train_factors[i].factors), train.shots[i].outcome});
    const auto model = train_logistic(rows, cfg.model.train);
    const std::array<ProbModel, 3> models{model, model, model};

    const auto factors = measure(season.shots, cfg);
    const auto probs = predict_probabilities(season.shots, factors, models);
    std::vector<double> p;
    std::vector<std::uint8_t> filled;
    for (const auto& r : probs) {
        p.push_back(r.p_make);
        filled.push_back(r.filled ? 1 : 0);
    }
    const auto split = split_halves(season.shots, p, filled);
    const auto table = mae_table(split, cfg.shrink, cfg.eval.min_attempts);
    const auto& row = table.mae[0];
    out.mae_raw = row[static_cast<std::size_t>(MaeColumn::Raw)];
    out.mae_rb = row[static_cast<std::size_t>(MaeColumn::RB)];
    out.mae_srb = row[static_cast<std::size_t>(MaeColumn::ShrunkRB)];

    auto fractions = kFractions;
    fractions.push_back(1.0);
    const auto whole = assemble_season(season.shots, p, filled);
    const auto raw = rmse_vs_game_fraction(whole, ShotClass::ThreePoint, fractions, EstimatorKind::Raw, rep, 1);
    const auto rb = rmse_vs_game_fraction(whole, ShotClass::ThreePoint, fractions, EstimatorKind::RB, rep, 1);
    for (std::size_t k = 0; k < kFractions.size(); ++k) {
        out.rmse_raw.push_back(raw[k].rmse);
        out.rmse_rb.push_back(rb[k].rmse);
    }
    out.rmse_full_raw = raw.back().rmse;
    return out;
}

// --- 3 ---------------------------------------------------------------------

Outcome depth_spread() {
    SimConfig sim;
    sim.z_noise = 0.4;
    std::mt19937_64 rng(303);
    MeasureCfg ols;
    ols.method = FitMethod::Ols;
    std::vector<double> b, o;
    ShotFactors truth;
    truth.depth = 11.0;
    truth.left_right = 0.0;
    truth.entry_angle = 45.0;
    truth.valid = true;
    const auto sd = [](const std::vector<double>& v) {
        double m = 0.0, s = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    for (int k = 0; k < 1200; ++k) {
        const double phi = (-75.0 + 150.0 * k / 1200.0) * 3.14159265358979323846 / 180.0;
        const ShotContext ctx{sim.hoop_xy + 24.0 * Vec2(std::cos(phi), std::sin(phi)), sim.hoop_xy, 10.0, 0.75};
        const auto samples = gen_trajectory(ctx, truth, sim, rng);
        const auto mb = measure_shot(samples, ctx, 1);
        const auto mo = measure_shot(samples, ctx, 1, ols);
        if (mb.factors.valid) b.push_back(mb.factors.depth);
        if (mo.factors.valid) o.push_back(mo.factors.depth);
    }
    const double ratio = sd(b) / sd(o);
    const bool pass = b.size() >= 1000 && o.size() >= 1000 && ratio < 0.9;
    return {pass, "shots bayes=" + std::to_string(b.size()) + " ols=" + std::to_string(o.size()) +
                      " sd bayes=" + fmt(sd(b), 3) + " ols=" + fmt(sd(o), 3) + " ratio=" + fmt(ratio, 3)};
}

// --- 4 ---------------------------------------------------------------------

Outcome logistic_recovery() {
    SimConfig sim;
    const auto truth = sim.bowl.coefficients();
    const auto generator = ProbModel::from_raw(truth);
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<LabeledRow> rows;
    std::vector<double> p;
    for (int i = 0; i < 50000; ++i) {
        const auto t = gen_shot_truth(sim, 1.0, rng);
        const double pi = predict_make_prob(generator, t.factors);
        rows.push_back({build_features(t.factors), u(rng) < pi ? 1 : 0});
        p.push_back(pi);
    }
    const auto m = train_logistic(rows);
    const auto raw = m.raw_coef();
    const auto cov = m.raw_covariance();
    double worst_z = 0.0;
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        worst_z = std::max(worst_z, std::abs(raw[j] - truth[j]) / std::sqrt(cov(j, j)));

    std::vector<double> pred;
    std::vector<int> y;
    double bayes = 0.0, mean_pred = 0.0, rate = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pred.push_back(predict_make_prob(m, rows[i].x));
        y.push_back(rows[i].outcome);
        bayes += std::min(p[i], 1.0 - p[i]);
        mean_pred += pred.back();
        rate += rows[i].outcome;
    }
    const double n = static_cast<double>(rows.size());
    bayes /= n;
    mean_pred /= n;
    rate /= n;
    const double mis = score_misclassification(pred, y);
    const double calib = std::abs(mean_pred - rate);
    const bool pass = m.converged && worst_z <= 3.0 && std::abs(mis - bayes) <= 0.02 && calib < 1e-6;
    std::ostringstream d;
    d << "max |coef - w*|/se=" << fmt(worst_z, 2) << " misclass=" << fmt(mis) << " bayes=" << fmt(bayes)
      << " calibration=" << calib;
    return {pass, d.str()};
}

// --- 5 ---------------------------------------------------------------------

Outcome beta_oracle() {
    std::mt19937_64 rng(505);
    boost::random::beta_distribution<double> dist(3.5, 6.5);
    std::vector<double> draws(5000);
    for (auto& x : draws) x = dist(rng);
    const auto fit = fit_beta_mle(draws);

    const auto q = nelder_mead_minimize([](std::span<const double> x) { return (x[0] - 2.0) * (x[0] - 2.0); }, {0.0});
    const auto rosen = nelder_mead_minimize(
        [](std::span<const double> x) { return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2); },
        {-1.2, 1.0});
    const double q_err = std::abs(q.x[0] - 2.0);
    const double r_err = std::max(std::abs(rosen.x[0] - 1.0), std::abs(rosen.x[1] - 1.0));
    const bool pass = std::abs(fit.theta - 0.35) <= 0.01 && std::abs(fit.v - 10.0) <= 1.5 && q_err < 1e-6 &&
                      r_err < 1e-4;
    std::ostringstream d;
    d << "theta=" << fmt(fit.theta) << " v=" << fmt(fit.v, 3) << " quadratic err=" << q_err
      << " rosenbrock err=" << r_err << " (" << rosen.iterations << " iterations)";
    return {pass, d.str()};
}

// --- 6 ---------------------------------------------------------------------

Outcome shrinkage_exact() {
    const BetaPrior prior{3.5, 6.5};
    const double a = shrink_estimate(0.4, 90.0, prior);
    const double b = shrink_estimate(0.2, 30.0, prior);  // (3.5 + 6) / 40
    const double z = shrink_estimate(0.9, 0.0, prior);
    const bool pass = std::abs(a - 0.395) <= 1e-12 && std::abs(b - 9.5 / 40.0) <= 1e-12 && std::abs(z - 0.35) <= 1e-12;
    std::ostringstream d;
    d.precision(17);
    d << "(0.4, 90)->" << a << " (0.2, 30)->" << b << " v=0->" << z;
    return {pass, d.str()};
}

// --- 8 ---------------------------------------------------------------------

Outcome round_trip_and_determinism() {
    SimConfig sim;
    sim.n_players = 20;
    sim.n_games = 10;
    sim.shots = {CountRange{10, 10}, CountRange{10, 10}, CountRange{10, 10}};
    sim.xy_noise = 0.0;
    sim.z_noise = 0.0;
    sim.seed = 808;
    const auto season = gen_dataset(sim);
    MeasureCfg mcfg;
    mcfg.bayes.pseudo_weight = 0.0;
    mcfg.bayes.prior_precision = 1e-10 * Mat6::Identity();
    double worst = 0.0;
    std::size_t invalid = 0;
    for (std::size_t i = 0; i < season.shots.size(); ++i) {
        const auto& s = season.shots[i];
        const auto m = measure_shot(s.samples, s.context(), s.outcome, mcfg);
        if (!m.factors.valid) {
            ++invalid;
            continue;
        }
        const auto& t = season.truth[i].factors;
        worst = std::max({worst, std::abs(m.factors.depth - t.depth), std::abs(m.factors.left_right - t.left_right),
                          std::abs(m.factors.entry_angle - t.entry_angle)});
    }

    PipelineConfig cfg;
    cfg.apply_text(
        "sim.n_players = 24\nsim.n_games = 12\nsim.shots_min.3PT = 20\nsim.shots_max.3PT = 30\n"
        "sim.shots_min.FT = 10\nsim.shots_max.FT = 14\nsim.shots_min.2PT = 20\nsim.shots_max.2PT = 30\n"
        "eval.min_attempts = 3\neval.rmse_seeds = 3\neval.sd_repeats = 3\n");
    std::vector<std::string> manifests;
    for (unsigned j : {1u, 1u, 4u}) {
        const auto dir = fs::temp_directory_path() / ("shotrb_acceptance_" + std::to_string(manifests.size()));
        fs::remove_all(dir);
        cfg.out = dir;
        RunOptions opts;
        opts.jobs = j;
        run_pipeline(cfg, opts);
        manifests.push_back(read_file(ArtifactLayout{dir}.manifest()));
        fs::remove_all(dir);
    }
    const bool same = manifests[0] == manifests[1] && manifests[0] == manifests[2];
    const bool pass = invalid == 0 && worst <= 1e-6 && same;
    std::ostringstream d;
    d << "shots=" << season.shots.size() << " invalid=" << invalid << " max factor error=" << worst
      << " manifests identical across runs and jobs 1/1/4: " << (same ? "yes" : "no");
    return {pass, d.str()};
}

// --- 9 ---------------------------------------------------------------------

Outcome ci_anchor() {
    const auto [lo, hi] = normal_ci(0.309, 0.0274 * 0.0274, 0.9);
    const bool pass = std::abs(lo - 0.264) <= 0.001 && std::abs(hi - 0.354) <= 0.001;
    return {pass, "(" + fmt(lo) + ", " + fmt(hi) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shotrb acceptance checks"};
    std::vector<int> known;
    app.add_option("--known-fail", known, "criteria whose failure is documented and does not set the exit status");
    CLI11_PARSE(app, argc, argv);
    known_fail.insert(known.begin(), known.end());

    report(1, "grand-mean Brier and log loss", grand_mean_scores);

    const auto t0 = Clock::now();
    std::vector<Replication> reps;
    for (std::uint64_t r = 0; r < 20; ++r) reps.push_back(replicate(r));
    const double rep_secs = seconds_since(t0);

    report(2, "Rao-Blackwell reduction", [&] {
        int true_wins = 0, ordered = 0;
        for (const auto& r : reps) {
            true_wins += r.mse_rb < r.mse_raw;
            ordered += r.mae_srb <= r.mae_rb && r.mae_rb <= r.mae_raw;
        }
        double raw = 0.0, rb = 0.0, srb = 0.0;
        for (const auto& r : reps) raw += r.mae_raw / 20.0, rb += r.mae_rb / 20.0, srb += r.mae_srb / 20.0;
        const bool pass = true_wins == 20 && ordered >= 18 && rep_secs < 120.0;
        std::ostringstream d;
        d << "true-p MSE(rb)<MSE(raw) " << true_wins << "/20; shrunk_rb<=rb<=raw MAE " << ordered
          << "/20; mean MAE raw=" << fmt(raw) << " rb=" << fmt(rb) << " shrunk_rb=" << fmt(srb)
          << "; time=" << fmt(rep_secs, 1) << "s";
        return Outcome{pass, d.str()};
    });

    report(3, "Bayesian vs OLS depth spread", depth_spread);
    report(4, "logistic recovery", logistic_recovery);
    report(5, "Beta MLE and Nelder-Mead", beta_oracle);
    report(6, "shrinkage exactness", shrinkage_exact);

    report(7, "RMSE against game fraction", [&] {
        bool pass = true;
        std::ostringstream d;
        for (std::size_t k = 0; k < kFractions.size(); ++k) {
            double raw = 0.0, rb = 0.0;
            for (const auto& r : reps) raw += r.rmse_raw[k] / 20.0, rb += r.rmse_rb[k] / 20.0;
            pass = pass && rb < raw;
            d << fmt(kFractions[k], 2) << ": raw=" << fmt(raw) << " rb=" << fmt(rb) << "; ";
        }
        double full = 0.0;
        for (const auto& r : reps) full = std::max(full, r.rmse_full_raw);
        pass = pass && full == 0.0;
        d << "raw at 1.0=" << full;
        return Outcome{pass, d.str()};
    });

    report(8, "round trip and determinism", round_trip_and_determinism);
    report(9, "confidence-interval anchor", ci_anchor);
    return failures == 0 ? 0 : 1;
}
