#include <shotrb/evaluation.hpp>
#include <shotrb/simulator.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace shotrb {

namespace {

void check_parallel(std::span<const ShotRecord> shots, std::span<const double> p, std::span<const std::uint8_t> f) {
    if (shots.size() != p.size() || shots.size() != f.size())
        throw Error(ErrorCode::LengthMismatch, "shots, probabilities and fill flags differ in length");
}

std::size_t ts_attempts(const PlayerShots& p) {
    return p.attempts(ShotClass::ThreePoint) + p.attempts(ShotClass::TwoPoint) + p.attempts(ShotClass::FreeThrow);
}

double stdev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

SeasonShots assemble_season(std::span<const ShotRecord> shots, std::span<const double> p_make,
                            std::span<const std::uint8_t> filled) {
    check_parallel(shots, p_make, filled);
    // Game indices follow sorted game id order, independent of shot order.
    std::map<std::string, std::uint32_t> game_ids;
    for (const auto& s : shots) game_ids.emplace(s.game_id, 0);
    SeasonShots season;
    std::uint32_t next = 0;
    for (auto& [id, idx] : game_ids) {
        idx = next++;
        season.games.push_back(id);
    }
    for (std::size_t i = 0; i < shots.size(); ++i) {
        const auto& s = shots[i];
        auto& player = season.players[s.player_id];
        player.player_id = s.player_id;
        player.shots(s.shot_class).push_back({s.outcome, p_make[i], filled[i] != 0, game_ids.at(s.game_id)});
    }
    return season;
}

SplitDataset split_halves(std::span<const ShotRecord> shots, std::span<const double> p_make,
                          std::span<const std::uint8_t> filled) {
    check_parallel(shots, p_make, filled);
    SplitDataset split;
    std::map<std::string, std::uint32_t> game_ids;
    for (const auto& s : shots) game_ids.emplace(s.game_id, 0);
    std::uint32_t next = 0;
    for (auto& [id, idx] : game_ids) {
        idx = next++;
        split.games.push_back(id);
    }
    for (std::size_t i = 0; i < shots.size(); ++i) {
        const auto& s = shots[i];
        auto& table = s.period_half == 1 ? split.first_half : split.second_half;
        auto& player = table[s.player_id];
        player.player_id = s.player_id;
        player.shots(s.shot_class).push_back({s.outcome, p_make[i], filled[i] != 0, game_ids.at(s.game_id)});
    }
    return split;
}

double prediction_mae(const PlayerValues& estimates, const PlayerValues& targets, std::size_t min_attempts) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [id, est] : estimates) {
        const auto it = targets.find(id);
        if (it == targets.end()) continue;
        if (est.attempts < min_attempts || it->second.attempts < min_attempts) continue;
        sum += std::abs(est.value - it->second.value);
        ++n;
    }
    if (n == 0) throw Error(ErrorCode::NoQualifyingPlayers, "no player qualifies in both halves");
    return sum / static_cast<double>(n);
}

double league_rate(const PlayerTable& table, ShotClass c) {
    std::size_t makes = 0, n = 0;
    for (const auto& [id, p] : table)
        for (const auto& s : p.shots(c)) {
            makes += static_cast<std::size_t>(s.outcome != 0);
            ++n;
        }
    if (n == 0) throw Error(ErrorCode::EmptyShots, std::string("no ") + std::string(to_string(c)) + " shots");
    return static_cast<double>(makes) / static_cast<double>(n);
}

BetaPrior class_prior(const PlayerTable& table, ShotClass c, const ShrinkCfg& cfg) {
    double mean = cfg.prior_mean[index_of(c)];
    if (std::isnan(mean)) mean = league_rate(table, c);
    // Keep the prior proper when a class is all makes or all misses.
    mean = std::clamp(mean, 1e-3, 1.0 - 1e-3);
    return BetaPrior::from_mean(mean, cfg.prior_count);
}

PlayerValues class_raw(const PlayerTable& table, ShotClass c) {
    PlayerValues out;
    for (const auto& [id, p] : table) {
        const auto& shots = p.shots(c);
        if (shots.empty()) continue;
        out[id] = {raw_fg_pct(shots), shots.size()};
    }
    return out;
}

PlayerValues class_estimates(const PlayerTable& table, ShotClass c, MaeColumn column, const BetaPrior& prior,
                             double grand_mean) {
    PlayerValues out;
    for (const auto& [id, p] : table) {
        const auto& shots = p.shots(c);
        if (shots.empty()) continue;
        const double n = static_cast<double>(shots.size());
        double v = 0.0;
        switch (column) {
            case MaeColumn::Raw: v = raw_fg_pct(shots); break;
            case MaeColumn::GrandMean: v = grand_mean; break;
            case MaeColumn::RB: v = rb_fg_pct(shots); break;
            case MaeColumn::ShrunkRaw: v = shrink_estimate(raw_fg_pct(shots), n, prior); break;
            case MaeColumn::ShrunkRB: v = shrink_estimate(rb_fg_pct(shots), n, prior); break;
        }
        out[id] = {v, shots.size()};
    }
    return out;
}

namespace {

double class_rate(const PlayerShots& p, ShotClass c, MaeColumn column, const BetaPrior& prior) {
    const auto& shots = p.shots(c);
    if (shots.empty()) return prior.mean();
    const double n = static_cast<double>(shots.size());
    switch (column) {
        case MaeColumn::Raw: return raw_fg_pct(shots);
        case MaeColumn::RB: return rb_fg_pct(shots);
        case MaeColumn::ShrunkRaw: return shrink_estimate(raw_fg_pct(shots), n, prior);
        case MaeColumn::ShrunkRB: return shrink_estimate(rb_fg_pct(shots), n, prior);
        case MaeColumn::GrandMean: break;
    }
    return prior.mean();
}

double league_ts(const PlayerTable& table) {
    double points = 0.0;
    std::size_t fga = 0, fta = 0;
    for (const auto& [id, p] : table) {
        for (const auto c : kShotClasses)
            for (const auto& s : p.shots(c)) points += s.outcome != 0 ? point_value(c) : 0;
        fga += p.attempts(ShotClass::ThreePoint) + p.attempts(ShotClass::TwoPoint);
        fta += p.attempts(ShotClass::FreeThrow);
    }
    return true_shooting_from_points(points, fga, fta);
}

}  // namespace

MaeTable mae_table(const SplitDataset& split, const ShrinkCfg& cfg, std::size_t min_attempts) {
    MaeTable table;
    for (auto& row : table.mae) row.fill(MaeTable::kMissing);

    std::array<BetaPrior, 3> priors{};
    for (std::size_t r = 0; r < 3; ++r) {
        const ShotClass c = kShotClasses[r];
        double gm = 0.0;
        try {
            gm = league_rate(split.first_half, c);
        } catch (const Error&) {
            continue;
        }
        priors[index_of(c)] = class_prior(split.first_half, c, cfg);
        const auto targets = class_raw(split.second_half, c);
        for (std::size_t col = 0; col < 5; ++col) {
            const auto est = class_estimates(split.first_half, c, static_cast<MaeColumn>(col),
                                             priors[index_of(c)], gm);
            try {
                table.mae[r][col] = prediction_mae(est, targets, min_attempts);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoQualifyingPlayers) throw;
            }
        }
        for (const auto& [id, est] : class_raw(split.first_half, c)) {
            const auto it = targets.find(id);
            table.players[r] += it != targets.end() && est.attempts >= min_attempts &&
                                it->second.attempts >= min_attempts;
        }
    }

    // True shooting: per-class rates combined with each player's attempt mix.
    PlayerValues targets;
    for (const auto& [id, p] : split.second_half)
        if (ts_attempts(p) > 0) targets[id] = {true_shooting_pct(EstimatorKind::Raw, p), ts_attempts(p)};
    double gm = 0.0;
    try {
        gm = league_ts(split.first_half);
    } catch (const Error&) {
        return table;
    }
    for (std::size_t col = 0; col < 5; ++col) {
        const auto column = static_cast<MaeColumn>(col);
        PlayerValues est;
        for (const auto& [id, p] : split.first_half) {
            if (ts_attempts(p) == 0) continue;
            double v = gm;
            if (column != MaeColumn::GrandMean) {
                std::array<double, 3> rates{};
                for (const auto c : kShotClasses) rates[index_of(c)] = class_rate(p, c, column, priors[index_of(c)]);
                v = true_shooting_from_rates(p, rates);
            }
            est[id] = {v, ts_attempts(p)};
        }
        try {
            table.mae[3][col] = prediction_mae(est, targets, min_attempts);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoQualifyingPlayers) throw;
        }
    }
    for (const auto& [id, p] : split.first_half) {
        const auto it = targets.find(id);
        table.players[3] += it != targets.end() && ts_attempts(p) >= min_attempts &&
                            it->second.attempts >= min_attempts;
    }
    return table;
}

std::vector<RmsePoint> rmse_vs_game_fraction(const SeasonShots& season, ShotClass c,
                                             std::span<const double> fractions, EstimatorKind kind,
                                             std::uint64_t seed, std::size_t min_attempts) {
    const std::size_t n_games = season.games.size();
    if (n_games == 0) throw Error(ErrorCode::EmptyShots, "season has no games");
    std::vector<RmsePoint> curve;
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const double f = fractions[fi];
        if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidArgument, "fractions must lie in (0, 1]");
        const auto take = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(f * static_cast<double>(n_games))), 1, n_games);

        // Partial Fisher-Yates over game indices.
        std::vector<std::uint32_t> order(n_games);
        std::iota(order.begin(), order.end(), 0u);
        std::mt19937_64 rng(mix_seed(seed, fi));
        for (std::size_t i = 0; i < take; ++i) {
            const auto j = std::uniform_int_distribution<std::size_t>(i, n_games - 1)(rng);
            std::swap(order[i], order[j]);
        }
        std::vector<std::uint8_t> chosen(n_games, 0);
        for (std::size_t i = 0; i < take; ++i) chosen[order[i]] = 1;

        double ss = 0.0;
        std::size_t players = 0;
        std::vector<ShotObs> subset;
        for (const auto& [id, p] : season.players) {
            const auto& shots = p.shots(c);
            if (shots.empty() || shots.size() < min_attempts) continue;
            subset.clear();
            for (const auto& s : shots)
                if (chosen[s.game]) subset.push_back(s);
            if (subset.empty()) continue;
            const double target = raw_fg_pct(shots);
            const double est = kind == EstimatorKind::Raw ? raw_fg_pct(subset) : rb_fg_pct(subset);
            ss += (est - target) * (est - target);
            ++players;
        }
        if (players == 0) throw Error(ErrorCode::EmptyShots, "no player has shots in the sampled games");
        curve.push_back({f, std::sqrt(ss / static_cast<double>(players)), players});
    }
    return curve;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman_rank(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    std::vector<double> va, vb;
    for (const auto& [id, x] : a) {
        const auto it = b.find(id);
        if (it == b.end()) continue;
        va.push_back(x);
        vb.push_back(it->second);
    }
    if (va.size() < 3) throw Error(ErrorCode::TooFewPlayers, "need at least 3 common players");
    const auto ra = average_ranks(va), rb = average_ranks(vb);
    const double n = static_cast<double>(ra.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw Error(ErrorCode::ZeroTotalVariance, "a metric is constant across players");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double discrimination(std::span<const double> values, std::span<const double> sampling_variances) {
    if (values.size() != sampling_variances.size())
        throw Error(ErrorCode::LengthMismatch, "values and variances differ in length");
    if (values.size() < 3) throw Error(ErrorCode::TooFewPlayers, "need at least 3 players");
    const double total = stdev(values);
    if (!(total > 0.0)) throw Error(ErrorCode::ZeroTotalVariance, "metric is constant across players");
    const double mean_var = std::accumulate(sampling_variances.begin(), sampling_variances.end(), 0.0) /
                            static_cast<double>(sampling_variances.size());
    return std::clamp(1.0 - mean_var / (total * total), 0.0, 1.0);
}

double simulated_rb_sd(std::span<const ResampleShot> shots, const ProbModel& model, std::size_t repeats,
                       std::uint64_t seed, double cov_scale, double tangency_tol) {
    if (shots.empty()) throw Error(ErrorCode::EmptyShots, "no shots to resample");
    if (repeats == 0) throw Error(ErrorCode::InvalidArgument, "repeats must be at least 1");
    if (!(cov_scale >= 0.0)) throw Error(ErrorCode::InvalidArgument, "cov_scale must be non-negative");

    // Factor each precision once: beta = mean + scale * L^-T xi with precision = L L^T.
    std::vector<std::optional<Eigen::LLT<Mat6>>> chol(shots.size());
    for (std::size_t i = 0; i < shots.size(); ++i) {
        if (!shots[i].fit || !shots[i].path) continue;
        Eigen::LLT<Mat6> llt(shots[i].fit->precision);
        if (llt.info() == Eigen::Success) chol[i] = std::move(llt);
    }

    std::normal_distribution<double> normal;
    double total = 0.0;
    std::vector<double> probs(shots.size());
    for (std::size_t r = 0; r < repeats; ++r) {
        std::mt19937_64 rng(mix_seed(seed, r));
        for (std::size_t i = 0; i < shots.size(); ++i) {
            const auto& s = shots[i];
            probs[i] = s.outcome != 0 ? 1.0 : 0.0;
            if (!s.fit || !s.path) continue;
            Vec6 beta = s.fit->beta;
            if (chol[i] && cov_scale > 0.0) {
                Vec6 xi;
                for (int k = 0; k < 6; ++k) xi[k] = normal(rng);
                const double scale = std::sqrt(cov_scale * s.fit->noise_variance());
                beta += scale * chol[i]->matrixU().solve(xi);
            }
            const auto f = factors_for_beta(*s.fit, beta, *s.path, s.ctx, tangency_tol);
            if (f) probs[i] = predict_make_prob(model, *f);
        }
        total += stdev(probs) / std::sqrt(static_cast<double>(probs.size()));
    }
    return total / static_cast<double>(repeats);
}

TuneResult tune_shrinkage(const SplitDataset& split, ShotClass c, double prior_mean, std::span<const double> grid,
                          std::size_t min_attempts) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty alpha0 grid");
    if (!(prior_mean > 0.0 && prior_mean < 1.0)) throw Error(ErrorCode::InvalidArgument, "prior mean must be in (0,1)");
    const auto targets = class_raw(split.second_half, c);
    TuneResult out;
    double best = std::numeric_limits<double>::infinity();
    for (double a0 : grid) {
        const BetaPrior prior{a0, a0 * (1.0 - prior_mean) / prior_mean};
        const auto est = class_estimates(split.first_half, c, MaeColumn::ShrunkRB, prior, prior_mean);
        const double mae = prediction_mae(est, targets, min_attempts);
        out.mae.push_back(mae);
        if (mae < best) {
            best = mae;
            out.prior = prior;
        }
    }
    return out;
}

}  // namespace shotrb
