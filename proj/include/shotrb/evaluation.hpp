#pragma once

// Comparison experiments over player estimators: half-season prediction
// error tables, error-vs-sample-size curves, rank agreement, discrimination
// and resampled estimator spread.

#include <shotrb/estimators.hpp>
#include <shotrb/records.hpp>
#include <shotrb/shotprob.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shotrb {

using PlayerTable = std::map<std::string, PlayerShots>;

struct SeasonShots {
    PlayerTable players;
    std::vector<std::string> games;  // ShotObs::game indexes into this
};

struct SplitDataset {
    PlayerTable first_half;
    PlayerTable second_half;
    std::vector<std::string> games;
};

/// Group shots by player. `p_make` and `filled` are parallel to `shots`.
SeasonShots assemble_season(std::span<const ShotRecord> shots, std::span<const double> p_make,
                            std::span<const std::uint8_t> filled);

/// Same grouping, partitioned by period_half.
SplitDataset split_halves(std::span<const ShotRecord> shots, std::span<const double> p_make,
                          std::span<const std::uint8_t> filled);

struct PlayerValue {
    double value = 0.0;
    std::size_t attempts = 0;
};

using PlayerValues = std::map<std::string, PlayerValue>;

/// Mean |estimate - target| over players with at least `min_attempts` in
/// both maps, each player weighted equally. Throws NoQualifyingPlayers.
double prediction_mae(const PlayerValues& estimates, const PlayerValues& targets, std::size_t min_attempts);

enum class MaeColumn { Raw = 0, GrandMean, RB, ShrunkRaw, ShrunkRB };
inline constexpr std::array<const char*, 5> kMaeColumnNames = {"raw", "grand_mean", "rb", "shrunk_raw",
                                                               "shrunk_rb"};
inline constexpr std::array<const char*, 4> kMaeRowNames = {"3PT", "FT", "2PT", "TS"};

struct MaeTable {
    static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
    // Rows 3PT, FT, 2PT, TS; columns per MaeColumn. NaN when no player qualifies.
    std::array<std::array<double, 5>, 4> mae{};
    std::array<std::size_t, 4> players{};
};

struct ShrinkCfg {
    double prior_count = 10.0;
    // Prior mean per ShotClass; NaN means the first-half league make rate.
    std::array<double, 3> prior_mean{MaeTable::kMissing, MaeTable::kMissing, MaeTable::kMissing};
};

/// League make fraction of one class.
double league_rate(const PlayerTable& table, ShotClass c);
/// Prior for one class, resolving a NaN mean to the league rate of `table`.
BetaPrior class_prior(const PlayerTable& table, ShotClass c, const ShrinkCfg& cfg);

/// First-half per-player estimates of one kind for one class.
PlayerValues class_estimates(const PlayerTable& table, ShotClass c, MaeColumn column, const BetaPrior& prior,
                             double grand_mean);
/// Per-player raw make fraction.
PlayerValues class_raw(const PlayerTable& table, ShotClass c);

MaeTable mae_table(const SplitDataset& split, const ShrinkCfg& cfg, std::size_t min_attempts);

struct RmsePoint {
    double fraction = 0.0;
    double rmse = 0.0;
    std::size_t players = 0;
};

/// RMSE of the estimator computed from a seeded random subset of whole games
/// against each player's full-season raw make fraction. Players with fewer
/// than `min_attempts` season attempts, or no attempts in the sampled games,
/// are skipped.
std::vector<RmsePoint> rmse_vs_game_fraction(const SeasonShots& season, ShotClass c,
                                             std::span<const double> fractions, EstimatorKind kind,
                                             std::uint64_t seed, std::size_t min_attempts = 1);

/// Spearman rank correlation over players present in both maps, average
/// ranks for ties. Throws TooFewPlayers below three common players.
double spearman_rank(const std::map<std::string, double>& a, const std::map<std::string, double>& b);

/// Average (1-based) ranks with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// 1 - mean(sampling variance) / (between-player variance of the metric), clipped to [0, 1].
double discrimination(std::span<const double> values, std::span<const double> sampling_variances);

/// A shot as seen by the resampler: fit posterior and path when the
/// trajectory was usable, otherwise only the outcome (used as fill).
struct ResampleShot {
    std::optional<QuadraticFit> fit;
    std::optional<LinePath> path;
    ShotContext ctx;
    int outcome = 0;
};

/// Average over `repeats` of the empirical standard deviation of the RB
/// estimator when every fit's coefficients are redrawn from
/// N(beta, cov_scale * sigma^2 * precision^-1). Draws that miss the rim plane
/// use the outcome as fill.
double simulated_rb_sd(std::span<const ResampleShot> shots, const ProbModel& model, std::size_t repeats,
                       std::uint64_t seed, double cov_scale = 1.0, double tangency_tol = 1e-6);

struct TuneResult {
    BetaPrior prior;
    std::vector<double> mae;  // per grid point
};

/// Pick alpha0 from `grid` minimizing the shrunk-RB prediction MAE, with
/// beta0 = alpha0 (1 - m) / m. Ties resolve to the earliest grid point.
TuneResult tune_shrinkage(const SplitDataset& split, ShotClass c, double prior_mean,
                          std::span<const double> grid, std::size_t min_attempts);

}  // namespace shotrb
