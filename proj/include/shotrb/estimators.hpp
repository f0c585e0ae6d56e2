#pragma once

// Player-level shooting estimators: raw make fraction, the Rao-Blackwellized
// mean of per-shot make probabilities, Beta-prior shrinkage of either, their
// sampling variances and normal-approximation intervals.

#include <shotrb/error.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shotrb {

enum class ShotClass { ThreePoint = 0, FreeThrow = 1, TwoPoint = 2 };

/// Reporting order: 3PT, FT, 2PT.
inline constexpr std::array<ShotClass, 3> kShotClasses = {ShotClass::ThreePoint, ShotClass::FreeThrow,
                                                          ShotClass::TwoPoint};

std::string_view to_string(ShotClass c) noexcept;
ShotClass parse_shot_class(std::string_view s);
int point_value(ShotClass c) noexcept;
inline std::size_t index_of(ShotClass c) noexcept { return static_cast<std::size_t>(c); }

struct ShotObs {
    int outcome = 0;
    double p_make = 0.0;  // model probability, or the 0/1 fill for unusable trajectories
    bool filled = false;
    std::uint32_t game = 0;
};

struct PlayerShots {
    std::string player_id;
    std::array<std::vector<ShotObs>, 3> by_class;

    std::vector<ShotObs>& shots(ShotClass c) { return by_class[index_of(c)]; }
    const std::vector<ShotObs>& shots(ShotClass c) const { return by_class[index_of(c)]; }
    std::size_t attempts(ShotClass c) const { return shots(c).size(); }
};

double raw_fg_pct(std::span<const int> outcomes);
double raw_fg_pct(std::span<const ShotObs> shots);
double rb_fg_pct(std::span<const double> p_makes);
double rb_fg_pct(std::span<const ShotObs> shots);

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

struct NelderMeadCfg {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double tolerance = 1e-8;  // simplex spread, in both x and f
    int max_iterations = 500;
    double initial_step = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;  // false means the iteration limit was hit
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free simplex minimization. Deterministic for fixed x0 and cfg.
NelderMeadResult nelder_mead_minimize(const Objective& f, std::vector<double> x0,
                                      const NelderMeadCfg& cfg = {});

// ---------------------------------------------------------------------------
// Beta distribution of per-shot probabilities
// ---------------------------------------------------------------------------

struct BetaFit {
    double alpha = 0.0;
    double beta = 0.0;
    double theta = 0.0;  // alpha / (alpha + beta)
    double v = 0.0;      // alpha + beta
    double loglik = 0.0;
    bool converged = false;
};

/// Method-of-moments shapes, used as the optimizer start.
std::pair<double, double> beta_moments_start(std::span<const double> values);

double beta_log_likelihood(std::span<const double> values, double alpha, double beta);

/// Maximum-likelihood Beta fit over (log alpha, log beta). Needs at least 5
/// values strictly inside (0, 1); throws DegenerateSample when their
/// variance is below 1e-10.
BetaFit fit_beta_mle(std::span<const double> values, const NelderMeadCfg& cfg = {});

// ---------------------------------------------------------------------------
// Shrinkage, variances, intervals
// ---------------------------------------------------------------------------

struct BetaPrior {
    double alpha0 = 3.5;
    double beta0 = 6.5;

    double mean() const { return alpha0 / (alpha0 + beta0); }
    double count() const { return alpha0 + beta0; }
    static BetaPrior from_mean(double mean, double count);
};

/// Posterior mean (alpha0 + theta*v) / (alpha0 + beta0 + v). v may be +inf.
double shrink_estimate(double theta_hat, double v_hat, const BetaPrior& prior = {});

enum class EstimatorKind { Raw, RB };

std::string_view to_string(EstimatorKind k) noexcept;

/// theta (1 - theta) / n
double raw_variance(double theta, std::size_t n);
/// Variance of the mean of n Beta(alpha, beta) draws.
double rb_variance(double alpha, double beta, std::size_t n);
/// Same quantity parameterized by mean theta and concentration v.
double rb_variance_mean_concentration(double theta, double v, std::size_t n);
/// Raw: params = (theta, unused). RB: params = Beta shapes (alpha, beta).
double estimator_variance(EstimatorKind kind, std::pair<double, double> params, std::size_t n);

std::pair<double, double> normal_ci(double theta_hat, double variance, double level);

/// Points per true-shooting attempt / 2, with FTA weighted 0.44.
double true_shooting_from_points(double points, std::size_t fga, std::size_t fta);
double true_shooting_pct(EstimatorKind kind, const PlayerShots& player);
/// TS% implied by per-class make rates and the player's attempt counts.
double true_shooting_from_rates(const PlayerShots& player, const std::array<double, 3>& rates);

struct ClassEstimate {
    std::size_t n = 0;
    std::size_t n_valid = 0;
    double theta_raw = 0.0;
    double theta_rb = 0.0;
    double theta_shrunk_raw = 0.0;
    double theta_shrunk_rb = 0.0;
    std::optional<BetaFit> beta;
    double var_raw = 0.0;
    double var_rb = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// All estimators for one player's shots of one class. The shrinkage data
/// weight is the attempt count; the Beta fit uses model probabilities only
/// (fills excluded) and falls back to the raw variance when it fails.
ClassEstimate estimate_class(std::span<const ShotObs> shots, const BetaPrior& prior,
                             double ci_level = 0.9);

}  // namespace shotrb
