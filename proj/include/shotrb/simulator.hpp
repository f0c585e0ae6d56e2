#pragma once

// Synthetic leagues with known ground truth.
//
// Each player has a true make rate per shot class drawn from a Beta skill
// prior. Shots draw true rim-plane factors from a Gaussian around
// (11", 0", 45 deg) whose depth/left-right spread is calibrated so the mean
// make probability under the generating logistic model equals the player's
// true rate. Trajectories are planar parabolas from the release point
// through the implied rim crossing, sampled at a fixed rate with Gaussian
// position noise.

#include <shotrb/records.hpp>
#include <shotrb/shotprob.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace shotrb {

struct CountRange {
    std::size_t min = 0;
    std::size_t max = 0;
};

/// Concave log-odds bowl over the factors; `coefficients()` expands it into
/// the 10-term feature basis.
struct OutcomeBowl {
    double peak_prob = 0.8;
    double depth_center = 11.0;
    double angle_center = 45.0;
    double depth_width = 7.0;   // inches
    double lr_width = 5.0;      // inches
    double angle_width = 12.0;  // degrees

    ProbModel::Vec coefficients() const;
};

struct SimConfig {
    std::size_t n_players = 260;
    std::size_t n_games = 82;
    // Attempts per player and season, indexed by ShotClass.
    std::array<CountRange, 3> shots{CountRange{100, 300}, CountRange{50, 150}, CountRange{100, 300}};
    std::array<BetaPrior, 3> skill{BetaPrior{3.5, 6.5}, BetaPrior{15.0, 5.0}, BetaPrior{9.6, 10.4}};
    OutcomeBowl bowl;
    // Factor standard deviations at unit spread; skill scales depth and
    // left-right, the angle spread is fixed.
    double depth_sd = 3.0;
    double lr_sd = 2.0;
    double angle_sd = 3.0;
    double xy_noise = 0.15;
    double z_noise = 0.4;
    double sample_rate = 25.0;
    double release_height = 7.0;
    double hoop_height = 10.0;
    double rim_radius = 0.75;
    Vec2 hoop_xy = Vec2(5.25, 25.0);
    // Release distance from the hoop, feet.
    double three_min = 22.5, three_max = 26.0;
    double two_min = 8.0, two_max = 20.0;
    double free_throw = 13.75;
    // Deterministic make rule (ball fits through the rim) instead of the
    // logistic generator.
    bool geometric_outcomes = false;
    double ball_radius = 0.39;
    std::uint64_t seed = 1;

    void validate() const;
};

struct PlayerTruth {
    std::string player_id;
    std::array<double, 3> theta{};   // true make rate per class
    std::array<double, 3> spread{};  // depth/left-right spread multiplier per class
};

struct ShotTruth {
    std::string shot_id;
    ShotFactors factors;
    double p = 0.0;
};

struct SimulatedSeason {
    std::vector<PlayerTruth> players;
    std::vector<ShotRecord> shots;
    std::vector<ShotTruth> truth;  // parallel to `shots`
};

/// 64-bit mixing used to derive independent per-entity RNG streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Mean make probability of a player whose factors have the given
/// depth/left-right spread multiplier, computed with common random numbers
/// so it is exactly monotone in the spread.
class SkillCalibration {
public:
    explicit SkillCalibration(const SimConfig& cfg);

    double mean_prob(double spread) const;
    /// Spread whose mean make probability is theta (clamped to the attainable range).
    double spread_for(double theta) const;
    double max_theta() const { return table_.front(); }
    double min_theta() const { return table_.back(); }

private:
    std::vector<double> log_spread_;
    std::vector<double> table_;
    std::vector<std::array<double, 3>> normals_;
    ProbModel::Vec coef_;
    double depth_sd_, lr_sd_, angle_sd_;
    OutcomeBowl bowl_;
    double eval(double spread) const;
};

std::vector<PlayerTruth> gen_league(const SimConfig& cfg);

/// True factors and probability for one shot of a player of the given spread.
ShotTruth gen_shot_truth(const SimConfig& cfg, double spread, std::mt19937_64& rng);

/// Rim-plane crossing point implied by a shot's depth and left-right factors.
Vec2 crossing_point(const ShotContext& ctx, double depth_in, double left_right_in);

/// Noise-free trajectory when cfg noise is zero. Throws InfeasibleFactors
/// when the entry angle is outside (0, 90) degrees.
std::vector<TrackingSample> gen_trajectory(const ShotContext& ctx, const ShotFactors& truth,
                                           const SimConfig& cfg, std::mt19937_64& rng);

SimulatedSeason gen_dataset(const SimConfig& cfg);

}  // namespace shotrb
