#pragma once

// Per-shot trajectory geometry: quadratic height surfaces fitted to ball
// tracking samples, and the rim-plane shot factors derived from them.
//
// Units are feet, seconds and radians internally. Shot factors are reported
// in inches and degrees.

#include <shotrb/error.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace shotrb {

using Vec2 = Eigen::Vector2d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kInchesPerFoot = 12.0;

struct TrackingSample {
    double t = 0.0;  // seconds since release
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;  // height
};

struct ShotContext {
    Vec2 release_xy = Vec2::Zero();
    Vec2 hoop_xy = Vec2::Zero();
    double hoop_height = 10.0;
    double rim_radius = 0.75;

    /// Unit vector pointing from the release position to the rim center.
    Vec2 shooter_axis() const;
    /// Throws InvalidArgument when rim_radius <= 0 or release == hoop.
    void validate() const;
};

/// Height surface z = b0 + b1*x + b2*y + b3*x^2 + b4*y^2 + b5*x*y.
///
/// Coefficients are held relative to `origin` (x and y above are offsets
/// from it) so that the normal equations stay well scaled for court
/// coordinates. `court_beta()` re-expresses them in absolute coordinates.
/// `precision` is the (posterior) precision of `beta` in the same frame;
/// the noise variance posterior is inverse-gamma(noise_shape, noise_scale).
struct QuadraticFit {
    Vec6 beta = Vec6::Zero();
    Mat6 precision = Mat6::Identity();
    Vec2 origin = Vec2::Zero();
    double residual_rmse = 0.0;
    std::size_t n_samples = 0;
    double noise_shape = 0.0;
    double noise_scale = 0.0;

    double height_at(const Vec2& xy) const;
    Vec6 court_beta() const;
    /// Plug-in estimate noise_scale / noise_shape (0 when undefined).
    double noise_variance() const;
};

/// Conjugate-normal prior and pseudo-data settings for the Bayesian fit.
/// The prior is expressed in the shot frame: origin at the hoop, first axis
/// along the shooter axis, second axis to the shooter's left.
struct BayesCfg {
    Vec6 prior_mean = Vec6::Zero();
    Mat6 prior_precision = 1e-6 * Mat6::Identity();
    double pseudo_weight = 1.0;
    double release_height = 7.0;
    double noise_shape0 = 1e-3;
    double noise_scale0 = 1e-3;
};

/// Straight horizontal ball path, p(s) = origin_xy + s * direction_xy.
/// `origin_xy` is the projection of the release point onto the path, so s
/// is the horizontal distance travelled from release.
struct LinePath {
    Vec2 origin_xy = Vec2::Zero();
    Vec2 direction_xy = Vec2::UnitX();
    double speed = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;

    Vec2 at(double s) const { return origin_xy + s * direction_xy; }
};

struct RimCrossing {
    Vec2 xy = Vec2::Zero();
    double arclength = 0.0;
    double dz_ds = 0.0;
};

struct ShotFactors {
    double depth = 0.0;        // inches from the adjusted front of the rim
    double left_right = 0.0;   // inches, positive = shooter's right
    double entry_angle = 0.0;  // degrees
    bool valid = false;
    std::optional<double> fill_prob;  // 0 or 1, set when !valid
};

/// Factors for a shot whose trajectory could not be used: the outcome
/// itself stands in for the make probability.
ShotFactors invalid_factors(int outcome);

QuadraticFit fit_quadratic_ols(std::span<const TrackingSample> samples,
                               double max_condition = 1e12);

QuadraticFit fit_quadratic_bayes(std::span<const TrackingSample> samples,
                                 const ShotContext& ctx, const BayesCfg& cfg = {});

LinePath fit_horizontal_path(std::span<const TrackingSample> samples, const ShotContext& ctx);

RimCrossing rim_crossing(const QuadraticFit& fit, const LinePath& path, const ShotContext& ctx,
                         double tangency_tol = 1e-6);

ShotFactors compute_shot_factors(const Vec2& crossing_xy, double dz_ds, const ShotContext& ctx);

struct ValidityCfg {
    std::size_t min_samples = 8;
    double max_rmse = 1.5;  // feet
    double tangency_tol = 1e-6;
};

enum class InvalidReason { None, TooFewSamples, PoorFit, NoCrossing, FitFailed, Excluded };

std::string_view to_string(InvalidReason reason) noexcept;

struct ValidityDecision {
    bool valid = false;
    InvalidReason reason = InvalidReason::None;
};

ValidityDecision validate_trajectory(std::span<const TrackingSample> samples,
                                     const QuadraticFit& fit, bool crossing_found,
                                     const ValidityCfg& cfg = {});

enum class FitMethod { Ols, Bayes };

struct MeasureCfg {
    FitMethod method = FitMethod::Bayes;
    BayesCfg bayes;
    ValidityCfg validity;
    double max_condition = 1e12;
};

/// Everything trajgeom knows about one shot. `fit` and `path` are kept when
/// they could be computed, even for shots that end up invalid.
struct ShotMeasurement {
    std::optional<QuadraticFit> fit;
    std::optional<LinePath> path;
    ShotFactors factors;
    InvalidReason reason = InvalidReason::None;
};

/// Fit, locate the rim crossing and validate one shot. Never throws for
/// data-dependent failures; those become invalid factors carrying the outcome
/// as fill probability.
ShotMeasurement measure_shot(std::span<const TrackingSample> samples, const ShotContext& ctx,
                             int outcome, const MeasureCfg& cfg = {});

/// Factors implied by an arbitrary coefficient vector on an already fitted
/// path; used when resampling fit posteriors.
std::optional<ShotFactors> factors_for_beta(const QuadraticFit& fit, const Vec6& beta,
                                            const LinePath& path, const ShotContext& ctx,
                                            double tangency_tol = 1e-6);

}  // namespace shotrb
