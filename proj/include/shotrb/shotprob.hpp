#pragma once

// Logistic shot-make model over a full quadratic expansion of the three
// rim-plane factors, plus the scores used to judge it.

#include <shotrb/trajgeom.hpp>

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace shotrb {

inline constexpr std::size_t kNumFeatures = 10;

/// [1, D, LR, A, D^2, LR^2, A^2, D*LR, D*A, LR*A]
using FeatureVector = std::array<double, kNumFeatures>;

FeatureVector expand_factors(double depth, double left_right, double angle);

/// Throws InvalidFactors for invalid shots.
FeatureVector build_features(const ShotFactors& f);

struct LabeledRow {
    FeatureVector x;
    int outcome = 0;
};

struct TrainCfg {
    int max_iterations = 100;
    double tolerance = 1e-8;         // on the change in log-likelihood
    double max_abs_coef = 1e3;       // standardized scale; larger means separation
    std::size_t min_rows = 50;
};

struct ProbModel {
    using Vec = Eigen::Matrix<double, kNumFeatures, 1>;
    using Mat = Eigen::Matrix<double, kNumFeatures, kNumFeatures>;

    Vec coef = Vec::Zero();  // on standardized features; coef[0] is the intercept
    std::array<double, kNumFeatures - 1> feature_mean{};
    std::array<double, kNumFeatures - 1> feature_scale{};
    Mat covariance = Mat::Zero();  // inverse Fisher information, standardized scale
    std::size_t train_n = 0;
    bool converged = false;
    double loglik = 0.0;
    int iterations = 0;

    FeatureVector standardize(const FeatureVector& raw) const;
    /// Coefficients that act on raw (unstandardized) features.
    Vec raw_coef() const;
    Mat raw_covariance() const;
    /// A model that predicts with the given raw-scale coefficients.
    static ProbModel from_raw(const Vec& raw);
};

ProbModel train_logistic(std::span<const LabeledRow> rows, const TrainCfg& cfg = {});

double sigmoid(double x) noexcept;

double predict_make_prob(const ProbModel& m, const FeatureVector& raw);
double predict_make_prob(const ProbModel& m, const ShotFactors& f);

struct ScoreReport {
    double misclassification = 0.0;
    double brier = 0.0;
    double logloss = 0.0;
};

double score_brier(std::span<const double> preds, std::span<const int> outcomes);
double score_logloss(std::span<const double> preds, std::span<const int> outcomes);
/// Error rate of the rule "make iff p >= 0.5".
double score_misclassification(std::span<const double> preds, std::span<const int> outcomes);
ScoreReport score_all(std::span<const double> preds, std::span<const int> outcomes);

/// Seeded k-fold cross-validated misclassification rate at threshold 0.5.
/// Folds are contiguous blocks of a seeded permutation; the result is the
/// unweighted mean of the per-fold error rates.
double crossval_misclassification(std::span<const LabeledRow> rows, std::size_t k,
                                  std::uint64_t seed, const TrainCfg& cfg = {});

/// Fold index (0..k-1) for each row; exposed so callers can check determinism.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k, std::uint64_t seed);

struct GmzZone {
    double angle_center = 45.0;
    double angle_halfwidth = 2.0;
    double lr_min = -2.0;
    double lr_max = 2.0;
    double depth_min = 7.0;
    double depth_max = 14.0;

    bool contains(const ShotFactors& f) const;
};

struct GmzResult {
    double rate = 0.0;
    std::size_t count = 0;
};

/// Make fraction among valid shots inside the zone. Throws EmptyZone.
GmzResult gmz_make_rate(std::span<const std::pair<ShotFactors, int>> shots, const GmzZone& zone = {});

}  // namespace shotrb
