#include <shotrb/shotprob.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace shotrb {

namespace {

using Vec = ProbModel::Vec;
using Mat = ProbModel::Mat;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kNumFeatures), Eigen::RowMajor>;

// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double log_likelihood(const RowMat& z, const Eigen::VectorXd& y, const Vec& w) {
    const Eigen::VectorXd eta = z * w;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
    return ll;
}

void check_scores_input(std::span<const double> preds, std::span<const int> outcomes) {
    if (preds.size() != outcomes.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                                   std::to_string(outcomes.size()) + " outcomes");
    if (preds.empty()) throw Error(ErrorCode::InvalidArgument, "no predictions to score");
    for (double p : preds)
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "prediction outside [0,1]");
}

}  // namespace

FeatureVector expand_factors(double d, double lr, double a) {
    return {1.0, d, lr, a, d * d, lr * lr, a * a, d * lr, d * a, lr * a};
}

FeatureVector build_features(const ShotFactors& f) {
    if (!f.valid) throw Error(ErrorCode::InvalidFactors, "shot factors are not valid");
    return expand_factors(f.depth, f.left_right, f.entry_angle);
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

FeatureVector ProbModel::standardize(const FeatureVector& raw) const {
    FeatureVector out;
    out[0] = 1.0;
    for (std::size_t j = 1; j < kNumFeatures; ++j)
        out[j] = (raw[j] - feature_mean[j - 1]) / feature_scale[j - 1];
    return out;
}

namespace {

Mat standardization_map(const ProbModel& m) {
    Mat a = Mat::Zero();
    a(0, 0) = 1.0;
    for (std::size_t j = 1; j < kNumFeatures; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        a(0, jj) = -m.feature_mean[j - 1] / m.feature_scale[j - 1];
        a(jj, jj) = 1.0 / m.feature_scale[j - 1];
    }
    return a;
}

}  // namespace

Vec ProbModel::raw_coef() const { return standardization_map(*this) * coef; }

Mat ProbModel::raw_covariance() const {
    const Mat a = standardization_map(*this);
    return a * covariance * a.transpose();
}

ProbModel ProbModel::from_raw(const Vec& raw) {
    ProbModel m;
    m.coef = raw;
    m.feature_mean.fill(0.0);
    m.feature_scale.fill(1.0);
    m.converged = true;
    return m;
}

ProbModel train_logistic(std::span<const LabeledRow> rows, const TrainCfg& cfg) {
    const std::size_t n = rows.size();
    const auto makes = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.outcome != 0; });
    if (makes == 0 || static_cast<std::size_t>(makes) == n)
        throw Error(ErrorCode::OneClass, "training outcomes contain a single class");
    if (n < cfg.min_rows)
        throw Error(ErrorCode::InvalidArgument,
                    "need at least " + std::to_string(cfg.min_rows) + " rows, got " + std::to_string(n));

    ProbModel model;
    model.train_n = n;
    std::array<bool, kNumFeatures> active{};
    active[0] = true;
    for (std::size_t j = 1; j < kNumFeatures; ++j) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r.x[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& r : rows) var += (r.x[j] - mean) * (r.x[j] - mean);
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        // Constant columns keep a unit scale and a zero coefficient.
        active[j] = sd > 1e-12 * std::max(1.0, std::abs(mean));
        model.feature_mean[j - 1] = mean;
        model.feature_scale[j - 1] = active[j] ? sd : 1.0;
    }

    RowMat z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kNumFeatures));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = model.standardize(rows[i].x);
        for (std::size_t j = 0; j < kNumFeatures; ++j)
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = active[j] ? s[j] : 0.0;
        y[static_cast<Eigen::Index>(i)] = rows[i].outcome != 0 ? 1.0 : 0.0;
    }

    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        if (active[j]) idx.push_back(static_cast<Eigen::Index>(j));
    const auto k = static_cast<Eigen::Index>(idx.size());

    const double rate = static_cast<double>(makes) / static_cast<double>(n);
    Vec w = Vec::Zero();
    w[0] = std::log(rate / (1.0 - rate));
    double ll = log_likelihood(z, y, w);

    auto hessian = [&](const Vec& coef, Eigen::VectorXd& grad) {
        const Eigen::VectorXd eta = z * coef;
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
        grad = Eigen::VectorXd::Zero(k);
        Eigen::VectorXd row(k);
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double p = sigmoid(eta[i]);
            const double wt = p * (1.0 - p);
            for (Eigen::Index a = 0; a < k; ++a) row[a] = z(i, idx[static_cast<std::size_t>(a)]);
            grad += (y[i] - p) * row;
            h.selfadjointView<Eigen::Lower>().rankUpdate(row, wt);
        }
        return Eigen::MatrixXd(h.selfadjointView<Eigen::Lower>());
    };

    Eigen::VectorXd grad;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        model.iterations = it + 1;
        const Eigen::MatrixXd h = hessian(w, grad);
        const Eigen::VectorXd step_active = h.ldlt().solve(grad);
        Vec step = Vec::Zero();
        for (Eigen::Index a = 0; a < k; ++a) step[idx[static_cast<std::size_t>(a)]] = step_active[a];

        // Step-halving until the likelihood does not decrease.
        double t = 1.0;
        Vec next = w + step;
        double ll_next = log_likelihood(z, y, next);
        for (int halving = 0; halving < 40 && !(ll_next >= ll); ++halving) {
            t *= 0.5;
            next = w + t * step;
            ll_next = log_likelihood(z, y, next);
        }
        if (!(ll_next >= ll)) {
            // No ascent direction left at working precision.
            model.converged = true;
            break;
        }
        if (next.cwiseAbs().maxCoeff() > cfg.max_abs_coef)
            throw Error(ErrorCode::Separation, "coefficients diverge; data look separable");
        const double delta = ll_next - ll;
        w = next;
        ll = ll_next;
        if (std::abs(delta) < cfg.tolerance) {
            model.converged = true;
            break;
        }
    }

    model.coef = w;
    model.loglik = ll;
    const Eigen::MatrixXd h = hessian(w, grad);
    const Eigen::MatrixXd cov_active = h.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    model.covariance.setZero();
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            model.covariance(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]) =
                cov_active(a, b);
    return model;
}

double predict_make_prob(const ProbModel& m, const FeatureVector& raw) {
    if (!m.converged) throw Error(ErrorCode::InvalidArgument, "model has not converged");
    const auto s = m.standardize(raw);
    double eta = 0.0;
    for (std::size_t j = 0; j < kNumFeatures; ++j) eta += m.coef[static_cast<Eigen::Index>(j)] * s[j];
    return sigmoid(eta);
}

double predict_make_prob(const ProbModel& m, const ShotFactors& f) {
    return predict_make_prob(m, build_features(f));
}

double score_brier(std::span<const double> preds, std::span<const int> outcomes) {
    check_scores_input(preds, outcomes);
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double d = preds[i] - (outcomes[i] != 0 ? 1.0 : 0.0);
        sum += d * d;
    }
    return sum / static_cast<double>(preds.size());
}

double score_logloss(std::span<const double> preds, std::span<const int> outcomes) {
    check_scores_input(preds, outcomes);
    constexpr double kClip = 1e-15;
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double p = std::clamp(preds[i], kClip, 1.0 - kClip);
        sum -= outcomes[i] != 0 ? std::log(p) : std::log1p(-p);
    }
    return sum / static_cast<double>(preds.size());
}

double score_misclassification(std::span<const double> preds, std::span<const int> outcomes) {
    check_scores_input(preds, outcomes);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        wrong += static_cast<std::size_t>((preds[i] >= 0.5) != (outcomes[i] != 0));
    return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

ScoreReport score_all(std::span<const double> preds, std::span<const int> outcomes) {
    return {score_misclassification(preds, outcomes), score_brier(preds, outcomes),
            score_logloss(preds, outcomes)};
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || n < k) throw Error(ErrorCode::InvalidArgument, "need k >= 2 and at least k rows");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> fold(n);
    for (std::size_t i = 0; i < n; ++i) fold[perm[i]] = i * k / n;
    return fold;
}

double crossval_misclassification(std::span<const LabeledRow> rows, std::size_t k, std::uint64_t seed,
                                  const TrainCfg& cfg) {
    const auto fold = fold_assignment(rows.size(), k, seed);
    double total = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<LabeledRow> train;
        std::vector<double> preds;
        std::vector<int> outcomes;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (fold[i] != f) train.push_back(rows[i]);
        const auto model = train_logistic(train, cfg);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (fold[i] != f) continue;
            preds.push_back(predict_make_prob(model, rows[i].x));
            outcomes.push_back(rows[i].outcome);
        }
        total += score_misclassification(preds, outcomes);
    }
    return total / static_cast<double>(k);
}

bool GmzZone::contains(const ShotFactors& f) const {
    return f.valid && std::abs(f.entry_angle - angle_center) <= angle_halfwidth &&
           f.left_right >= lr_min && f.left_right <= lr_max && f.depth >= depth_min &&
           f.depth <= depth_max;
}

GmzResult gmz_make_rate(std::span<const std::pair<ShotFactors, int>> shots, const GmzZone& zone) {
    GmzResult r;
    std::size_t made = 0;
    for (const auto& [f, outcome] : shots) {
        if (!zone.contains(f)) continue;
        ++r.count;
        made += static_cast<std::size_t>(outcome != 0);
    }
    if (r.count == 0) throw Error(ErrorCode::EmptyZone, "no shots inside the zone");
    r.rate = static_cast<double>(made) / static_cast<double>(r.count);
    return r;
}

}  // namespace shotrb
