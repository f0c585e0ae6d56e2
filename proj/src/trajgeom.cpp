#include <shotrb/trajgeom.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace shotrb {

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

// Design row [1, x, y, x^2, y^2, xy] at an offset from the fit origin.
Vec6 design_row(double x, double y) {
    Vec6 row;
    row << 1.0, x, y, x * x, y * y, x * y;
    return row;
}

struct Normal {
    Mat6 xtx = Mat6::Zero();
    Vec6 xtz = Vec6::Zero();
    double ztz = 0.0;
    double weight = 0.0;

    void add(const Vec6& row, double z, double w = 1.0) {
        xtx.noalias() += w * row * row.transpose();
        xtz += w * z * row;
        ztz += w * z * z;
        weight += w;
    }
};

struct Posterior {
    Vec6 mean;
    Mat6 precision;
    double shape;
    double scale;
};

// One conjugate normal/inverse-gamma update with the sufficient statistics
// of a (possibly weighted) batch of observations.
Posterior conjugate_update(const Posterior& prior, const Normal& data) {
    Posterior post;
    post.precision = prior.precision + data.xtx;
    const Vec6 rhs = prior.precision * prior.mean + data.xtz;
    post.mean = post.precision.ldlt().solve(rhs);
    post.shape = prior.shape + 0.5 * data.weight;
    const double quad = data.ztz + prior.mean.dot(prior.precision * prior.mean) -
                        post.mean.dot(post.precision * post.mean);
    post.scale = prior.scale + 0.5 * std::max(quad, 0.0);
    return post;
}

double residual_rmse(std::span<const TrackingSample> samples, const QuadraticFit& fit) {
    if (samples.empty()) return 0.0;
    double sq = 0.0;
    for (const auto& s : samples) {
        const double r = s.z - fit.height_at(Vec2(s.x, s.y));
        sq += r * r;
    }
    return std::sqrt(sq / static_cast<double>(samples.size()));
}

// Column-equilibrated condition number of a symmetric PSD matrix.
double scaled_condition(const Mat6& a) {
    Vec6 d = a.diagonal();
    for (int i = 0; i < 6; ++i) {
        if (!(d[i] > 0.0)) return std::numeric_limits<double>::infinity();
        d[i] = 1.0 / std::sqrt(d[i]);
    }
    const Mat6 scaled = d.asDiagonal() * a * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat6> eig(scaled, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

// Restriction of the fitted surface to a path: z(s) = c0 + c1 s + c2 s^2.
struct PathQuadratic {
    double c0, c1, c2;
};

PathQuadratic restrict_to_path(const Vec6& b, const Vec2& origin, const LinePath& path) {
    const Vec2 a = path.origin_xy - origin;
    const Vec2& d = path.direction_xy;
    PathQuadratic q;
    q.c0 = b[0] + b[1] * a.x() + b[2] * a.y() + b[3] * a.x() * a.x() + b[4] * a.y() * a.y() +
           b[5] * a.x() * a.y();
    q.c1 = b[1] * d.x() + b[2] * d.y() + 2.0 * b[3] * a.x() * d.x() + 2.0 * b[4] * a.y() * d.y() +
           b[5] * (a.x() * d.y() + a.y() * d.x());
    q.c2 = b[3] * d.x() * d.x() + b[4] * d.y() * d.y() + b[5] * d.x() * d.y();
    return q;
}

std::optional<RimCrossing> descending_root(const PathQuadratic& q, const LinePath& path,
                                           double height, double tol) {
    const double c0 = q.c0 - height;
    RimCrossing out;
    // Scale-aware test for a vanishing curvature term.
    const double mag = std::abs(q.c0) + std::abs(q.c1) + std::abs(q.c2);
    if (std::abs(q.c2) <= 1e-14 * mag) {
        if (!(q.c1 < -tol)) return std::nullopt;
        out.arclength = -c0 / q.c1;
        out.dz_ds = q.c1;
    } else {
        const double disc = q.c1 * q.c1 - 4.0 * q.c2 * c0;
        if (!(disc >= 0.0)) return std::nullopt;
        const double root = std::sqrt(disc);
        // The descending root is the one where 2 c2 s + c1 = -sqrt(disc).
        if (!(root > tol)) return std::nullopt;
        out.arclength = q.c1 <= 0.0 ? 2.0 * c0 / (-q.c1 + root) : (-q.c1 - root) / (2.0 * q.c2);
        out.dz_ds = -root;
    }
    out.xy = path.at(out.arclength);
    return out;
}

}  // namespace

Vec2 ShotContext::shooter_axis() const {
    const Vec2 d = hoop_xy - release_xy;
    const double n = d.norm();
    if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "release position equals hoop position");
    return d / n;
}

void ShotContext::validate() const {
    if (!(rim_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "rim_radius must be positive");
    if (!release_xy.allFinite() || !hoop_xy.allFinite())
        throw Error(ErrorCode::InvalidArgument, "non-finite shot context");
    if ((hoop_xy - release_xy).norm() == 0.0)
        throw Error(ErrorCode::InvalidArgument, "release position equals hoop position");
}

double QuadraticFit::height_at(const Vec2& xy) const {
    const Vec2 q = xy - origin;
    return beta.dot(design_row(q.x(), q.y()));
}

Vec6 QuadraticFit::court_beta() const {
    const double ox = origin.x(), oy = origin.y();
    const Vec6& b = beta;
    Vec6 c;
    c[0] = b[0] - b[1] * ox - b[2] * oy + b[3] * ox * ox + b[4] * oy * oy + b[5] * ox * oy;
    c[1] = b[1] - 2.0 * b[3] * ox - b[5] * oy;
    c[2] = b[2] - 2.0 * b[4] * oy - b[5] * ox;
    c[3] = b[3];
    c[4] = b[4];
    c[5] = b[5];
    return c;
}

double QuadraticFit::noise_variance() const {
    return noise_shape > 0.0 ? noise_scale / noise_shape : 0.0;
}

ShotFactors invalid_factors(int outcome) {
    ShotFactors f;
    f.valid = false;
    f.fill_prob = outcome != 0 ? 1.0 : 0.0;
    return f;
}

QuadraticFit fit_quadratic_ols(std::span<const TrackingSample> samples, double max_condition) {
    const std::size_t n = samples.size();
    if (n < 6) throw Error(ErrorCode::RankDeficient, "need at least 6 samples, got " + std::to_string(n));

    Vec2 origin = Vec2::Zero();
    for (const auto& s : samples) origin += Vec2(s.x, s.y);
    origin /= static_cast<double>(n);

    Eigen::Matrix<double, Eigen::Dynamic, 6> x(n, 6);
    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.row(static_cast<Eigen::Index>(i)) =
            design_row(samples[i].x - origin.x(), samples[i].y - origin.y()).transpose();
        z[static_cast<Eigen::Index>(i)] = samples[i].z;
    }
    const Mat6 xtx = x.transpose() * x;
    const double cond = scaled_condition(xtx);
    if (!(cond <= max_condition))
        throw Error(ErrorCode::RankDeficient, "normal matrix condition " + std::to_string(cond));

    QuadraticFit fit;
    fit.origin = origin;
    fit.beta = x.colPivHouseholderQr().solve(z);
    fit.precision = xtx;
    fit.n_samples = n;
    fit.residual_rmse = residual_rmse(samples, fit);
    const double rss = fit.residual_rmse * fit.residual_rmse * static_cast<double>(n);
    fit.noise_shape = 0.5 * static_cast<double>(n - 6);
    fit.noise_scale = 0.5 * rss;
    return fit;
}

namespace {

// Maps coefficients in the shot frame (hoop origin, first axis along the
// shooter axis) to the hoop frame, so the prior does not depend on which way
// the court is drawn.
Mat6 shot_to_hoop_frame(const Vec2& u) {
    const Vec2 n(-u.y(), u.x());
    Mat6 t = Mat6::Zero();
    t(0, 0) = 1.0;
    t(1, 1) = u.x();
    t(2, 1) = u.y();
    t(1, 2) = n.x();
    t(2, 2) = n.y();
    t(3, 3) = u.x() * u.x();
    t(4, 3) = u.y() * u.y();
    t(5, 3) = 2.0 * u.x() * u.y();
    t(3, 4) = n.x() * n.x();
    t(4, 4) = n.y() * n.y();
    t(5, 4) = 2.0 * n.x() * n.y();
    t(3, 5) = u.x() * n.x();
    t(4, 5) = u.y() * n.y();
    t(5, 5) = u.x() * n.y() + u.y() * n.x();
    return t;
}

}  // namespace

QuadraticFit fit_quadratic_bayes(std::span<const TrackingSample> samples, const ShotContext& ctx,
                                 const BayesCfg& cfg) {
    ctx.validate();
    if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no tracking samples");
    if (!(cfg.pseudo_weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative pseudo weight");

    const Vec2 origin = ctx.hoop_xy;
    const Mat6 to_hoop = shot_to_hoop_frame(ctx.shooter_axis());
    const Mat6 from_hoop = to_hoop.inverse();
    Posterior post{to_hoop * cfg.prior_mean, from_hoop.transpose() * cfg.prior_precision * from_hoop,
                   cfg.noise_shape0, cfg.noise_scale0};

    // First update: two pseudo-points at release height, two at the rim center.
    Normal pseudo;
    const Vec2 rel = ctx.release_xy - origin;
    for (int k = 0; k < 2; ++k) {
        pseudo.add(design_row(rel.x(), rel.y()), cfg.release_height, cfg.pseudo_weight);
        pseudo.add(design_row(0.0, 0.0), ctx.hoop_height, cfg.pseudo_weight);
    }
    post = conjugate_update(post, pseudo);

    // Second update: the tracking samples.
    Normal data;
    for (const auto& s : samples) data.add(design_row(s.x - origin.x(), s.y - origin.y()), s.z);
    post = conjugate_update(post, data);

    QuadraticFit fit;
    fit.origin = origin;
    fit.beta = post.mean;
    fit.precision = post.precision;
    fit.n_samples = samples.size();
    fit.noise_shape = post.shape;
    fit.noise_scale = post.scale;
    fit.residual_rmse = residual_rmse(samples, fit);
    return fit;
}

LinePath fit_horizontal_path(std::span<const TrackingSample> samples, const ShotContext& ctx) {
    if (samples.empty()) throw Error(ErrorCode::DegeneratePath, "no samples");

    std::vector<TrackingSample> sorted(samples.begin(), samples.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    const double n = static_cast<double>(sorted.size());

    double tm = 0.0;
    Vec2 pm = Vec2::Zero();
    for (const auto& s : sorted) {
        tm += s.t;
        pm += Vec2(s.x, s.y);
    }
    tm /= n;
    pm /= n;

    double stt = 0.0;
    Vec2 stp = Vec2::Zero();
    bool moved = false;
    for (const auto& s : sorted) {
        const double dt = s.t - tm;
        stt += dt * dt;
        stp += dt * (Vec2(s.x, s.y) - pm);
        moved = moved || s.x != sorted.front().x || s.y != sorted.front().y;
    }

    LinePath path;
    path.t_begin = sorted.front().t;
    path.t_end = sorted.back().t;

    const Vec2 velocity = stt > 0.0 ? Vec2(stp / stt) : Vec2::Zero();
    const double speed = velocity.norm();
    if (!moved || !(speed > 0.0)) {
        // No horizontal motion in the data: fall back to the release->hoop axis.
        const Vec2 d = ctx.hoop_xy - ctx.release_xy;
        if (!(d.norm() > 0.0))
            throw Error(ErrorCode::DegeneratePath, "stationary samples and release == hoop");
        path.direction_xy = d.normalized();
        path.origin_xy = ctx.release_xy;
        path.speed = d.norm() / std::max(path.t_end, 1.0 / 25.0);
        return path;
    }

    Vec2 dir = velocity / speed;
    const Vec2 axis = ctx.hoop_xy - ctx.release_xy;
    if (axis.norm() > 0.0) {
        if (dir.dot(axis) < 0.0) dir = -dir;
    } else if (velocity.dot(dir) < 0.0) {
        dir = -dir;
    }
    path.direction_xy = dir;
    path.speed = speed;
    path.origin_xy = pm + (ctx.release_xy - pm).dot(dir) * dir;
    return path;
}

RimCrossing rim_crossing(const QuadraticFit& fit, const LinePath& path, const ShotContext& ctx,
                         double tangency_tol) {
    const auto q = restrict_to_path(fit.beta, fit.origin, path);
    auto hit = descending_root(q, path, ctx.hoop_height, tangency_tol);
    if (!hit) throw Error(ErrorCode::NoDescendingCrossing, "surface never descends through rim height");
    return *hit;
}

ShotFactors compute_shot_factors(const Vec2& crossing_xy, double dz_ds, const ShotContext& ctx) {
    if (!(dz_ds < 0.0)) throw Error(ErrorCode::InvalidArgument, "dz_ds must be negative");
    const Vec2 u = ctx.shooter_axis();
    const Vec2 right(u.y(), -u.x());
    const Vec2 off = crossing_xy - ctx.hoop_xy;

    ShotFactors f;
    f.depth = kInchesPerFoot * (ctx.rim_radius + off.dot(u));
    f.left_right = kInchesPerFoot * off.dot(right);
    f.entry_angle = std::atan(-dz_ds) * kRadToDeg;
    f.valid = true;
    return f;
}

std::string_view to_string(InvalidReason reason) noexcept {
    switch (reason) {
        case InvalidReason::None: return "none";
        case InvalidReason::TooFewSamples: return "too_few_samples";
        case InvalidReason::PoorFit: return "poor_fit";
        case InvalidReason::NoCrossing: return "no_crossing";
        case InvalidReason::FitFailed: return "fit_failed";
        case InvalidReason::Excluded: return "excluded";
    }
    return "unknown";
}

ValidityDecision validate_trajectory(std::span<const TrackingSample> samples,
                                     const QuadraticFit& fit, bool crossing_found,
                                     const ValidityCfg& cfg) {
    if (samples.size() < cfg.min_samples) return {false, InvalidReason::TooFewSamples};
    if (!(fit.residual_rmse <= cfg.max_rmse)) return {false, InvalidReason::PoorFit};
    if (!crossing_found) return {false, InvalidReason::NoCrossing};
    return {true, InvalidReason::None};
}

ShotMeasurement measure_shot(std::span<const TrackingSample> samples, const ShotContext& ctx,
                             int outcome, const MeasureCfg& cfg) {
    ShotMeasurement m;
    m.factors = invalid_factors(outcome);
    if (samples.size() < cfg.validity.min_samples) {
        m.reason = InvalidReason::TooFewSamples;
        return m;
    }
    try {
        m.fit = cfg.method == FitMethod::Bayes ? fit_quadratic_bayes(samples, ctx, cfg.bayes)
                                               : fit_quadratic_ols(samples, cfg.max_condition);
        m.path = fit_horizontal_path(samples, ctx);
    } catch (const Error&) {
        m.reason = InvalidReason::FitFailed;
        return m;
    }

    const auto q = restrict_to_path(m.fit->beta, m.fit->origin, *m.path);
    const auto hit = descending_root(q, *m.path, ctx.hoop_height, cfg.validity.tangency_tol);
    const auto decision = validate_trajectory(samples, *m.fit, hit.has_value(), cfg.validity);
    if (!decision.valid) {
        m.reason = decision.reason;
        return m;
    }
    m.factors = compute_shot_factors(hit->xy, hit->dz_ds, ctx);
    return m;
}

std::optional<ShotFactors> factors_for_beta(const QuadraticFit& fit, const Vec6& beta,
                                            const LinePath& path, const ShotContext& ctx,
                                            double tangency_tol) {
    const auto q = restrict_to_path(beta, fit.origin, path);
    const auto hit = descending_root(q, path, ctx.hoop_height, tangency_tol);
    if (!hit) return std::nullopt;
    return compute_shot_factors(hit->xy, hit->dz_ds, ctx);
}

}  // namespace shotrb
