#include <shotrb/simulator.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace shotrb {

namespace {

constexpr double kGravity = 32.174;  // ft/s^2
constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kCalibrationSeed = 0x5eedca1bULL;
constexpr std::size_t kCalibrationDraws = 50000;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double draw_beta(const BetaPrior& prior, std::mt19937_64& rng) {
    std::gamma_distribution<double> ga(prior.alpha0, 1.0), gb(prior.beta0, 1.0);
    const double a = ga(rng), b = gb(rng);
    return a / (a + b);
}

std::string padded(char prefix, std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, value);
    return buf;
}

double release_distance(const SimConfig& cfg, ShotClass c, std::mt19937_64& rng) {
    switch (c) {
        case ShotClass::ThreePoint:
            return std::uniform_real_distribution<double>(cfg.three_min, cfg.three_max)(rng);
        case ShotClass::TwoPoint:
            return std::uniform_real_distribution<double>(cfg.two_min, cfg.two_max)(rng);
        case ShotClass::FreeThrow: return cfg.free_throw;
    }
    return cfg.free_throw;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

ProbModel::Vec OutcomeBowl::coefficients() const {
    const double eta0 = std::log(peak_prob / (1.0 - peak_prob));
    const double id = 1.0 / (depth_width * depth_width);
    const double il = 1.0 / (lr_width * lr_width);
    const double ia = 1.0 / (angle_width * angle_width);
    ProbModel::Vec w = ProbModel::Vec::Zero();
    w[0] = eta0 - 0.5 * (depth_center * depth_center * id + angle_center * angle_center * ia);
    w[1] = depth_center * id;
    w[3] = angle_center * ia;
    w[4] = -0.5 * id;
    w[5] = -0.5 * il;
    w[6] = -0.5 * ia;
    return w;
}

void SimConfig::validate() const {
    if (!(xy_noise >= 0.0 && z_noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise must be >= 0");
    if (!(sample_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
    for (const auto& p : skill)
        if (!(p.alpha0 > 0.0 && p.beta0 > 0.0))
            throw Error(ErrorCode::InvalidArgument, "skill prior shapes must be positive");
    for (const auto& r : shots)
        if (r.min > r.max) throw Error(ErrorCode::InvalidArgument, "shot count range min > max");
    if (n_games < 2) throw Error(ErrorCode::InvalidArgument, "need at least two games");
    if (!(bowl.peak_prob > 0.0 && bowl.peak_prob < 1.0))
        throw Error(ErrorCode::InvalidArgument, "peak probability must be in (0,1)");
}

SkillCalibration::SkillCalibration(const SimConfig& cfg)
    : coef_(cfg.bowl.coefficients()),
      depth_sd_(cfg.depth_sd),
      lr_sd_(cfg.lr_sd),
      angle_sd_(cfg.angle_sd),
      bowl_(cfg.bowl) {
    std::mt19937_64 rng(kCalibrationSeed);
    std::normal_distribution<double> normal;
    normals_.resize(kCalibrationDraws);
    for (auto& n : normals_) n = {normal(rng), normal(rng), normal(rng)};

    constexpr int kGrid = 241;
    const double lo = std::log(0.01), hi = std::log(30.0);
    for (int i = 0; i < kGrid; ++i) {
        const double ls = lo + (hi - lo) * i / (kGrid - 1);
        log_spread_.push_back(ls);
        table_.push_back(eval(std::exp(ls)));
    }
}

double SkillCalibration::eval(double spread) const {
    double sum = 0.0;
    for (const auto& n : normals_) {
        const double d = bowl_.depth_center + spread * depth_sd_ * n[0];
        const double lr = spread * lr_sd_ * n[1];
        const double a = bowl_.angle_center + angle_sd_ * n[2];
        const auto f = expand_factors(d, lr, a);
        double eta = 0.0;
        for (std::size_t j = 0; j < kNumFeatures; ++j) eta += coef_[static_cast<Eigen::Index>(j)] * f[j];
        sum += sigmoid(eta);
    }
    return sum / static_cast<double>(normals_.size());
}

double SkillCalibration::mean_prob(double spread) const {
    const double ls = std::log(spread);
    if (ls <= log_spread_.front()) return table_.front();
    if (ls >= log_spread_.back()) return table_.back();
    const auto it = std::upper_bound(log_spread_.begin(), log_spread_.end(), ls);
    const auto i = static_cast<std::size_t>(it - log_spread_.begin()) - 1;
    const double w = (ls - log_spread_[i]) / (log_spread_[i + 1] - log_spread_[i]);
    return table_[i] + w * (table_[i + 1] - table_[i]);
}

double SkillCalibration::spread_for(double theta) const {
    if (theta >= table_.front()) return std::exp(log_spread_.front());
    if (theta <= table_.back()) return std::exp(log_spread_.back());
    // table_ is non-increasing in spread.
    std::size_t i = 0;
    while (i + 1 < table_.size() && table_[i + 1] >= theta) ++i;
    const double den = table_[i] - table_[i + 1];
    const double w = den > 0.0 ? (table_[i] - theta) / den : 0.0;
    return std::exp(log_spread_[i] + w * (log_spread_[i + 1] - log_spread_[i]));
}

std::vector<PlayerTruth> gen_league(const SimConfig& cfg) {
    cfg.validate();
    const SkillCalibration calib(cfg);
    std::vector<PlayerTruth> players(cfg.n_players);
    for (std::size_t i = 0; i < cfg.n_players; ++i) {
        std::mt19937_64 rng(mix_seed(cfg.seed, i));
        auto& p = players[i];
        p.player_id = padded('P', i + 1, 4);
        for (const auto c : kShotClasses) {
            const double drawn = draw_beta(cfg.skill[index_of(c)], rng);
            const double k = calib.spread_for(drawn);
            p.spread[index_of(c)] = k;
            p.theta[index_of(c)] = calib.mean_prob(k);
        }
    }
    return players;
}

ShotTruth gen_shot_truth(const SimConfig& cfg, double spread, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    ShotTruth t;
    t.factors.valid = true;
    t.factors.depth = cfg.bowl.depth_center + spread * cfg.depth_sd * normal(rng);
    t.factors.left_right = spread * cfg.lr_sd * normal(rng);
    do {
        t.factors.entry_angle = cfg.bowl.angle_center + cfg.angle_sd * normal(rng);
    } while (!(t.factors.entry_angle > 10.0 && t.factors.entry_angle < 80.0));
    t.p = predict_make_prob(ProbModel::from_raw(cfg.bowl.coefficients()), t.factors);
    return t;
}

Vec2 crossing_point(const ShotContext& ctx, double depth_in, double left_right_in) {
    const Vec2 u = ctx.shooter_axis();
    const Vec2 right(u.y(), -u.x());
    return ctx.hoop_xy + (depth_in / kInchesPerFoot - ctx.rim_radius) * u +
           (left_right_in / kInchesPerFoot) * right;
}

std::vector<TrackingSample> gen_trajectory(const ShotContext& ctx, const ShotFactors& truth,
                                           const SimConfig& cfg, std::mt19937_64& rng) {
    if (!(truth.entry_angle > 0.0 && truth.entry_angle < 90.0))
        throw Error(ErrorCode::InfeasibleFactors, "entry angle must be in (0, 90) degrees");
    const Vec2 cross = crossing_point(ctx, truth.depth, truth.left_right);
    const Vec2 delta = cross - ctx.release_xy;
    const double len = delta.norm();
    if (!(len > 0.0)) throw Error(ErrorCode::InfeasibleFactors, "crossing coincides with release point");
    const Vec2 dir = delta / len;

    // z(s) = h0 + b s - a s^2 with z(len) = hoop height and z'(len) = -tan(angle).
    const double slope = std::tan(truth.entry_angle * kPi / 180.0);
    const double curv = (ctx.hoop_height - cfg.release_height + len * slope) / (len * len);
    if (!(curv > 0.0)) throw Error(ErrorCode::InfeasibleFactors, "no downward-curving arc fits the factors");
    const double lin = 2.0 * curv * len - slope;
    const double vh = std::sqrt(kGravity / (2.0 * curv));
    const double flight = len / vh;

    std::normal_distribution<double> normal;
    std::vector<TrackingSample> out;
    const auto count = static_cast<std::size_t>(std::floor(flight * cfg.sample_rate + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / cfg.sample_rate;
        const double s = vh * t;
        const Vec2 xy = ctx.release_xy + s * dir;
        TrackingSample smp;
        smp.t = t;
        smp.x = xy.x();
        smp.y = xy.y();
        smp.z = cfg.release_height + lin * s - curv * s * s;
        if (cfg.xy_noise > 0.0) {
            smp.x += cfg.xy_noise * normal(rng);
            smp.y += cfg.xy_noise * normal(rng);
        }
        if (cfg.z_noise > 0.0) smp.z += cfg.z_noise * normal(rng);
        smp.z = std::max(smp.z, 0.0);
        out.push_back(smp);
    }
    return out;
}

SimulatedSeason gen_dataset(const SimConfig& cfg) {
    SimulatedSeason season;
    season.players = gen_league(cfg);
    const auto model = ProbModel::from_raw(cfg.bowl.coefficients());
    const std::size_t first_half_games = (cfg.n_games + 1) / 2;

    std::size_t shot_index = 0;
    for (std::size_t i = 0; i < season.players.size(); ++i) {
        const auto& player = season.players[i];
        std::mt19937_64 count_rng(mix_seed(cfg.seed ^ 0xc0ffeeULL, i));
        for (const auto c : kShotClasses) {
            const auto& range = cfg.shots[index_of(c)];
            const std::size_t n =
                std::uniform_int_distribution<std::size_t>(range.min, range.max)(count_rng);
            for (std::size_t k = 0; k < n; ++k, ++shot_index) {
                std::mt19937_64 rng(mix_seed(cfg.seed, (std::uint64_t{1} << 40) + shot_index));
                ShotRecord rec;
                rec.shot_id = std::to_string(shot_index + 1);
                rec.player_id = player.player_id;
                const auto game = std::uniform_int_distribution<std::size_t>(0, cfg.n_games - 1)(rng);
                rec.game_id = padded('G', game + 1, 3);
                rec.period_half = game < first_half_games ? 1 : 2;
                rec.shot_class = c;
                rec.points = point_value(c);
                rec.hoop_xy = cfg.hoop_xy;
                const double dist = release_distance(cfg, c, rng);
                const double phi = c == ShotClass::FreeThrow
                                       ? 0.0
                                       : std::uniform_real_distribution<double>(-75.0, 75.0)(rng) * kPi / 180.0;
                rec.release_xy = cfg.hoop_xy + dist * Vec2(std::cos(phi), std::sin(phi));

                ShotTruth truth = gen_shot_truth(cfg, player.spread[index_of(c)], rng);
                truth.shot_id = rec.shot_id;
                const ShotContext ctx{rec.release_xy, rec.hoop_xy, cfg.hoop_height, cfg.rim_radius};
                if (cfg.geometric_outcomes) {
                    const double opening =
                        cfg.rim_radius - cfg.ball_radius / std::sin(truth.factors.entry_angle * kPi / 180.0);
                    const Vec2 cross = crossing_point(ctx, truth.factors.depth, truth.factors.left_right);
                    rec.outcome = (cross - rec.hoop_xy).norm() <= opening ? 1 : 0;
                    truth.p = rec.outcome;
                } else {
                    truth.p = predict_make_prob(model, truth.factors);
                    rec.outcome = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < truth.p ? 1 : 0;
                }
                rec.samples = gen_trajectory(ctx, truth.factors, cfg, rng);
                season.shots.push_back(std::move(rec));
                season.truth.push_back(std::move(truth));
            }
        }
    }
    return season;
}

}  // namespace shotrb
