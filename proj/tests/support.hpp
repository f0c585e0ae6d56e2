#pragma once

#include <shotrb/simulator.hpp>
#include <shotrb/trajgeom.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace testing_support {

using namespace shotrb;

inline constexpr double kPi = 3.14159265358979323846;

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// A three-point attempt from the given bearing around the default hoop.
inline ShotContext three_point_context(double bearing_deg, double distance = 24.0) {
    const SimConfig cfg;
    const double phi = bearing_deg * kPi / 180.0;
    return {cfg.hoop_xy + distance * Vec2(std::cos(phi), std::sin(phi)), cfg.hoop_xy, cfg.hoop_height,
            cfg.rim_radius};
}

inline ShotFactors factors(double depth, double lr, double angle) {
    ShotFactors f;
    f.depth = depth;
    f.left_right = lr;
    f.entry_angle = angle;
    f.valid = true;
    return f;
}

inline std::vector<TrackingSample> trajectory(const ShotContext& ctx, const ShotFactors& f, double xy_noise,
                                              double z_noise, std::mt19937_64& rng) {
    SimConfig cfg;
    cfg.xy_noise = xy_noise;
    cfg.z_noise = z_noise;
    return gen_trajectory(ctx, f, cfg, rng);
}

}  // namespace testing_support
