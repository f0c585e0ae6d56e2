#pragma once

#include <shotrb/estimators.hpp>
#include <shotrb/trajgeom.hpp>

#include <string>
#include <vector>

namespace shotrb {

/// One shot attempt: metadata joined with its tracking samples.
struct ShotRecord {
    std::string shot_id;
    std::string player_id;
    std::string game_id;
    int period_half = 1;  // 1 = first half of the season, 2 = second
    ShotClass shot_class = ShotClass::ThreePoint;
    Vec2 release_xy = Vec2::Zero();
    Vec2 hoop_xy = Vec2::Zero();
    int outcome = 0;
    int points = 3;  // point value of the attempt
    std::vector<TrackingSample> samples;

    ShotContext context(double hoop_height = 10.0, double rim_radius = 0.75) const {
        return {release_xy, hoop_xy, hoop_height, rim_radius};
    }
};

}  // namespace shotrb
