#pragma once

// Pipeline configuration. The on-disk format is one `key = value` per line,
// '#' starts a comment. Keys are dotted, the part before the first dot is
// the section used for stage cache keys.

#include <shotrb/evaluation.hpp>
#include <shotrb/simulator.hpp>
#include <shotrb/trajgeom.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace shotrb {

struct InputPaths {
    // Empty shots/tracking paths mean "simulate a season into the output directory".
    std::filesystem::path shots;
    std::filesystem::path tracking;
    // Optional separate training season; empty means train on the predicted season.
    std::filesystem::path train_shots;
    std::filesystem::path train_tracking;
};

struct FilterCfg {
    double min_arc_length = 0.0;   // feet of horizontal travel between first and last sample
    std::size_t min_samples = 0;   // samples per shot
};

struct ModelCfg {
    TrainCfg train;
    std::size_t cv_folds = 10;
};

struct EstimateCfg {
    int half = 1;  // 0 = whole season, 1 or 2 = that half
    double ci_level = 0.9;
};

struct EvalCfg {
    std::size_t min_attempts = 10;
    std::vector<double> fractions{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    std::size_t rmse_seeds = 20;
    std::size_t sd_repeats = 10;
    double sd_cov_scale = 1.0;
    ShotClass sd_class = ShotClass::ThreePoint;
};

struct PipelineConfig {
    std::uint64_t seed = 1;
    std::filesystem::path out = "shotrb_out";
    InputPaths input;
    SimConfig sim;
    bool sim_train_season = true;
    MeasureCfg traj;
    FilterCfg filter;
    ModelCfg model;
    ShrinkCfg shrink = default_shrink();
    EstimateCfg estimate;
    EvalCfg eval;

    static ShrinkCfg default_shrink();

    /// Apply one `key = value` assignment. Throws ConfigError for unknown
    /// keys or unparsable values.
    void set(std::string_view key, std::string_view value);
    /// Parse a whole config file body; later assignments win.
    void apply_text(std::string_view text, std::string_view source = "config");
    /// Every key with its current value, in a fixed order.
    std::string to_text() const;
    /// Only keys of the given section (e.g. "traj"), same format as to_text().
    std::string section_text(std::string_view section) const;
    /// Throws ConfigError for inconsistent values; checks input paths exist.
    void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace shotrb
