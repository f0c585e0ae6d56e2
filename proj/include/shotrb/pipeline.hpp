#pragma once

// Batch orchestration: simulate -> ingest -> fit-trajectories -> train-model
// -> estimate -> evaluate -> report, all reading and writing flat files in
// one artifact directory.

#include <shotrb/config.hpp>
#include <shotrb/io.hpp>

#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace shotrb {

/// An error tagged with the pipeline stage that raised it.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, ErrorCode code, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)), code_(code) {}
    const std::string& stage() const noexcept { return stage_; }
    ErrorCode code() const noexcept { return code_; }

private:
    std::string stage_;
    ErrorCode code_;
};

struct RunOptions {
    unsigned jobs = 1;
    bool use_cache = true;
    std::ostream* log = nullptr;  // progress lines, may be null
};

/// File locations inside an artifact directory.
struct ArtifactLayout {
    fs::path root;

    fs::path sim_shots() const { return root / "data" / "shots.csv"; }
    fs::path sim_tracking() const { return root / "data" / "tracking.csv"; }
    fs::path sim_truth() const { return root / "data" / "ground_truth.csv"; }
    fs::path sim_players() const { return root / "data" / "players.csv"; }
    fs::path sim_train_shots() const { return root / "train" / "shots.csv"; }
    fs::path sim_train_tracking() const { return root / "train" / "tracking.csv"; }
    fs::path sim_train_truth() const { return root / "train" / "ground_truth.csv"; }
    fs::path sim_train_players() const { return root / "train" / "players.csv"; }
    fs::path ingest() const { return root / "ingest.json"; }
    fs::path factors() const { return root / "factors.csv"; }
    fs::path train_factors() const { return root / "factors_train.csv"; }
    fs::path fits() const { return root / "fits.csv"; }
    fs::path fit_summary() const { return root / "fit_summary.json"; }
    fs::path model(ShotClass c) const { return root / "models" / ("model_" + std::string(to_string(c)) + ".json"); }
    fs::path model_scores() const { return root / "model_scores.json"; }
    fs::path probabilities() const { return root / "probabilities.csv"; }
    fs::path estimates_csv() const { return root / "estimates.csv"; }
    fs::path estimates_json() const { return root / "estimates.json"; }
    fs::path evaluation() const { return root / "evaluation.json"; }
    fs::path report_dir() const { return root / "report"; }
    fs::path config() const { return root / "config.txt"; }
    fs::path manifest() const { return root / "manifest.json"; }
    fs::path cache_dir() const { return root / "cache"; }
};

/// Resolved input files for the predicted and the training season.
struct DataPaths {
    fs::path shots, tracking, train_shots, train_tracking;
};
DataPaths resolve_inputs(const PipelineConfig& cfg);

/// Run `body(i)` for i in [0, n) on up to `jobs` threads. The first
/// exception by index is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body);

/// Trajectory measurement for a batch of shots, honouring exclusion filters.
struct FitOutput {
    std::vector<FactorRow> factors;  // one per shot, input order
    std::vector<FitRow> fits;        // shots whose fit and path were computed
    std::size_t excluded_min_samples = 0;
    std::size_t excluded_arc_length = 0;
};
FitOutput measure_shots(const std::vector<ShotRecord>& shots, const PipelineConfig& cfg, unsigned jobs);

/// Horizontal distance between the first and last tracking samples.
double horizontal_arc_length(std::span<const TrackingSample> samples);

/// Probability rows for every shot: model output for valid factors, the
/// 0/1 fill otherwise. Models are indexed by ShotClass.
std::vector<ProbRow> predict_probabilities(const std::vector<ShotRecord>& shots,
                                           const std::vector<FactorRow>& factors,
                                           const std::array<ProbModel, 3>& models);

/// Per (player, class) estimates over the configured half.
std::vector<EstimateRow> estimate_players(const std::vector<ShotRecord>& shots,
                                          const std::vector<ProbRow>& probs, const PipelineConfig& cfg);

// Stages. Each reads its inputs from and writes its outputs to cfg.out.
void stage_simulate(const PipelineConfig& cfg, const RunOptions& opts);
void stage_ingest(const PipelineConfig& cfg, const RunOptions& opts);
void stage_fit(const PipelineConfig& cfg, const RunOptions& opts);
void stage_train(const PipelineConfig& cfg, const RunOptions& opts);
void stage_estimate(const PipelineConfig& cfg, const RunOptions& opts);
void stage_evaluate(const PipelineConfig& cfg, const RunOptions& opts);

/// Summary text/JSON and per-figure CSVs from an artifact directory. Throws
/// MissingArtifact naming the stage whose output is absent.
void emit_report(const fs::path& artifact_dir);

/// manifest.json listing every artifact with its SHA-256, sorted by path.
void write_manifest(const fs::path& artifact_dir);

/// All stages in order, then the report and manifest. Returns cfg.out.
fs::path run_pipeline(const PipelineConfig& cfg, const RunOptions& opts = {});

}  // namespace shotrb
