#pragma once

// Flat-file schemas. Every CSV starts with a "# format_version: N" line;
// readers skip lines starting with '#'.

#include <shotrb/evaluation.hpp>
#include <shotrb/records.hpp>
#include <shotrb/shotprob.hpp>
#include <shotrb/simulator.hpp>

#include <json.hpp>

#include <cstdint>
#include <initializer_list>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace shotrb {

namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

/// Shortest decimal that round-trips to the same double ("nan"/"inf" for non-finite).
std::string format_double(double v);
/// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

/// Hex SHA-256 of a byte string or a file's contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

std::string read_file(const fs::path& path);
/// Writes via a temporary file and rename, creating parent directories.
void write_file(const fs::path& path, std::string_view content);

/// Minimal CSV table: header names plus string cells. No quoting support;
/// none of the schemas carry commas inside fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row

    /// Index of a required column; throws SchemaError naming it.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, std::string_view source);
CsvTable read_csv(const fs::path& path);

class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<std::string_view> header);
    explicit CsvWriter(const std::vector<std::string>& header);
    CsvWriter& cell(std::string_view s);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    void end_row();
    const std::string& str() const { return out_; }

private:
    std::string out_;
    bool row_start_ = true;
};

// Shots and tracking.
std::string shots_csv(const std::vector<ShotRecord>& shots);
/// Tracking coordinates and times are written to 1e-4 (feet, seconds).
std::string tracking_csv(const std::vector<ShotRecord>& shots);
std::vector<ShotRecord> parse_shots(const CsvTable& table);

struct IngestReport {
    std::vector<ShotRecord> shots;  // in shots-file order, samples sorted as given
    std::size_t tracking_rows = 0;
};

/// Join tracking samples onto shot metadata. Throws SchemaError,
/// OrphanSamples and NonMonotoneTime (naming the shot).
IngestReport ingest_tracking(const fs::path& shots_path, const fs::path& tracking_path);
IngestReport ingest_tracking_text(std::string_view shots_text, std::string_view tracking_text);

// Simulator ground truth.
std::string ground_truth_csv(const SimulatedSeason& season);
std::string players_csv(const SimulatedSeason& season);

// Factors.
struct FactorRow {
    std::string shot_id;
    ShotFactors factors;
    InvalidReason reason = InvalidReason::None;
};
std::string factors_csv(const std::vector<FactorRow>& rows);
std::vector<FactorRow> read_factors(const fs::path& path);

/// Fit posteriors and paths, kept so the resampling experiment does not
/// refit. Shots without a usable fit are omitted.
struct FitRow {
    std::string shot_id;
    QuadraticFit fit;
    LinePath path;
};
std::string fits_csv(const std::vector<FitRow>& rows);
std::vector<FitRow> read_fits(const fs::path& path);

// Probabilities.
struct ProbRow {
    std::string shot_id;
    double p_make = 0.0;
    bool filled = false;
};
std::string probabilities_csv(const std::vector<ProbRow>& rows);
std::vector<ProbRow> read_probabilities(const fs::path& path);

// Models.
nlohmann::json model_to_json(const ProbModel& m, ShotClass c);
ProbModel model_from_json(const nlohmann::json& j);

// Estimates.
struct EstimateRow {
    std::string player_id;
    ShotClass shot_class = ShotClass::ThreePoint;
    ClassEstimate est;
};
std::string estimates_csv(const std::vector<EstimateRow>& rows);
nlohmann::json estimates_json(const std::vector<EstimateRow>& rows);
std::vector<EstimateRow> read_estimates(const fs::path& path);

/// Pretty JSON with a trailing newline; NaN becomes null.
std::string dump_json(const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

}  // namespace shotrb
