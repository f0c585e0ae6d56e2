#include <shotrb/io.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace shotrb {

using nlohmann::json;

namespace {

constexpr std::array<const char*, kNumFeatures> kFeatureNames = {
    "intercept", "depth", "left_right", "angle", "depth^2", "left_right^2", "angle^2",
    "depth*left_right", "depth*angle", "left_right*angle"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string version_line() { return "# format_version: " + std::to_string(kFormatVersion) + "\n"; }

// Cell accessor bound to a row, reporting the source line on bad values.
struct RowView {
    const CsvTable& table;
    std::size_t row;
    std::string_view source;

    const std::string& str(std::size_t col) const { return table.rows[row][col]; }
    std::string where(std::size_t col) const {
        return std::string(source) + " line " + std::to_string(table.line_numbers[row]) + " column " +
               table.header[col];
    }
    double num(std::size_t col) const { return parse_double(str(col), where(col)); }
    long long integer(std::size_t col) const { return parse_int(str(col), where(col)); }
};

void check_version(const json& j, std::string_view what) {
    if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
        throw Error(ErrorCode::SchemaError, std::string(what) + ": unsupported or missing format_version");
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string format_fixed(double v, int digits) {
    if (!std::isfinite(v)) return format_double(v);
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, digits);
    std::string out(buf.data(), res.ptr);
    if (out.find_first_not_of("-0.") == std::string::npos && out.front() == '-') out.erase(0, 1);  // no "-0.0000"
    return out;
}

double parse_double(std::string_view s, std::string_view what) {
    s = trim(s);
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != end)
        throw Error(ErrorCode::SchemaError, "not a number in " + std::string(what) + ": '" + std::string(s) + "'");
    return v;
}

long long parse_int(std::string_view s, std::string_view what) {
    s = trim(s);
    long long v = 0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != end)
        throw Error(ErrorCode::SchemaError, "not an integer in " + std::string(what) + ": '" + std::string(s) + "'");
    return v;
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::IoError, "SHA-256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::size_t CsvTable::column(std::string_view name) const {
    if (auto c = find_column(name)) return *c;
    throw Error(ErrorCode::SchemaError, "missing column '" + std::string(name) + "'");
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
    CsvTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_fields(line);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw Error(ErrorCode::SchemaError, std::string(source) + " line " + std::to_string(line_no) +
                                                    ": expected " + std::to_string(t.header.size()) +
                                                    " fields, got " + std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(line_no);
    }
    if (!have_header) throw Error(ErrorCode::SchemaError, std::string(source) + ": no header row");
    return t;
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_file(path), path.string()); }

CsvWriter::CsvWriter(std::initializer_list<std::string_view> header) {
    out_ = version_line();
    for (auto h : header) cell(h);
    end_row();
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) {
    out_ = version_line();
    for (const auto& h : header) cell(std::string_view(h));
    end_row();
}

CsvWriter& CsvWriter::cell(std::string_view s) {
    if (!row_start_) out_.push_back(',');
    out_.append(s);
    row_start_ = false;
    return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_double(v))); }
CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
    out_.push_back('\n');
    row_start_ = true;
}

std::string shots_csv(const std::vector<ShotRecord>& shots) {
    CsvWriter w{"shot_id", "player_id", "game_id", "period_half", "shot_class", "release_x", "release_y",
                "hoop_x",  "hoop_y",    "outcome", "points"};
    for (const auto& s : shots) {
        w.cell(s.shot_id).cell(s.player_id).cell(s.game_id).cell(s.period_half).cell(to_string(s.shot_class));
        w.cell(s.release_xy.x()).cell(s.release_xy.y()).cell(s.hoop_xy.x()).cell(s.hoop_xy.y());
        w.cell(s.outcome).cell(s.points);
        w.end_row();
    }
    return w.str();
}

std::string tracking_csv(const std::vector<ShotRecord>& shots) {
    CsvWriter w{"shot_id", "t", "x", "y", "z"};
    for (const auto& s : shots)
        for (const auto& p : s.samples) {
            w.cell(s.shot_id).cell(format_fixed(p.t, 4)).cell(format_fixed(p.x, 4));
            w.cell(format_fixed(p.y, 4)).cell(format_fixed(p.z, 4));
            w.end_row();
        }
    return w.str();
}

std::vector<ShotRecord> parse_shots(const CsvTable& t) {
    const std::string_view src = "shots";
    const auto c_id = t.column("shot_id"), c_player = t.column("player_id"), c_game = t.column("game_id"),
               c_half = t.column("period_half"), c_class = t.column("shot_class"),
               c_rx = t.column("release_x"), c_ry = t.column("release_y"), c_hx = t.column("hoop_x"),
               c_hy = t.column("hoop_y"), c_out = t.column("outcome"), c_pts = t.column("points");
    std::vector<ShotRecord> shots;
    shots.reserve(t.rows.size());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RowView v{t, r, src};
        ShotRecord s;
        s.shot_id = v.str(c_id);
        if (s.shot_id.empty()) throw Error(ErrorCode::SchemaError, v.where(c_id) + ": empty shot_id");
        if (!seen.insert(s.shot_id).second)
            throw Error(ErrorCode::SchemaError, "duplicate shot_id " + s.shot_id);
        s.player_id = v.str(c_player);
        s.game_id = v.str(c_game);
        s.period_half = static_cast<int>(v.integer(c_half));
        if (s.period_half != 1 && s.period_half != 2)
            throw Error(ErrorCode::SchemaError, v.where(c_half) + ": period_half must be 1 or 2");
        try {
            s.shot_class = parse_shot_class(v.str(c_class));
        } catch (const Error&) {
            throw Error(ErrorCode::SchemaError, v.where(c_class) + ": unknown shot class '" + v.str(c_class) + "'");
        }
        s.release_xy = Vec2(v.num(c_rx), v.num(c_ry));
        s.hoop_xy = Vec2(v.num(c_hx), v.num(c_hy));
        s.outcome = static_cast<int>(v.integer(c_out));
        if (s.outcome != 0 && s.outcome != 1)
            throw Error(ErrorCode::SchemaError, v.where(c_out) + ": outcome must be 0 or 1");
        s.points = static_cast<int>(v.integer(c_pts));
        shots.push_back(std::move(s));
    }
    return shots;
}

IngestReport ingest_tracking_text(std::string_view shots_text, std::string_view tracking_text) {
    IngestReport rep;
    rep.shots = parse_shots(parse_csv(shots_text, "shots"));
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < rep.shots.size(); ++i) index.emplace(rep.shots[i].shot_id, i);

    // Streamed rather than going through CsvTable: tracking files run to
    // millions of rows.
    std::array<std::size_t, 5> col{};
    std::size_t width = 0;
    bool have_header = false;
    std::vector<std::string_view> fields;
    std::size_t pos = 0, line_no = 0;
    while (pos < tracking_text.size()) {
        auto nl = tracking_text.find('\n', pos);
        if (nl == std::string_view::npos) nl = tracking_text.size();
        const auto line = trim(tracking_text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        fields.clear();
        for (std::size_t start = 0;;) {
            const auto comma = line.find(',', start);
            fields.push_back(trim(line.substr(start, comma == line.npos ? line.npos : comma - start)));
            if (comma == line.npos) break;
            start = comma + 1;
        }
        if (!have_header) {
            CsvTable header;
            header.header.assign(fields.begin(), fields.end());
            const std::array<const char*, 5> names = {"shot_id", "t", "x", "y", "z"};
            for (std::size_t k = 0; k < names.size(); ++k) col[k] = header.column(names[k]);
            width = fields.size();
            have_header = true;
            continue;
        }
        const std::string where = "tracking line " + std::to_string(line_no);
        if (fields.size() != width)
            throw Error(ErrorCode::SchemaError, where + ": expected " + std::to_string(width) + " fields, got " +
                                                    std::to_string(fields.size()));
        const std::string id(fields[col[0]]);
        const auto it = index.find(id);
        if (it == index.end())
            throw Error(ErrorCode::OrphanSamples, where + " references unknown shot_id " + id);
        const TrackingSample s{parse_double(fields[col[1]], where), parse_double(fields[col[2]], where),
                               parse_double(fields[col[3]], where), parse_double(fields[col[4]], where)};
        if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z))
            throw Error(ErrorCode::SchemaError, where + ": non-finite sample for shot_id " + id);
        auto& samples = rep.shots[it->second].samples;
        if (!samples.empty() && !(s.t > samples.back().t))
            throw Error(ErrorCode::NonMonotoneTime, "shot_id " + id + " at " + where);
        samples.push_back(s);
        ++rep.tracking_rows;
    }
    if (!have_header) throw Error(ErrorCode::SchemaError, "tracking: no header row");
    return rep;
}

IngestReport ingest_tracking(const fs::path& shots_path, const fs::path& tracking_path) {
    return ingest_tracking_text(read_file(shots_path), read_file(tracking_path));
}

std::string ground_truth_csv(const SimulatedSeason& season) {
    CsvWriter w{"shot_id", "true_depth", "true_lr", "true_angle", "true_p"};
    for (const auto& g : season.truth) {
        w.cell(g.shot_id).cell(g.factors.depth).cell(g.factors.left_right).cell(g.factors.entry_angle).cell(g.p);
        w.end_row();
    }
    return w.str();
}

std::string players_csv(const SimulatedSeason& season) {
    // true_theta is the three-point rate; the other classes follow in extra columns.
    CsvWriter w{"player_id", "true_theta", "true_theta_FT", "true_theta_2PT"};
    for (const auto& p : season.players) {
        w.cell(p.player_id).cell(p.theta[0]).cell(p.theta[1]).cell(p.theta[2]);
        w.end_row();
    }
    return w.str();
}

std::string factors_csv(const std::vector<FactorRow>& rows) {
    CsvWriter w{"shot_id", "depth_in", "lr_in", "angle_deg", "valid", "fill_prob", "reason"};
    for (const auto& r : rows) {
        w.cell(r.shot_id);
        if (r.factors.valid)
            w.cell(r.factors.depth).cell(r.factors.left_right).cell(r.factors.entry_angle).cell(1).cell("");
        else
            w.cell("").cell("").cell("").cell(0).cell(r.factors.fill_prob.value_or(0.0));
        w.cell(to_string(r.reason));
        w.end_row();
    }
    return w.str();
}

std::vector<FactorRow> read_factors(const fs::path& path) {
    const auto t = read_csv(path);
    const std::string src = path.string();
    const auto c_id = t.column("shot_id"), c_d = t.column("depth_in"), c_lr = t.column("lr_in"),
               c_a = t.column("angle_deg"), c_v = t.column("valid"), c_f = t.column("fill_prob");
    const auto c_reason = t.find_column("reason");
    std::vector<FactorRow> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RowView v{t, r, src};
        FactorRow row;
        row.shot_id = v.str(c_id);
        row.factors.valid = v.integer(c_v) != 0;
        if (row.factors.valid) {
            row.factors.depth = v.num(c_d);
            row.factors.left_right = v.num(c_lr);
            row.factors.entry_angle = v.num(c_a);
        } else {
            row.factors.fill_prob = v.num(c_f);
            row.reason = InvalidReason::FitFailed;
            if (c_reason)
                for (auto reason : {InvalidReason::TooFewSamples, InvalidReason::PoorFit, InvalidReason::NoCrossing,
                                    InvalidReason::FitFailed, InvalidReason::Excluded})
                    if (to_string(reason) == v.str(*c_reason)) row.reason = reason;
        }
        out.push_back(std::move(row));
    }
    return out;
}

namespace {

std::vector<std::string> fit_columns() {
    std::vector<std::string> h{"shot_id", "origin_x", "origin_y"};
    for (int i = 0; i < 6; ++i) h.push_back("beta" + std::to_string(i));
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) h.push_back("prec" + std::to_string(i) + std::to_string(j));
    for (const char* c : {"residual_rmse", "n_samples", "noise_shape", "noise_scale", "path_x", "path_y", "dir_x",
                          "dir_y", "speed", "t_begin", "t_end"})
        h.emplace_back(c);
    return h;
}

}  // namespace

std::string fits_csv(const std::vector<FitRow>& rows) {
    CsvWriter w(fit_columns());
    for (const auto& r : rows) {
        const auto& f = r.fit;
        w.cell(r.shot_id).cell(f.origin.x()).cell(f.origin.y());
        for (int i = 0; i < 6; ++i) w.cell(f.beta[i]);
        for (int i = 0; i < 6; ++i)
            for (int j = i; j < 6; ++j) w.cell(f.precision(i, j));
        w.cell(f.residual_rmse).cell(f.n_samples).cell(f.noise_shape).cell(f.noise_scale);
        w.cell(r.path.origin_xy.x()).cell(r.path.origin_xy.y()).cell(r.path.direction_xy.x());
        w.cell(r.path.direction_xy.y()).cell(r.path.speed).cell(r.path.t_begin).cell(r.path.t_end);
        w.end_row();
    }
    return w.str();
}

std::vector<FitRow> read_fits(const fs::path& path) {
    const auto t = read_csv(path);
    const auto names = fit_columns();
    std::vector<std::size_t> col;
    for (const auto& n : names) col.push_back(t.column(n));
    std::vector<FitRow> out;
    out.reserve(t.rows.size());
    const std::string src = path.string();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RowView v{t, r, src};
        std::size_t k = 0;
        FitRow row;
        row.shot_id = v.str(col[k++]);
        auto next = [&] { return v.num(col[k++]); };
        row.fit.origin.x() = next();
        row.fit.origin.y() = next();
        for (int i = 0; i < 6; ++i) row.fit.beta[i] = next();
        for (int i = 0; i < 6; ++i)
            for (int j = i; j < 6; ++j) row.fit.precision(i, j) = row.fit.precision(j, i) = next();
        row.fit.residual_rmse = next();
        row.fit.n_samples = static_cast<std::size_t>(v.integer(col[k++]));
        row.fit.noise_shape = next();
        row.fit.noise_scale = next();
        row.path.origin_xy.x() = next();
        row.path.origin_xy.y() = next();
        row.path.direction_xy.x() = next();
        row.path.direction_xy.y() = next();
        row.path.speed = next();
        row.path.t_begin = next();
        row.path.t_end = next();
        out.push_back(std::move(row));
    }
    return out;
}

std::string probabilities_csv(const std::vector<ProbRow>& rows) {
    CsvWriter w{"shot_id", "p_make", "source"};
    for (const auto& r : rows) {
        w.cell(r.shot_id).cell(r.p_make).cell(r.filled ? "fill" : "model");
        w.end_row();
    }
    return w.str();
}

std::vector<ProbRow> read_probabilities(const fs::path& path) {
    const auto t = read_csv(path);
    const std::string src = path.string();
    const auto c_id = t.column("shot_id"), c_p = t.column("p_make"), c_src = t.column("source");
    std::vector<ProbRow> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RowView v{t, r, src};
        const auto& s = v.str(c_src);
        if (s != "model" && s != "fill") throw Error(ErrorCode::SchemaError, v.where(c_src) + ": bad source");
        out.push_back({v.str(c_id), v.num(c_p), s == "fill"});
    }
    return out;
}

json model_to_json(const ProbModel& m, ShotClass c) {
    json j;
    j["format_version"] = kFormatVersion;
    j["shot_class"] = std::string(to_string(c));
    j["features"] = json(std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end()));
    j["coef"] = json(std::vector<double>(m.coef.data(), m.coef.data() + kNumFeatures));
    const auto raw = m.raw_coef();
    j["raw_coef"] = json(std::vector<double>(raw.data(), raw.data() + kNumFeatures));
    j["feature_mean"] = json(m.feature_mean);
    j["feature_scale"] = json(m.feature_scale);
    json cov = json::array();
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < kNumFeatures; ++k) row.push_back(finite_or_null(m.covariance(i, k)));
        cov.push_back(row);
    }
    j["covariance"] = cov;
    j["train"] = {{"n", m.train_n}, {"converged", m.converged}, {"loglik", m.loglik}, {"iterations", m.iterations}};
    return j;
}

ProbModel model_from_json(const json& j) {
    check_version(j, "model");
    ProbModel m;
    try {
        const auto coef = j.at("coef").get<std::vector<double>>();
        if (coef.size() != kNumFeatures) throw Error(ErrorCode::SchemaError, "model: coef must have 10 entries");
        for (std::size_t i = 0; i < kNumFeatures; ++i) m.coef[static_cast<Eigen::Index>(i)] = coef[i];
        m.feature_mean = j.at("feature_mean").get<std::array<double, kNumFeatures - 1>>();
        m.feature_scale = j.at("feature_scale").get<std::array<double, kNumFeatures - 1>>();
        const auto& cov = j.at("covariance");
        for (std::size_t i = 0; i < kNumFeatures; ++i)
            for (std::size_t k = 0; k < kNumFeatures; ++k) {
                const auto& e = cov.at(i).at(k);
                m.covariance(i, k) = e.is_null() ? std::numeric_limits<double>::quiet_NaN() : e.get<double>();
            }
        const auto& tr = j.at("train");
        m.train_n = tr.at("n").get<std::size_t>();
        m.converged = tr.at("converged").get<bool>();
        m.loglik = tr.at("loglik").get<double>();
        m.iterations = tr.at("iterations").get<int>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("model: ") + e.what());
    }
    return m;
}

namespace {

constexpr std::array<const char*, 13> kEstimateColumns = {
    "player_id", "class", "n", "theta_raw", "theta_rb", "theta_shrunk_raw", "theta_shrunk_rb",
    "alpha",     "beta",  "var_raw", "var_rb", "ci_lo", "ci_hi"};

}  // namespace

std::string estimates_csv(const std::vector<EstimateRow>& rows) {
    CsvWriter w(std::vector<std::string>(kEstimateColumns.begin(), kEstimateColumns.end()));
    for (const auto& r : rows) {
        const auto& e = r.est;
        w.cell(r.player_id).cell(to_string(r.shot_class)).cell(e.n).cell(e.theta_raw).cell(e.theta_rb);
        w.cell(e.theta_shrunk_raw).cell(e.theta_shrunk_rb);
        if (e.beta)
            w.cell(e.beta->alpha).cell(e.beta->beta);
        else
            w.cell("").cell("");
        w.cell(e.var_raw).cell(e.var_rb).cell(e.ci_lo).cell(e.ci_hi);
        w.end_row();
    }
    return w.str();
}

json estimates_json(const std::vector<EstimateRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        const auto& e = r.est;
        arr.push_back({{"player_id", r.player_id},
                       {"class", std::string(to_string(r.shot_class))},
                       {"n", e.n},
                       {"theta_raw", e.theta_raw},
                       {"theta_rb", e.theta_rb},
                       {"theta_shrunk_raw", e.theta_shrunk_raw},
                       {"theta_shrunk_rb", e.theta_shrunk_rb},
                       {"alpha", e.beta ? json(e.beta->alpha) : json(nullptr)},
                       {"beta", e.beta ? json(e.beta->beta) : json(nullptr)},
                       {"var_raw", e.var_raw},
                       {"var_rb", e.var_rb},
                       {"ci_lo", e.ci_lo},
                       {"ci_hi", e.ci_hi}});
    }
    return {{"format_version", kFormatVersion}, {"estimates", arr}};
}

std::vector<EstimateRow> read_estimates(const fs::path& path) {
    const auto t = read_csv(path);
    const std::string src = path.string();
    std::array<std::size_t, kEstimateColumns.size()> c{};
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = t.column(kEstimateColumns[i]);
    std::vector<EstimateRow> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RowView v{t, r, src};
        EstimateRow row;
        row.player_id = v.str(c[0]);
        row.shot_class = parse_shot_class(v.str(c[1]));
        auto& e = row.est;
        e.n = static_cast<std::size_t>(v.integer(c[2]));
        e.theta_raw = v.num(c[3]);
        e.theta_rb = v.num(c[4]);
        e.theta_shrunk_raw = v.num(c[5]);
        e.theta_shrunk_rb = v.num(c[6]);
        if (!v.str(c[7]).empty()) {
            BetaFit b;
            b.alpha = v.num(c[7]);
            b.beta = v.num(c[8]);
            b.v = b.alpha + b.beta;
            b.theta = b.alpha / b.v;
            e.beta = b;
        }
        e.var_raw = v.num(c[9]);
        e.var_rb = v.num(c[10]);
        e.ci_lo = v.num(c[11]);
        e.ci_hi = v.num(c[12]);
        out.push_back(std::move(row));
    }
    return out;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
    }
}

}  // namespace shotrb
