#include <shotrb/pipeline.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace shotrb {

using nlohmann::json;

namespace {

// Stream tags for derived seeds.
constexpr std::uint64_t kTrainSeasonStream = 0x747261696e;
constexpr std::uint64_t kCvStream = 0xc5;
constexpr std::uint64_t kRmseStream = 0x6d5e;
constexpr std::uint64_t kSdStream = 0x5d;

// Bumped when a stage's output format or algorithm changes, so old cache
// entries stop matching.
constexpr int kStageVersion = 1;

void log_line(const RunOptions& opts, std::string_view stage, const std::string& msg) {
    if (opts.log) *opts.log << "[" << stage << "] " << msg << "\n";
}

struct Input {
    fs::path path;
    const char* producer;  // stage reported in MissingArtifact
};

/// Runs one stage with cache lookup and error tagging.
void run_stage(const char* name, const PipelineConfig& cfg, const RunOptions& opts,
               const std::string& config_material, const std::vector<Input>& inputs,
               const std::function<std::vector<fs::path>()>& body) {
    const ArtifactLayout layout{cfg.out};
    try {
        std::string material = std::string(name) + "\nversion " + std::to_string(kStageVersion) + "\n" + config_material;
        for (const auto& in : inputs) {
            if (!fs::is_regular_file(in.path))
                throw Error(ErrorCode::MissingArtifact,
                            std::string(in.producer) + " (expected " + in.path.string() + ")");
            material += in.path.filename().string() + " " + sha256_file(in.path) + "\n";
        }
        const std::string key = sha256_hex(material);
        const fs::path cache_file = layout.cache_dir() / (std::string(name) + ".json");

        if (opts.use_cache && fs::is_regular_file(cache_file)) {
            const json cached = read_json(cache_file);
            bool fresh = cached.value("key", "") == key && cached.contains("outputs");
            if (fresh)
                for (const auto& [rel, hash] : cached["outputs"].items()) {
                    const fs::path p = layout.root / rel;
                    if (!fs::is_regular_file(p) || sha256_file(p) != hash.get<std::string>()) {
                        fresh = false;
                        break;
                    }
                }
            if (fresh) {
                log_line(opts, name, "up to date (cached)");
                return;
            }
        }

        const auto outputs = body();
        json out = json::object();
        for (const auto& p : outputs) out[fs::relative(p, layout.root).generic_string()] = sha256_file(p);
        write_file(cache_file, dump_json({{"key", key}, {"outputs", out}}));
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e.code(), e.what());
    } catch (const std::exception& e) {
        throw StageError(name, ErrorCode::IoError, e.what());
    }
}

std::string seed_material(const PipelineConfig& cfg) { return "seed = " + std::to_string(cfg.seed) + "\n"; }

bool same_season(const DataPaths& d) { return d.shots == d.train_shots && d.tracking == d.train_tracking; }

std::vector<ShotRecord> read_shot_metadata(const fs::path& path) { return parse_shots(read_csv(path)); }

std::vector<Input> season_inputs(const DataPaths& d, bool with_tracking) {
    std::vector<Input> in{{d.shots, "simulate"}};
    if (with_tracking) in.push_back({d.tracking, "simulate"});
    if (!same_season(d)) {
        in.push_back({d.train_shots, "simulate"});
        if (with_tracking) in.push_back({d.train_tracking, "simulate"});
    }
    return in;
}

std::array<ProbModel, 3> load_models(const ArtifactLayout& layout) {
    std::array<ProbModel, 3> models;
    for (auto c : kShotClasses) {
        const auto p = layout.model(c);
        if (!fs::is_regular_file(p)) throw Error(ErrorCode::MissingArtifact, "shotprob (expected " + p.string() + ")");
        models[index_of(c)] = model_from_json(read_json(p));
    }
    return models;
}

void check_aligned(const std::vector<ShotRecord>& shots, std::size_t n, const std::function<const std::string&(std::size_t)>& id,
                   std::string_view what) {
    if (shots.size() != n)
        throw Error(ErrorCode::SchemaError, std::string(what) + " has " + std::to_string(n) + " rows for " +
                                                std::to_string(shots.size()) + " shots");
    for (std::size_t i = 0; i < n; ++i)
        if (shots[i].shot_id != id(i))
            throw Error(ErrorCode::SchemaError,
                        std::string(what) + " row " + std::to_string(i + 1) + " is shot_id " + id(i) +
                            ", expected " + shots[i].shot_id);
}

json score_json(const ScoreReport& s) {
    return {{"misclassification", s.misclassification}, {"brier", s.brier}, {"logloss", s.logloss}};
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json summarize(const std::vector<double>& v) {
    if (v.empty()) return {{"count", 0}};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    return {{"count", v.size()},
            {"mean", mean},
            {"min", quantile(v, 0.0)},
            {"q25", quantile(v, 0.25)},
            {"median", quantile(v, 0.5)},
            {"q75", quantile(v, 0.75)},
            {"max", quantile(v, 1.0)}};
}

}  // namespace

DataPaths resolve_inputs(const PipelineConfig& cfg) {
    const ArtifactLayout layout{cfg.out};
    DataPaths d;
    const bool simulated = cfg.input.shots.empty();
    d.shots = simulated ? layout.sim_shots() : cfg.input.shots;
    d.tracking = simulated ? layout.sim_tracking() : cfg.input.tracking;
    if (!cfg.input.train_shots.empty()) {
        d.train_shots = cfg.input.train_shots;
        d.train_tracking = cfg.input.train_tracking;
    } else if (simulated && cfg.sim_train_season) {
        d.train_shots = layout.sim_train_shots();
        d.train_tracking = layout.sim_train_tracking();
    } else {
        d.train_shots = d.shots;
        d.train_tracking = d.tracking;
    }
    return d;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

double horizontal_arc_length(std::span<const TrackingSample> samples) {
    if (samples.size() < 2) return 0.0;
    return std::hypot(samples.back().x - samples.front().x, samples.back().y - samples.front().y);
}

FitOutput measure_shots(const std::vector<ShotRecord>& shots, const PipelineConfig& cfg, unsigned jobs) {
    FitOutput out;
    out.factors.resize(shots.size());
    std::vector<std::optional<FitRow>> fits(shots.size());
    std::vector<std::uint8_t> excluded(shots.size(), 0);
    parallel_for(shots.size(), jobs, [&](std::size_t i) {
        const auto& s = shots[i];
        auto& row = out.factors[i];
        row.shot_id = s.shot_id;
        if (s.samples.size() < cfg.filter.min_samples) {
            excluded[i] = 1;
        } else if (horizontal_arc_length(s.samples) < cfg.filter.min_arc_length) {
            excluded[i] = 2;
        }
        if (excluded[i]) {
            row.factors = invalid_factors(s.outcome);
            row.reason = InvalidReason::Excluded;
            return;
        }
        const auto m = measure_shot(s.samples, s.context(cfg.sim.hoop_height, cfg.sim.rim_radius), s.outcome, cfg.traj);
        row.factors = m.factors;
        row.reason = m.reason;
        if (m.fit && m.path) fits[i] = FitRow{s.shot_id, *m.fit, *m.path};
    });
    for (std::size_t i = 0; i < shots.size(); ++i) {
        if (fits[i]) out.fits.push_back(std::move(*fits[i]));
        if (excluded[i] == 1) ++out.excluded_min_samples;
        if (excluded[i] == 2) ++out.excluded_arc_length;
    }
    return out;
}

std::vector<ProbRow> predict_probabilities(const std::vector<ShotRecord>& shots, const std::vector<FactorRow>& factors,
                                           const std::array<ProbModel, 3>& models) {
    check_aligned(shots, factors.size(), [&](std::size_t i) -> const std::string& { return factors[i].shot_id; },
                  "factors");
    std::vector<ProbRow> out(shots.size());
    for (std::size_t i = 0; i < shots.size(); ++i) {
        const auto& f = factors[i].factors;
        out[i].shot_id = shots[i].shot_id;
        if (f.valid) {
            out[i].p_make = predict_make_prob(models[index_of(shots[i].shot_class)], f);
        } else {
            out[i].p_make = f.fill_prob.value_or(static_cast<double>(shots[i].outcome));
            out[i].filled = true;
        }
    }
    return out;
}

namespace {

std::pair<std::vector<double>, std::vector<std::uint8_t>> unpack(const std::vector<ProbRow>& probs) {
    std::vector<double> p(probs.size());
    std::vector<std::uint8_t> filled(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        p[i] = probs[i].p_make;
        filled[i] = probs[i].filled ? 1 : 0;
    }
    return {std::move(p), std::move(filled)};
}

}  // namespace

std::vector<EstimateRow> estimate_players(const std::vector<ShotRecord>& shots, const std::vector<ProbRow>& probs,
                                          const PipelineConfig& cfg) {
    check_aligned(shots, probs.size(), [&](std::size_t i) -> const std::string& { return probs[i].shot_id; },
                  "probabilities");
    const auto [p, filled] = unpack(probs);
    PlayerTable table;
    if (cfg.estimate.half == 0) {
        table = assemble_season(shots, p, filled).players;
    } else {
        auto split = split_halves(shots, p, filled);
        table = cfg.estimate.half == 1 ? std::move(split.first_half) : std::move(split.second_half);
    }
    std::vector<EstimateRow> rows;
    std::array<BetaPrior, 3> priors;
    std::array<bool, 3> have_prior{};
    for (auto c : kShotClasses) {
        bool any = false;
        for (const auto& [id, ps] : table) any = any || ps.attempts(c) > 0;
        if (any) {
            priors[index_of(c)] = class_prior(table, c, cfg.shrink);
            have_prior[index_of(c)] = true;
        }
    }
    for (const auto& [id, ps] : table)
        for (auto c : kShotClasses) {
            if (ps.attempts(c) == 0 || !have_prior[index_of(c)]) continue;
            rows.push_back({id, c, estimate_class(ps.shots(c), priors[index_of(c)], cfg.estimate.ci_level)});
        }
    return rows;
}

void stage_simulate(const PipelineConfig& cfg, const RunOptions& opts) {
    if (!cfg.input.shots.empty()) {
        log_line(opts, "simulate", "skipped, input files configured");
        return;
    }
    const ArtifactLayout layout{cfg.out};
    const std::string material =
        seed_material(cfg) + cfg.section_text("sim") + cfg.section_text("court");
    run_stage("simulate", cfg, opts, material, {}, [&] {
        std::vector<fs::path> written;
        auto emit = [&](const SimConfig& sim, const fs::path& shots, const fs::path& tracking, const fs::path& truth,
                        const fs::path& players) {
            const auto season = gen_dataset(sim);
            write_file(shots, shots_csv(season.shots));
            write_file(tracking, tracking_csv(season.shots));
            write_file(truth, ground_truth_csv(season));
            write_file(players, players_csv(season));
            written.insert(written.end(), {shots, tracking, truth, players});
            return season.shots.size();
        };
        SimConfig sim = cfg.sim;
        sim.seed = cfg.seed;
        const auto n = emit(sim, layout.sim_shots(), layout.sim_tracking(), layout.sim_truth(), layout.sim_players());
        log_line(opts, "simulate", std::to_string(n) + " shots");
        if (cfg.sim_train_season) {
            sim.seed = mix_seed(cfg.seed, kTrainSeasonStream);
            const auto nt = emit(sim, layout.sim_train_shots(), layout.sim_train_tracking(), layout.sim_train_truth(),
                                 layout.sim_train_players());
            log_line(opts, "simulate", std::to_string(nt) + " training shots");
        }
        return written;
    });
}

void stage_ingest(const PipelineConfig& cfg, const RunOptions& opts) {
    const ArtifactLayout layout{cfg.out};
    const auto d = resolve_inputs(cfg);
    run_stage("ingest", cfg, opts, cfg.section_text("filter"), season_inputs(d, true), [&] {
        auto describe = [&](const fs::path& shots, const fs::path& tracking) {
            const auto rep = ingest_tracking(shots, tracking);
            std::size_t few = 0, short_arc = 0, no_samples = 0;
            std::map<std::string, int> players, games;
            for (const auto& s : rep.shots) {
                players[s.player_id] = 1;
                games[s.game_id] = 1;
                if (s.samples.empty()) ++no_samples;
                if (s.samples.size() < cfg.filter.min_samples)
                    ++few;
                else if (horizontal_arc_length(s.samples) < cfg.filter.min_arc_length)
                    ++short_arc;
            }
            log_line(opts, "ingest",
                     shots.string() + ": " + std::to_string(rep.shots.size()) + " shots, " +
                         std::to_string(rep.tracking_rows) + " tracking rows");
            return json{{"shots", rep.shots.size()},
                        {"tracking_rows", rep.tracking_rows},
                        {"players", players.size()},
                        {"games", games.size()},
                        {"shots_without_samples", no_samples},
                        {"excluded_min_samples", few},
                        {"excluded_arc_length", short_arc}};
        };
        json j{{"format_version", kFormatVersion}, {"predict", describe(d.shots, d.tracking)}};
        j["train"] = same_season(d) ? json("same as predict") : describe(d.train_shots, d.train_tracking);
        write_file(layout.ingest(), dump_json(j));
        return std::vector<fs::path>{layout.ingest()};
    });
}

void stage_fit(const PipelineConfig& cfg, const RunOptions& opts) {
    const ArtifactLayout layout{cfg.out};
    const auto d = resolve_inputs(cfg);
    const std::string material = cfg.section_text("traj") + cfg.section_text("filter") + cfg.section_text("court");
    run_stage("fit-trajectories", cfg, opts, material, season_inputs(d, true), [&] {
        auto summarize_fit = [](const FitOutput& f) {
            std::map<std::string, std::size_t> reasons;
            std::size_t valid = 0;
            for (const auto& r : f.factors) {
                if (r.factors.valid)
                    ++valid;
                else
                    ++reasons[std::string(to_string(r.reason))];
            }
            return json{{"shots", f.factors.size()},
                        {"valid", valid},
                        {"invalid", f.factors.size() - valid},
                        {"invalid_by_reason", reasons},
                        {"excluded_min_samples", f.excluded_min_samples},
                        {"excluded_arc_length", f.excluded_arc_length}};
        };
        const auto predict = ingest_tracking(d.shots, d.tracking);
        const auto fit = measure_shots(predict.shots, cfg, opts.jobs);
        write_file(layout.factors(), factors_csv(fit.factors));
        write_file(layout.fits(), fits_csv(fit.fits));
        json summary{{"format_version", kFormatVersion}, {"predict", summarize_fit(fit)}};
        if (same_season(d)) {
            write_file(layout.train_factors(), factors_csv(fit.factors));
            summary["train"] = "same as predict";
        } else {
            const auto train = ingest_tracking(d.train_shots, d.train_tracking);
            const auto tfit = measure_shots(train.shots, cfg, opts.jobs);
            write_file(layout.train_factors(), factors_csv(tfit.factors));
            summary["train"] = summarize_fit(tfit);
        }
        write_file(layout.fit_summary(), dump_json(summary));
        log_line(opts, "fit-trajectories",
                 std::to_string(summary["predict"]["valid"].get<std::size_t>()) + " of " +
                     std::to_string(fit.factors.size()) + " shots valid");
        return std::vector<fs::path>{layout.factors(), layout.fits(), layout.train_factors(), layout.fit_summary()};
    });
}

void stage_train(const PipelineConfig& cfg, const RunOptions& opts) {
    const ArtifactLayout layout{cfg.out};
    const auto d = resolve_inputs(cfg);
    std::vector<Input> inputs{{d.train_shots, "simulate"}, {layout.train_factors(), "fit-trajectories"}};
    run_stage("train-model", cfg, opts, seed_material(cfg) + cfg.section_text("model"), inputs, [&] {
        const auto shots = read_shot_metadata(d.train_shots);
        const auto factors = read_factors(layout.train_factors());
        check_aligned(shots, factors.size(), [&](std::size_t i) -> const std::string& { return factors[i].shot_id; },
                      "training factors");
        json scores{{"format_version", kFormatVersion}};
        std::vector<fs::path> written;
        for (auto c : kShotClasses) {
            std::vector<LabeledRow> rows;
            std::vector<std::pair<ShotFactors, int>> labelled;
            std::vector<int> all_outcomes;
            for (std::size_t i = 0; i < shots.size(); ++i) {
                if (shots[i].shot_class != c) continue;
                all_outcomes.push_back(shots[i].outcome);
                if (factors[i].factors.valid) {
                    rows.push_back({build_features(factors[i].factors), shots[i].outcome});
                    labelled.emplace_back(factors[i].factors, shots[i].outcome);
                }
            }
            const auto tag = std::string(to_string(c));
            ProbModel model;
            try {
                model = train_logistic(rows, cfg.model.train);
            } catch (const Error& e) {
                throw Error(e.code(), "class " + tag + ": " + e.what());
            }
            write_file(layout.model(c), dump_json(model_to_json(model, c)));
            written.push_back(layout.model(c));

            std::vector<double> preds;
            std::vector<int> outcomes;
            for (const auto& r : rows) {
                preds.push_back(predict_make_prob(model, r.x));
                outcomes.push_back(r.outcome);
            }
            // Invalid trajectories scored with their 0/1 fill alongside the model predictions.
            std::vector<double> with_fill;
            for (std::size_t i = 0, k = 0; i < shots.size(); ++i) {
                if (shots[i].shot_class != c) continue;
                with_fill.push_back(factors[i].factors.valid ? preds[k++] : static_cast<double>(shots[i].outcome));
            }
            const double rate = std::accumulate(outcomes.begin(), outcomes.end(), 0.0) / static_cast<double>(outcomes.size());
            const std::vector<double> constant(outcomes.size(), rate);

            json cls{{"train_n", rows.size()},
                     {"attempts", all_outcomes.size()},
                     {"converged", model.converged},
                     {"iterations", model.iterations},
                     {"in_sample", score_json(score_all(preds, outcomes))},
                     {"with_fill", score_json(score_all(with_fill, all_outcomes))},
                     {"grand_mean", score_json(score_all(constant, outcomes))},
                     {"grand_mean_rate", rate}};
            const auto seed = mix_seed(cfg.seed, kCvStream + index_of(c));
            try {
                cls["cv_misclassification"] = crossval_misclassification(rows, cfg.model.cv_folds, seed, cfg.model.train);
            } catch (const Error& e) {
                cls["cv_misclassification"] = nullptr;
                cls["cv_note"] = e.what();
            }
            try {
                const auto g = gmz_make_rate(labelled);
                cls["gmz"] = {{"rate", g.rate}, {"count", g.count}};
            } catch (const Error&) {
                cls["gmz"] = {{"rate", nullptr}, {"count", 0}};
            }
            scores["classes"][tag] = cls;
            log_line(opts, "train-model", tag + ": " + std::to_string(rows.size()) + " rows, " +
                                              (model.converged ? "converged" : "not converged"));
        }
        write_file(layout.model_scores(), dump_json(scores));
        written.push_back(layout.model_scores());
        return written;
    });
}

void stage_estimate(const PipelineConfig& cfg, const RunOptions& opts) {
    const ArtifactLayout layout{cfg.out};
    const auto d = resolve_inputs(cfg);
    std::vector<Input> inputs{{d.shots, "simulate"}, {layout.factors(), "fit-trajectories"}};
    for (auto c : kShotClasses) inputs.push_back({layout.model(c), "train-model"});
    const std::string material = cfg.section_text("shrink") + cfg.section_text("estimate");
    run_stage("estimate", cfg, opts, material, inputs, [&] {
        const auto shots = read_shot_metadata(d.shots);
        const auto factors = read_factors(layout.factors());
        const auto probs = predict_probabilities(shots, factors, load_models(layout));
        write_file(layout.probabilities(), probabilities_csv(probs));
        const auto rows = estimate_players(shots, probs, cfg);
        write_file(layout.estimates_csv(), estimates_csv(rows));
        write_file(layout.estimates_json(), dump_json(estimates_json(rows)));
        log_line(opts, "estimate", std::to_string(rows.size()) + " player-class estimates");
        return std::vector<fs::path>{layout.probabilities(), layout.estimates_csv(), layout.estimates_json()};
    });
}

void stage_evaluate(const PipelineConfig& cfg, const RunOptions& opts) {
    const ArtifactLayout layout{cfg.out};
    const auto d = resolve_inputs(cfg);
    std::vector<Input> inputs{{d.shots, "simulate"},
                              {layout.probabilities(), "shotprob"},
                              {layout.fits(), "fit-trajectories"},
                              {layout.model(cfg.eval.sd_class), "train-model"}};
    const std::string material =
        seed_material(cfg) + cfg.section_text("eval") + cfg.section_text("shrink") + cfg.section_text("court");
    run_stage("evaluate", cfg, opts, material, inputs, [&] {
        const auto shots = read_shot_metadata(d.shots);
        const auto probs = read_probabilities(layout.probabilities());
        check_aligned(shots, probs.size(), [&](std::size_t i) -> const std::string& { return probs[i].shot_id; },
                      "probabilities");
        const auto [p, filled] = unpack(probs);
        const auto split = split_halves(shots, p, filled);
        const auto season = assemble_season(shots, p, filled);
        const std::size_t min_att = cfg.eval.min_attempts;
        json ev{{"format_version", kFormatVersion}, {"min_attempts", min_att}};

        // Prediction table.
        const auto table = mae_table(split, cfg.shrink, min_att);
        json mae = json::object();
        for (std::size_t r = 0; r < kMaeRowNames.size(); ++r) {
            json row{{"players", table.players[r]}};
            for (std::size_t c = 0; c < kMaeColumnNames.size(); ++c) row[kMaeColumnNames[c]] = nullable(table.mae[r][c]);
            mae[kMaeRowNames[r]] = row;
        }
        ev["mae_table"] = mae;

        // Per-player errors behind the three-point row.
        {
            const auto c = ShotClass::ThreePoint;
            const auto prior = class_prior(split.first_half, c, cfg.shrink);
            const double gm = league_rate(split.first_half, c);
            const auto raw = class_estimates(split.first_half, c, MaeColumn::Raw, prior, gm);
            const auto rb = class_estimates(split.first_half, c, MaeColumn::RB, prior, gm);
            const auto srb = class_estimates(split.first_half, c, MaeColumn::ShrunkRB, prior, gm);
            const auto target = class_raw(split.second_half, c);
            json errors = json::array();
            for (const auto& [id, t] : target) {
                const auto it = raw.find(id);
                if (it == raw.end() || it->second.attempts < min_att || t.attempts < min_att) continue;
                const double r = it->second.value, b = rb.at(id).value, s = srb.at(id).value;
                errors.push_back({{"player_id", id},
                                  {"n_first", it->second.attempts},
                                  {"n_second", t.attempts},
                                  {"target", t.value},
                                  {"raw", r},
                                  {"rb", b},
                                  {"shrunk_rb", s}});
            }
            ev["errors_3PT"] = errors;
        }

        // Error against end-of-season raw rate by fraction of games.
        json curves = json::object();
        for (auto c : kShotClasses) {
            json per_kind = json::object();
            for (auto kind : {EstimatorKind::Raw, EstimatorKind::RB}) {
                std::vector<double> sum(cfg.eval.fractions.size(), 0.0);
                std::vector<std::size_t> players(cfg.eval.fractions.size(), 0);
                std::vector<std::size_t> used(cfg.eval.fractions.size(), 0);
                for (std::size_t s = 0; s < cfg.eval.rmse_seeds; ++s) {
                    const auto seed = mix_seed(mix_seed(cfg.seed, kRmseStream), s);
                    std::vector<RmsePoint> curve;
                    try {
                        curve = rmse_vs_game_fraction(season, c, cfg.eval.fractions, kind, seed, min_att);
                    } catch (const Error& e) {
                        // No player has attempts in some sampled subset: this draw contributes nothing.
                        if (e.code() != ErrorCode::EmptyShots) throw;
                    }
                    for (std::size_t k = 0; k < curve.size(); ++k) {
                        if (curve[k].players == 0) continue;
                        sum[k] += curve[k].rmse;
                        players[k] += curve[k].players;
                        ++used[k];
                    }
                }
                json pts = json::array();
                for (std::size_t k = 0; k < sum.size(); ++k)
                    pts.push_back({{"fraction", cfg.eval.fractions[k]},
                                   {"rmse", used[k] ? json(sum[k] / static_cast<double>(used[k])) : json(nullptr)},
                                   {"mean_players", used[k] ? static_cast<double>(players[k]) / static_cast<double>(used[k]) : 0.0}});
                per_kind[std::string(to_string(kind))] = pts;
            }
            curves[std::string(to_string(c))] = per_kind;
        }
        ev["rmse_curves"] = curves;

        // Rank agreement between halves and discrimination within the first half.
        json spearman = json::object(), discr = json::object();
        for (auto c : kShotClasses) {
            const auto tag = std::string(to_string(c));
            for (auto kind : {EstimatorKind::Raw, EstimatorKind::RB}) {
                const auto col = kind == EstimatorKind::Raw ? MaeColumn::Raw : MaeColumn::RB;
                const BetaPrior unused_prior;
                const auto a = class_estimates(split.first_half, c, col, unused_prior, 0.0);
                const auto b = class_estimates(split.second_half, c, col, unused_prior, 0.0);
                std::map<std::string, double> ma, mb;
                for (const auto& [id, v] : a) {
                    const auto it = b.find(id);
                    if (it == b.end() || v.attempts < min_att || it->second.attempts < min_att) continue;
                    ma[id] = v.value;
                    mb[id] = it->second.value;
                }
                try {
                    spearman[tag][std::string(to_string(kind))] = spearman_rank(ma, mb);
                } catch (const Error&) {
                    spearman[tag][std::string(to_string(kind))] = nullptr;
                }
            }
            std::vector<double> raw_v, raw_var, rb_v, rb_var;
            for (const auto& [id, ps] : split.first_half) {
                if (ps.attempts(c) < std::max<std::size_t>(min_att, 1)) continue;
                const auto e = estimate_class(ps.shots(c), BetaPrior{});
                raw_v.push_back(e.theta_raw);
                raw_var.push_back(e.var_raw);
                rb_v.push_back(e.theta_rb);
                rb_var.push_back(e.var_rb);
            }
            for (auto [name, v, var] : {std::tuple{"raw", &raw_v, &raw_var}, std::tuple{"rb", &rb_v, &rb_var}}) {
                try {
                    discr[tag][name] = discrimination(*v, *var);
                } catch (const Error&) {
                    discr[tag][name] = nullptr;
                }
            }
        }
        ev["spearman"] = spearman;
        ev["discrimination"] = discr;

        // Estimator spread: closed-form raw and RB, and resampled trajectories.
        {
            const auto c = cfg.eval.sd_class;
            const auto model = model_from_json(read_json(layout.model(c)));
            std::unordered_map<std::string, const FitRow*> fit_of;
            const auto fits = read_fits(layout.fits());
            for (const auto& f : fits) fit_of.emplace(f.shot_id, &f);
            std::map<std::string, std::vector<ResampleShot>> per_player;
            for (std::size_t i = 0; i < shots.size(); ++i) {
                const auto& s = shots[i];
                if (s.shot_class != c || s.period_half != 1) continue;
                ResampleShot r;
                r.ctx = s.context(cfg.sim.hoop_height, cfg.sim.rim_radius);
                r.outcome = s.outcome;
                if (!probs[i].filled)
                    if (const auto it = fit_of.find(s.shot_id); it != fit_of.end()) {
                        r.fit = it->second->fit;
                        r.path = it->second->path;
                    }
                per_player[s.player_id].push_back(std::move(r));
            }
            std::vector<std::string> ids;
            for (const auto& [id, v] : per_player)
                if (v.size() >= std::max<std::size_t>(min_att, 1)) ids.push_back(id);
            std::vector<double> sd_raw(ids.size()), sd_rb(ids.size()), sd_sim(ids.size());
            std::vector<std::size_t> n(ids.size());
            parallel_for(ids.size(), opts.jobs, [&](std::size_t k) {
                const auto& ps = split.first_half.at(ids[k]);
                const auto e = estimate_class(ps.shots(c), BetaPrior{});
                n[k] = e.n;
                sd_raw[k] = std::sqrt(e.var_raw);
                sd_rb[k] = std::sqrt(e.var_rb);
                sd_sim[k] = simulated_rb_sd(per_player.at(ids[k]), model, cfg.eval.sd_repeats,
                                            mix_seed(mix_seed(cfg.seed, kSdStream), k), cfg.eval.sd_cov_scale,
                                            cfg.traj.validity.tangency_tol);
            });
            json players = json::array();
            for (std::size_t k = 0; k < ids.size(); ++k)
                players.push_back({{"player_id", ids[k]},
                                   {"n", n[k]},
                                   {"sd_raw", sd_raw[k]},
                                   {"sd_rb", sd_rb[k]},
                                   {"sd_simulated_rb", sd_sim[k]}});
            ev["sd_class"] = std::string(to_string(c));
            ev["sd_players"] = players;
            ev["sd_summaries"] = {{"raw", summarize(sd_raw)}, {"rb", summarize(sd_rb)}, {"simulated_rb", summarize(sd_sim)}};
        }

        write_file(layout.evaluation(), dump_json(ev));
        log_line(opts, "evaluate", std::to_string(table.players[0]) + " qualifying 3PT players");
        return std::vector<fs::path>{layout.evaluation()};
    });
}

namespace {

std::string fmt(const json& v, int digits = 4) {
    if (v.is_null()) return "n/a";
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v.get<double>();
    return ss.str();
}

}  // namespace

void emit_report(const fs::path& artifact_dir) {
    const ArtifactLayout layout{artifact_dir};
    auto require = [](const fs::path& p, const char* stage) {
        if (!fs::is_regular_file(p)) throw Error(ErrorCode::MissingArtifact, std::string(stage) + " (expected " + p.string() + ")");
    };
    require(layout.probabilities(), "shotprob");
    require(layout.model_scores(), "shotprob");
    require(layout.evaluation(), "evaluation");

    const auto probs = read_probabilities(layout.probabilities());
    const auto scores = read_json(layout.model_scores());
    const auto ev = read_json(layout.evaluation());
    const std::size_t filled =
        static_cast<std::size_t>(std::count_if(probs.begin(), probs.end(), [](const ProbRow& r) { return r.filled; }));

    std::size_t qualifying = 0;
    for (const auto& [row, v] : ev["mae_table"].items()) qualifying = std::max(qualifying, v["players"].get<std::size_t>());

    json report{{"format_version", kFormatVersion},
                {"shots", probs.size()},
                {"filled_shots", filled},
                {"qualifying_players", qualifying},
                {"mae_table", ev["mae_table"]},
                {"rmse_curves", ev["rmse_curves"]},
                {"spearman", ev["spearman"]},
                {"discrimination", ev["discrimination"]},
                {"sd_summaries", ev["sd_summaries"]},
                {"model_scores", scores["classes"]}};
    json notes = json::array();
    if (qualifying == 0) notes.push_back("zero qualifying players after filters; error tables are empty");
    report["notes"] = notes;
    write_file(layout.report_dir() / "report.json", dump_json(report));

    std::ostringstream txt;
    txt << "shots: " << probs.size() << " (" << filled << " with fill probability)\n";
    txt << "qualifying players (min " << ev["min_attempts"].get<std::size_t>() << " attempts per half): " << qualifying << "\n";
    if (qualifying == 0) txt << "note: zero qualifying players after filters\n";
    txt << "\nshot model (training season)\n";
    txt << "class  misclass  brier   logloss  cv_misclass  grand_mean_brier  gmz_rate\n";
    for (const auto& [tag, cls] : scores["classes"].items()) {
        txt << tag << std::string(7 - tag.size(), ' ') << fmt(cls["in_sample"]["misclassification"]) << "    "
            << fmt(cls["in_sample"]["brier"]) << "  " << fmt(cls["in_sample"]["logloss"]) << "   "
            << fmt(cls["cv_misclassification"]) << "       " << fmt(cls["grand_mean"]["brier"]) << "            "
            << fmt(cls["gmz"]["rate"]) << "\n";
    }
    txt << "\nmean absolute prediction error, second half\n";
    txt << "row    players  raw     grand_mean  rb      shrunk_raw  shrunk_rb\n";
    for (const char* row : kMaeRowNames) {
        const auto& r = ev["mae_table"][row];
        const auto players = std::to_string(r["players"].get<std::size_t>());
        txt << row << std::string(7 - std::string(row).size(), ' ') << players << std::string(9 - players.size(), ' ')
            << fmt(r["raw"]) << "  " << fmt(r["grand_mean"]) << "      " << fmt(r["rb"]) << "  " << fmt(r["shrunk_raw"])
            << "      " << fmt(r["shrunk_rb"]) << "\n";
    }
    txt << "\nspearman (first vs second half) and discrimination (first half)\n";
    for (const auto& [tag, v] : ev["spearman"].items())
        txt << tag << ": spearman raw " << fmt(v["raw"], 3) << ", rb " << fmt(v["rb"], 3) << "; discrimination raw "
            << fmt(ev["discrimination"][tag]["raw"], 3) << ", rb " << fmt(ev["discrimination"][tag]["rb"], 3) << "\n";
    txt << "\nestimator sd, " << ev["sd_class"].get<std::string>() << " first half (median)\n";
    for (const char* k : {"raw", "rb", "simulated_rb"}) {
        const auto& s = ev["sd_summaries"][k];
        txt << k << ": " << (s.contains("median") ? fmt(s["median"]) : std::string("n/a")) << "\n";
    }
    write_file(layout.report_dir() / "summary.txt", txt.str());

    CsvWriter fig4{"player_id", "n", "sd_raw", "sd_rb", "sd_simulated_rb"};
    for (const auto& r : ev["sd_players"]) {
        fig4.cell(r["player_id"].get<std::string>()).cell(r["n"].get<std::size_t>()).cell(r["sd_raw"].get<double>());
        fig4.cell(r["sd_rb"].get<double>()).cell(r["sd_simulated_rb"].get<double>());
        fig4.end_row();
    }
    write_file(layout.report_dir() / "fig4_sd.csv", fig4.str());

    CsvWriter fig5{"player_id", "n_first", "n_second", "target", "raw", "rb", "shrunk_rb", "err_raw", "err_rb",
                   "err_shrunk_rb"};
    for (const auto& r : ev["errors_3PT"]) {
        const double t = r["target"].get<double>();
        fig5.cell(r["player_id"].get<std::string>()).cell(r["n_first"].get<std::size_t>()).cell(r["n_second"].get<std::size_t>());
        fig5.cell(t);
        for (const char* k : {"raw", "rb", "shrunk_rb"}) fig5.cell(r[k].get<double>());
        for (const char* k : {"raw", "rb", "shrunk_rb"}) fig5.cell(std::abs(r[k].get<double>() - t));
        fig5.end_row();
    }
    write_file(layout.report_dir() / "fig5_errors.csv", fig5.str());

    CsvWriter fig6{"class", "estimator", "fraction", "rmse", "mean_players"};
    for (const auto& [tag, kinds] : ev["rmse_curves"].items())
        for (const auto& [kind, pts] : kinds.items())
            for (const auto& p : pts) {
                fig6.cell(tag).cell(kind).cell(p["fraction"].get<double>());
                if (p["rmse"].is_null())
                    fig6.cell("");
                else
                    fig6.cell(p["rmse"].get<double>());
                fig6.cell(p["mean_players"].get<double>());
                fig6.end_row();
            }
    write_file(layout.report_dir() / "fig6_rmse.csv", fig6.str());
}

void write_manifest(const fs::path& artifact_dir) {
    const ArtifactLayout layout{artifact_dir};
    std::vector<std::string> rel;
    for (const auto& e : fs::recursive_directory_iterator(artifact_dir)) {
        if (!e.is_regular_file()) continue;
        const auto r = fs::relative(e.path(), artifact_dir).generic_string();
        if (r == "manifest.json" || r.rfind("cache/", 0) == 0 || e.path().extension() == ".tmp") continue;
        rel.push_back(r);
    }
    std::sort(rel.begin(), rel.end());
    json files = json::array();
    for (const auto& r : rel) {
        const auto content = read_file(artifact_dir / r);
        files.push_back({{"path", r}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }
    write_file(layout.manifest(), dump_json({{"format_version", kFormatVersion}, {"files", files}}));
}

fs::path run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw StageError("config", e.code(), e.what());
    }
    const ArtifactLayout layout{cfg.out};
    fs::create_directories(layout.root);
    // The output location is not part of the experiment, so it is left out
    // of the recorded config to keep artifacts comparable across directories.
    std::string text;
    std::istringstream all(cfg.to_text());
    for (std::string line; std::getline(all, line);)
        if (line.rfind("out ", 0) != 0) text += line + "\n";
    write_file(layout.config(), text);

    stage_simulate(cfg, opts);
    stage_ingest(cfg, opts);
    stage_fit(cfg, opts);
    stage_train(cfg, opts);
    stage_estimate(cfg, opts);
    stage_evaluate(cfg, opts);
    try {
        emit_report(layout.root);
        write_manifest(layout.root);
    } catch (const Error& e) {
        throw StageError("report", e.code(), e.what());
    }
    log_line(opts, "run-all", "artifacts in " + layout.root.string());
    return layout.root;
}

}  // namespace shotrb
