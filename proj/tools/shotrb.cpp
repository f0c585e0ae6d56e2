// Command-line driver for the shot-quality pipeline.

#include <shotrb/pipeline.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    std::string out;
    std::vector<std::string> sets;
    bool no_cache = false;
    bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "Override the master seed");
    app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
    app->add_option("--out", c.out, "Artifact directory");
    app->add_option("--set", c.sets, "Override a config key, e.g. --set traj.method=ols");
    app->add_flag("--no-cache", c.no_cache, "Re-run stages even when their inputs are unchanged");
    app->add_flag("-q,--quiet", c.quiet, "No progress output");
}

shotrb::PipelineConfig build_config(const Common& c) {
    shotrb::PipelineConfig cfg;
    if (!c.config.empty()) cfg = shotrb::load_config(c.config);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw shotrb::Error(shotrb::ErrorCode::ConfigError, "--set expects key=value, got '" + s + "'");
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.out = c.out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shotrb: shot factors, make probabilities and Rao-Blackwellized shooting percentages"};
    app.require_subcommand(1);
    Common common;

    using StageFn = void (*)(const shotrb::PipelineConfig&, const shotrb::RunOptions&);
    const std::vector<std::tuple<const char*, const char*, StageFn>> stages = {
        {"simulate", "Generate a synthetic season (and training season)", shotrb::stage_simulate},
        {"ingest", "Validate shots and tracking files and report counts", shotrb::stage_ingest},
        {"fit-trajectories", "Fit trajectories and write shot factors", shotrb::stage_fit},
        {"train-model", "Train the per-class make-probability models", shotrb::stage_train},
        {"estimate", "Write shot probabilities and player estimates", shotrb::stage_estimate},
        {"evaluate", "Run the estimator comparison experiments", shotrb::stage_evaluate},
    };
    std::vector<std::pair<CLI::App*, StageFn>> stage_cmds;
    for (const auto& [name, help, fn] : stages) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, common);
        stage_cmds.emplace_back(sub, fn);
    }
    auto* report = app.add_subcommand("report", "Write the summary, report JSON, figure CSVs and manifest");
    add_common(report, common);
    auto* run_all = app.add_subcommand("run-all", "Run every stage in order");
    add_common(run_all, common);
    auto* print_config = app.add_subcommand("print-config", "Print every config key with its effective value");
    add_common(print_config, common);

    CLI11_PARSE(app, argc, argv);

    std::string stage = "config";
    try {
        auto cfg = build_config(common);
        shotrb::RunOptions opts;
        opts.jobs = common.jobs;
        opts.use_cache = !common.no_cache;
        opts.log = common.quiet ? nullptr : &std::cerr;

        if (print_config->parsed()) {
            std::cout << cfg.to_text();
            return 0;
        }
        cfg.validate();
        if (run_all->parsed()) {
            shotrb::run_pipeline(cfg, opts);
            return 0;
        }
        if (report->parsed()) {
            stage = "report";
            shotrb::emit_report(cfg.out);
            shotrb::write_manifest(cfg.out);
            return 0;
        }
        for (const auto& [sub, fn] : stage_cmds)
            if (sub->parsed()) fn(cfg, opts);
        return 0;
    } catch (const shotrb::StageError& e) {
        std::cerr << "shotrb: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "shotrb: [" << stage << "] " << e.what() << "\n";
        return stage == "config" ? 2 : 1;
    }
}
