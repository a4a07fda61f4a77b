// Command line front end: scan, analyze, pipeline, validate-config, show-manifest.

#include "zngauge/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace zngauge;

namespace {

struct Overrides {
    std::string config;
    std::string output;
    int workers = 0;
    std::string engine;
    bool dry_run = false;
};

ExperimentConfig load(const Overrides &o) {
    auto c = ExperimentConfig::load(o.config);
    if(!o.output.empty()) {
        // a command-line directory is relative to the working directory
        c.output.directory = std::filesystem::absolute(o.output).string();
    }
    if(o.workers > 0) c.workers = o.workers;
    if(o.engine == "ed") c.solver.engine = EngineChoice::ed;
    else if(o.engine == "dmrg") c.solver.engine = EngineChoice::dmrg;
    else if(o.engine == "auto") c.solver.engine = EngineChoice::automatic;
    c.validate();
    return c;
}

void print_progress(const PointResult &r, std::size_t done, std::size_t total) {
    const auto &row = r.row;
    std::fprintf(stderr, "[%zu/%zu] n=%d t=%.6g phi=%.6g L=%d chi=%d m=%.6g %s E=%.12g sigma=%.6g %s %.2fs%s%s\n", done, total, row.n, row.t, row.phi,
                 row.L, row.chi, row.m, row.engine.c_str(), row.energy, row.sigma, row.converged ? "ok" : "UNCONVERGED", r.seconds,
                 r.error.empty() ? "" : " error: ", r.error.c_str());
}

int dry_run(const ExperimentConfig &c) {
    const auto plan = plan_scan(c);
    std::printf("%zu points, output %s\n", plan.size(), c.resolve(c.output.directory).string().c_str());
    for(const auto &p : plan)
        std::printf("n=%d t=%.6g phi=%.6g k0=%d L=%d chi=%d m=%.6g %s dim=%zu provenance=%s\n", p.model.n, p.model.t, p.model.phi,
                    p.model.resolved_k0(), p.L, p.chi, p.m, p.engine.c_str(), sector_dimension(p.L), p.provenance.c_str());
    return 0;
}

int show_manifest(const Overrides &o) {
    std::filesystem::path dir;
    if(!o.output.empty()) dir = o.output;
    else {
        const auto c = ExperimentConfig::load(o.config);
        dir          = c.resolve(c.output.directory);
    }
    std::ifstream in(dir / "manifest.json");
    if(!in) throw std::runtime_error("no manifest in " + dir.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const auto m = RunManifest::from_json_text(ss.str());
    int failed   = 0;
    for(const auto &r : m.records) failed += r.converged ? 0 : 1;
    std::printf("config hash   %s\ncode version  %s\nwall clock    %.1f s\nsolver calls  %ld (last run)\nrecords       %zu (%d unconverged)\n",
                m.config_hash.c_str(), m.code_version.c_str(), m.wall_seconds, m.solver_invocations, m.records.size(), failed);
    for(const auto &r : m.records)
        if(!r.converged)
            std::printf("  unconverged: n=%d t=%.6g phi=%.6g L=%d chi=%d m=%.6g %s\n", r.key.n, r.key.t, r.key.phi, r.key.L, r.key.chi, r.key.m,
                        r.error.c_str());
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Z_n lattice gauge chain: scans, scaling analysis and continuum extrapolation"};
    app.require_subcommand(1);
    Overrides o;

    auto add_common = [&](CLI::App *cmd, bool solver_flags) {
        cmd->add_option("-c,--config", o.config, "experiment configuration (JSON)")->check(CLI::ExistingFile);
        cmd->add_option("-o,--output", o.output, "output directory (overrides output.directory)");
        if(solver_flags) {
            cmd->add_option("-w,--workers", o.workers, "concurrent points")->check(CLI::PositiveNumber);
            cmd->add_option("--engine", o.engine, "engine override")->check(CLI::IsMember({"ed", "dmrg", "auto"}));
            cmd->add_flag("--dry-run", o.dry_run, "print the planned points and exit");
        }
    };
    auto *scan     = app.add_subcommand("scan", "solve every (case, L, chi, m) point of the grid");
    auto *analyze  = app.add_subcommand("analyze", "run the analysis block on existing tables");
    auto *pipeline = app.add_subcommand("pipeline", "scan, then analyze");
    auto *validate = app.add_subcommand("validate-config", "check a configuration and print its canonical form");
    auto *manifest = app.add_subcommand("show-manifest", "summarize the manifest of an output directory");
    add_common(scan, true);
    add_common(analyze, true);
    add_common(pipeline, true);
    add_common(validate, false);
    add_common(manifest, false);
    for(auto *cmd : {scan, analyze, pipeline, validate}) cmd->get_option("--config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if(manifest->parsed()) {
            if(o.config.empty() && o.output.empty()) throw CLI::RequiredError("--config or --output");
            return show_manifest(o);
        }
        const auto config = load(o);
        if(validate->parsed()) {
            std::cout << config.to_json_text();
            std::fprintf(stderr, "ok: %zu cases, %zu planned points, hash %s\n", config.cases.size(), plan_scan(config).size(), config.hash().c_str());
            return 0;
        }
        if(o.dry_run && (scan->parsed() || pipeline->parsed())) return dry_run(config);
        if(scan->parsed()) {
            const auto out = run_scan(config, print_progress);
            std::fprintf(stderr, "%zu rows, %ld solved this run, %s\n", out.table.size(), out.manifest.solver_invocations,
                         out.all_converged ? "all converged" : "some rows UNCONVERGED");
            return out.all_converged ? 0 : 1;
        }
        const auto report = pipeline->parsed() ? run_pipeline(config, print_progress) : run_analysis(config, print_progress);
        std::cout << report.json;
        return report.all_converged ? 0 : 1;
    } catch(const ConfigError &e) {
        std::fprintf(stderr, "configuration error at %s\n", e.what());
        return 2;
    } catch(const CLI::Error &e) {
        return app.exit(e);
    } catch(const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
