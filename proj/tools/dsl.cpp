// dsl: batch front-end for the delta-shock formation laboratory.
//
// Subcommands: tables, snapshot, limits, oracle-compare. Each takes a JSON
// run configuration and writes machine-readable CSV/JSON outputs; --check
// turns the documented tolerances into hard pass/fail.
//
// Exit codes: 0 success, 2 configuration error, 3 solver error,
// 4 tolerance violation in --check mode.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "dshock/commands.hpp"

namespace {

int run_command(const std::string& name, const std::string& config_path, bool check) {
    try {
        const dshock::RunConfig cfg = dshock::load_config(config_path);
        dshock::RunContext ctx(cfg);
        dshock::CheckFailures fails;
        if (name == "tables")
            fails = dshock::cmd_tables(ctx);
        else if (name == "snapshot")
            fails = dshock::cmd_snapshot(ctx);
        else if (name == "limits")
            fails = dshock::cmd_limits(ctx);
        else
            fails = dshock::cmd_oracle_compare(ctx);

        if (!fails.empty()) {
            for (const std::string& f : fails) std::fprintf(stderr, "check failed: %s\n", f.c_str());
            if (check) return 4;
        }
        return 0;
    } catch (const dshock::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const dshock::Error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delta-shock formation laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    bool check = false;

    for (const std::string name : {"tables", "snapshot", "limits", "oracle-compare"}) {
        CLI::App* sub = app.add_subcommand(
            name, name == "tables"        ? "emit switch and fast-variable tables"
                  : name == "snapshot"    ? "emit field snapshots and curve positions"
                  : name == "limits"      ? "emit point-mass and residual-scaling reports"
                                          : "compare fields against the closed-form reference");
        sub->add_option("--config", config_path, "path to the JSON run configuration")->required();
        sub->add_flag("--check", check, "turn documented tolerances into hard pass/fail");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();
    return run_command(name, config_path, check);
}
