// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: reproduces the impedance-map norm tables, composite-map
// norms, Schwarz iteration counts, 1-d nilpotency checks, operator-algebra
// identities and the finite-element validation sweep from config files, with
// CSV outputs and a run manifest.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "helmdd/experiments.hpp"
#include "helmdd/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t max_dofs = 500000;
    std::string dump_mesh;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--max-dofs", args.max_dofs, "resource guard on the dof count");
    cmd->add_option("--dump-mesh", args.dump_mesh, "write the first mesh built to this path");
}

int run(const CommonArgs& args, const std::set<helmdd::ExperimentKind>& allowed,
        const char* command, bool force_gmres) {
    using namespace helmdd;
    try {
        const Config cfg = Config::parse_file(args.config_path);
        ExperimentConfig e = parse_experiment(cfg);
        if (!allowed.count(e.kind)) {
            std::fprintf(stderr, "error: kind '%s' is not valid for command '%s'\n",
                         experiment_kind_name(e.kind).c_str(), command);
            return 2;
        }
        if (force_gmres) e.solver = "gmres";
        RunOptions opts;
        opts.out_dir = args.out_dir;
        if (args.seed_set) opts.seed_override = args.seed;
        opts.max_dofs = args.max_dofs;
        opts.dump_mesh_path = args.dump_mesh;
        return run_experiment(e, opts);
    } catch (const ConfigError& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 2;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using helmdd::ExperimentKind;
    CLI::App app{std::string(helmdd::version_string) +
                 " - Helmholtz overlapping Schwarz experiments"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        std::set<ExperimentKind> kinds;
        bool force_gmres = false;
    };
    const Sub subs[] = {
        {"impmap", "impedance-to-impedance map norms (rho, gamma)",
         {ExperimentKind::ImpMapTable}},
        {"zeta", "composite impedance-map norms zeta_N", {ExperimentKind::ZetaTable}},
        {"iterate", "Schwarz fixed-point iteration counts",
         {ExperimentKind::StripIterate, ExperimentKind::CheckerboardIterate,
          ExperimentKind::MetisIterate}},
        {"gmres", "preconditioned GMRES iteration counts",
         {ExperimentKind::StripIterate, ExperimentKind::CheckerboardIterate,
          ExperimentKind::MetisIterate},
         true},
        {"oned", "exact 1-d nilpotency verification", {ExperimentKind::OnedVerify}},
        {"algebra", "monomial-expansion identities and bounds", {ExperimentKind::AlgebraVerify}},
        {"femcheck", "plane-wave convergence and trace-isometry diagnostics",
         {ExperimentKind::FemConvergence}},
    };

    CommonArgs args[std::size(subs)];
    CLI::App* cmds[std::size(subs)];
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        cmds[i] = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmds[i], args[i]);
    }

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < std::size(subs); ++i)
        if (cmds[i]->parsed()) return run(args[i], subs[i].kinds, subs[i].name, subs[i].force_gmres);
    return 2;
}
