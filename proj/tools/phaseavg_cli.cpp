// Command-line driver for the phase-averaging experiment harness.
//
//   phaseavg run <config.json> [overrides]
//   phaseavg sweep --model spring|kg|rswe [options]
//
// `sweep` starts from the model's experiment preset and applies any flags
// on top; `run` reads a JSON config mirroring the SweepConfig field names.
#include <CLI11.hpp>

#include <iostream>

#include "phaseavg/sweep.hpp"

using namespace phaseavg;

namespace {

void report_summary(const ExperimentResult& result) {
    if (result.dry_run) return;
    std::cout << "rows written: " << result.report.rows.size() << '\n'
              << "csv:  " << result.csv_path.string() << '\n'
              << "json: " << result.json_path.string() << '\n';
    for (const WindowSelection& sel : result.selections)
        std::cout << "selected windows: param=" << sel.param << " dt=" << sel.dt
                  << " eta*=" << sel.eta_star << " etaC*=" << sel.etaC_star
                  << " pa_error=" << sel.pa_error << " mc_error=" << sel.mc_error
                  << '\n';
}

struct CommonFlags {
    std::string out;
    int workers = 0;
    bool dry_run = false;
    bool include_slow = false;
    bool no_timing = false;
    bool dump_traj = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_option("--workers", flags.workers, "Worker threads for sweep cells");
    cmd->add_flag("--dry-run", flags.dry_run, "Validate and echo the config only");
    cmd->add_flag("--include-slow", flags.include_slow,
                  "Enable the slow small-eps cells (rswe eps = 0.001)");
    cmd->add_flag("--no-timing", flags.no_timing,
                  "Write wall_ms = 0 for byte-reproducible CSV output");
    cmd->add_flag("--dump-traj", flags.dump_traj,
                  "Dump modulation/standard-space trajectories at best windows");
}

void apply_common(SweepConfig& cfg, const CommonFlags& flags) {
    if (!flags.out.empty()) cfg.out = flags.out;
    if (flags.workers > 0) cfg.workers = flags.workers;
    if (flags.dry_run) cfg.dry_run = true;
    if (flags.include_slow) cfg.include_slow = true;
    if (flags.no_timing) cfg.timing = false;
    if (flags.dump_traj) cfg.dump_traj = true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite phase-averaging experiments for oscillatory multiscale systems"};
    app.require_subcommand(1);

    // --- run ---
    std::string config_path;
    CommonFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment from a JSON config");
    run_cmd->add_option("config", config_path, "JSON config file")->required();
    add_common(run_cmd, run_flags);

    // --- sweep ---
    std::string model;
    std::vector<std::string> methods;
    std::vector<double> eps, rho, dts;
    double t_max = 0.0, zeta_start = -1.0, zeta_stop = -1.0, zeta_step = -1.0;
    double etaC_step = -1.0, ref_dt = -1.0, gamma = -1.0, samples = -1.0, c_tol = -1.0;
    int etaC_count = -1, k_min = -1, n_x = -1;
    bool select = false;
    CommonFlags sweep_flags;

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Run a window sweep from the model preset");
    sweep_cmd->add_option("--model", model, "spring | kg | rswe")->required();
    sweep_cmd->add_option("--method", methods, "pa | mc-classical | mc-local (repeatable)");
    sweep_cmd->add_option("--eps", eps, "Timescale separation values (PDE models)");
    sweep_cmd->add_option("--rho", rho, "Resonance factors (spring)");
    sweep_cmd->add_option("--dt", dts, "Coarse step sizes");
    sweep_cmd->add_option("--T", t_max, "Total simulation time");
    sweep_cmd->add_option("--zeta-start", zeta_start, "First normalised window");
    sweep_cmd->add_option("--zeta-stop", zeta_stop, "Last normalised window");
    sweep_cmd->add_option("--zeta-step", zeta_step, "Normalised window increment");
    sweep_cmd->add_option("--etaC-step", etaC_step,
                          "Mean-correction window increment (default: eps)");
    sweep_cmd->add_option("--etaC-count", etaC_count, "Mean-correction window count");
    sweep_cmd->add_option("--ref-dt", ref_dt, "Reference integrator step");
    sweep_cmd->add_option("--gamma", gamma, "Kernel decay rate");
    sweep_cmd->add_option("--P", samples, "Samples per fastest period");
    sweep_cmd->add_option("--K-min", k_min, "Minimum kernel node count");
    sweep_cmd->add_option("--C-tol", c_tol, "Fixed-point tolerance for W(0)");
    sweep_cmd->add_option("--nx", n_x, "Grid points (power of two)");
    sweep_cmd->add_flag("--select-windows", select,
                        "Two-step (eta*, eta_C*) selection for mc-local");
    add_common(sweep_cmd, sweep_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        SweepConfig cfg;
        if (*run_cmd) {
            cfg = load_config(config_path);
            apply_common(cfg, run_flags);
        } else {
            cfg = preset_config(model_kind_from_string(model), sweep_flags.include_slow);
            if (!methods.empty()) cfg.method = methods;
            if (!eps.empty()) cfg.eps = eps;
            if (!rho.empty()) cfg.rho = rho;
            if (!dts.empty()) cfg.dt = dts;
            if (t_max > 0.0) cfg.T_max = t_max;
            if (zeta_start >= 0.0) cfg.zeta_start = zeta_start;
            if (zeta_stop >= 0.0) cfg.zeta_stop = zeta_stop;
            if (zeta_step > 0.0) cfg.zeta_step = zeta_step;
            if (etaC_step >= 0.0) cfg.etaC_step = etaC_step;
            if (etaC_count > 0) cfg.etaC_count = etaC_count;
            if (ref_dt > 0.0) cfg.ref_dt = ref_dt;
            if (gamma > 0.0) cfg.gamma = gamma;
            if (samples > 0.0) cfg.P = samples;
            if (k_min > 0) cfg.K_min = k_min;
            if (c_tol > 0.0) cfg.C_tol = c_tol;
            if (n_x > 0) cfg.N_x = n_x;
            if (select) cfg.window_selection = true;
            apply_common(cfg, sweep_flags);
        }
        const ExperimentResult result = run_experiment(cfg);
        report_summary(result);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
