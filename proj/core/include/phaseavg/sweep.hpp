#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "phaseavg/integrators.hpp"

namespace phaseavg {

enum class ModelKind { spring, kg, rswe };
enum class Method { phase_averaged, mean_corrected_classical, mean_corrected_local };

std::string to_string(ModelKind kind);
std::string to_string(Method method);  // "pa", "mc-classical", "mc-local"
ModelKind model_kind_from_string(const std::string& s);
Method method_from_string(const std::string& s);

/// Experiment description. JSON config files mirror these field names
/// exactly; list-valued fields also accept single scalars.
struct SweepConfig {
    std::string model = "spring";
    std::vector<std::string> method = {"pa"};
    std::vector<double> eps;  // PDE models; spring uses eps = 1
    std::vector<double> rho;  // spring resonance factors
    std::vector<double> dt;
    double T_max = 0.0;
    double zeta_start = 0.1;
    double zeta_stop = 2.0;
    double zeta_step = 0.1;
    double etaC_step = 0.0;  // 0 selects the model eps
    int etaC_count = 40;
    bool window_selection = false;  // two-step (eta*, eta_C*) procedure
    double ref_dt = 0.01;
    double gamma = 4.0;
    double P = 4.0;
    int K_min = 8;
    double C_tol = 1e-10;
    int N_x = 32;
    std::string out = "out";
    int workers = 1;
    bool include_slow = false;
    bool dry_run = false;
    bool timing = true;
    bool dump_traj = false;

    ModelKind kind() const;
    std::vector<Method> methods() const;
    /// The resolved sweep parameter values: rho for the spring, eps for the
    /// PDE models.
    std::vector<double> params() const;
    std::vector<double> zeta_values() const;
    double etaC_step_for(double param) const;
    KernelParams kernel_params() const;

    void validate() const;
};

SweepConfig preset_config(ModelKind kind, bool include_slow = false);
SweepConfig config_from_json_text(const std::string& text);
SweepConfig load_config(const std::filesystem::path& path);
std::string config_to_json_text(const SweepConfig& cfg);

/// One sweep cell outcome. Columns not applicable to a cell (rho for the
/// PDE models, eta_C and K_r outside the local method) stay empty in the
/// CSV.
struct ErrorRow {
    std::string model;
    std::string method;
    double eps = 1.0;
    double rho = std::numeric_limits<double>::quiet_NaN();
    double dt = 0.0;
    double zeta = 0.0;
    double eta = 0.0;
    double eta_C = std::numeric_limits<double>::quiet_NaN();
    int K_s = 0;
    int K_r = 0;
    double error = std::numeric_limits<double>::infinity();
    double wall_ms = 0.0;
    std::string status = "failed";
};

struct ErrorReport {
    std::vector<ErrorRow> rows;

    static const char* csv_header();
    void write_csv(std::ostream& os) const;
};

/// Mean over the sample times t_n (n >= 1) of the per-model norm of the
/// difference to the reference, which must be recorded on a grid the
/// trajectory's grid subsamples exactly:
///   spring — L2 over the three real coordinate positions,
///   kg     — L1 over the physical-space a field,
///   rswe   — L2 over all components' physical-space values.
double error_metric(const Trajectory& traj_u, const Trajectory& ref_u, ModelKind kind);

/// Run the configured method over the zeta grid for every (param, dt)
/// cell; failed cells report error = inf rather than aborting the sweep.
/// Requires a single-method config.
ErrorReport zeta_sweep(const SweepConfig& cfg);

struct WindowSelection {
    double param = 0.0;  // rho or eps
    double dt = 0.0;
    double zeta_star = 0.0;
    double eta_star = 0.0;
    double etaC_star = 0.0;
    double pa_error = 0.0;  // phase-averaged error at eta*
    double mc_error = 0.0;  // mean-corrected error at (eta*, eta_C*)
};

struct SelectWindowsResult {
    double eta_star = 0.0;
    double etaC_star = 0.0;
    ErrorReport report;
    WindowSelection selection;
};

/// Two-step window selection: (i) a phase-averaged zeta sweep picks eta*;
/// (ii) with eta* fixed, an eta_C sweep of the locally mean-corrected
/// method picks eta_C*. Ties break toward the smaller window. The config
/// must name a single (param, dt) cell and the mc-local method.
SelectWindowsResult select_windows(const SweepConfig& cfg);

struct ExperimentResult {
    ErrorReport report;
    std::vector<WindowSelection> selections;
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
    bool dry_run = false;
};

/// Full experiment driver: builds references once per (model, param),
/// runs every configured method (window selection where requested), and
/// writes results.csv plus a config.json sidecar into cfg.out.
ExperimentResult run_experiment(const SweepConfig& cfg);

/// Re-run one sweep cell in isolation with a fresh model and reference;
/// pass eta_C = NaN for methods without a mean-correction window.
ErrorRow run_single_cell(const SweepConfig& cfg, const std::string& method, double param,
                         double dt, double eta, double eta_c);

/// Work-pool helper used for sweep cells; body(i) must be pure per index.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace phaseavg
