#include "phaseavg/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "phaseavg/models/kg.hpp"
#include "phaseavg/models/rswe.hpp"
#include "phaseavg/models/spring.hpp"

namespace phaseavg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

long exact_ratio(double coarse, double fine, const char* what) {
    const long r = std::lround(coarse / fine);
    if (r < 1 || std::abs(static_cast<double>(r) * fine - coarse) >
                     1e-9 * std::max(1.0, std::abs(coarse)))
        throw std::invalid_argument(std::string(what) + ": " + fmt_short(fine) +
                                    " does not divide " + fmt_short(coarse));
    return r;
}

std::unique_ptr<ModelSystem> make_model(const SweepConfig& cfg, double param) {
    switch (cfg.kind()) {
        case ModelKind::spring: {
            SpringParams p;
            p.rho = param;
            return spring_model(p);
        }
        case ModelKind::kg: {
            KgParams p;
            p.eps = param;
            return kg_model(p, GridSpec(cfg.N_x));
        }
        case ModelKind::rswe: {
            RsweParams p;
            p.eps = param;
            return rswe_model(p, GridSpec(cfg.N_x));
        }
    }
    throw std::logic_error("make_model: unreachable");
}

Trajectory to_standard_space(const ModelSystem& model, const Trajectory& traj) {
    Trajectory u;
    u.space = StateSpace::standard;
    u.dt = traj.dt;
    u.times = traj.times;
    u.states.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        u.states.push_back(back_transform(model, traj.states[i], traj.times[i]));
    return u;
}

/// References are built once per (model, param) and shared read-only by
/// all sweep cells. The recording interval is the coarsest grid every
/// configured dt subsamples exactly.
class ReferenceCache {
public:
    ReferenceCache(const SweepConfig& cfg) : cfg_(cfg) {}

    void build() {
        const std::vector<double> params = cfg_.params();
        long record_every = 0;
        for (double dt : cfg_.dt) {
            const long r = exact_ratio(dt, cfg_.ref_dt, "reference grid");
            record_every = record_every == 0 ? r : std::gcd(record_every, r);
        }
        for (double p : params) models_.emplace(p, make_model(cfg_, p));

        std::vector<double> keys(params.begin(), params.end());
        refs_.resize(keys.size());
        parallel_for(static_cast<int>(keys.size()), cfg_.workers, [&](int i) {
            refs_[i] = build_one(*models_.at(keys[i]), record_every);
        });
        for (std::size_t i = 0; i < keys.size(); ++i) ref_index_[keys[i]] = i;
    }

    const Trajectory& reference(double param) const { return refs_[ref_index_.at(param)]; }
    const ModelSystem& model(double param) const { return *models_.at(param); }

private:
    Trajectory build_one(const ModelSystem& model, long record_every) const {
        IntegrateOptions opt;
        opt.record_every = static_cast<int>(record_every);
        if (cfg_.kind() == ModelKind::spring)
            return integrate_standard(model, model.initial_state(), cfg_.ref_dt,
                                      cfg_.T_max, opt);
        const Trajectory v = integrate_modvar(model, model.initial_state(), cfg_.ref_dt,
                                              cfg_.T_max, opt);
        return to_standard_space(model, v);
    }

    const SweepConfig& cfg_;
    std::map<double, std::unique_ptr<ModelSystem>> models_;
    std::map<double, std::size_t> ref_index_;
    std::vector<Trajectory> refs_;
};

struct CellOutcome {
    double error = kInf;
    double wall_ms = 0.0;
    bool ok = false;
};

CellOutcome run_cell(const ModelSystem& model, ModelKind kind, Method method, double dt,
                     double t_max, double eta, double eta_c, const KernelParams& kp,
                     double c_tol, const Trajectory& ref_u) {
    CellOutcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        Trajectory u_traj;
        if (method == Method::phase_averaged) {
            const Trajectory vbar =
                integrate_phase_averaged(model, model.initial_state(), dt, t_max, eta, kp);
            u_traj = to_standard_space(model, vbar);
        } else {
            const MeanCorrectionStrategy strategy =
                method == Method::mean_corrected_classical
                    ? MeanCorrectionStrategy::classical()
                    : MeanCorrectionStrategy::local(eta_c);
            MeanCorrectedResult res = integrate_mean_corrected(
                model, model.initial_state(), dt, t_max, eta, strategy, kp, c_tol);
            u_traj = std::move(res.u);
        }
        out.error = error_metric(u_traj, ref_u, kind);
        out.ok = true;
    } catch (const IntegrationError&) {
        // unstable (eta, dt) cell: report error = inf, keep sweeping
    } catch (const ConvergenceError&) {
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return out;
}

struct CellTask {
    Method method = Method::phase_averaged;
    double param = 0.0;
    double dt = 0.0;
    double zeta = 0.0;
    double eta = 0.0;
    double eta_c = kNaN;  // NaN: no mean-correction window
};

ErrorRow make_row(const SweepConfig& cfg, const ModelSystem& model, const CellTask& task,
                  const CellOutcome& outcome) {
    ErrorRow row;
    row.model = cfg.model;
    row.method = to_string(task.method);
    row.eps = model.eps();
    row.rho = cfg.kind() == ModelKind::spring ? task.param : kNaN;
    row.dt = task.dt;
    row.zeta = task.zeta;
    row.eta = task.eta;
    row.eta_C = task.eta_c;
    const KernelParams kp = cfg.kernel_params();
    row.K_s = sample_count(task.eta, model.omega_max(), model.eps(), kp.P, kp.K_min);
    row.K_r = std::isnan(task.eta_c)
                  ? 0
                  : sample_count(task.eta_c, model.omega_max(), model.eps(), kp.P, kp.K_min);
    row.error = outcome.error;
    row.wall_ms = cfg.timing ? outcome.wall_ms : 0.0;
    row.status = outcome.ok ? "ok" : "failed";
    return row;
}

std::vector<ErrorRow> run_tasks(const SweepConfig& cfg, const ReferenceCache& cache,
                                const std::vector<CellTask>& tasks) {
    const KernelParams kp = cfg.kernel_params();
    std::vector<CellOutcome> outcomes(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int i) {
        const CellTask& t = tasks[i];
        outcomes[i] = run_cell(cache.model(t.param), cfg.kind(), t.method, t.dt, cfg.T_max,
                               t.eta, t.eta_c, kp, cfg.C_tol, cache.reference(t.param));
    });
    std::vector<ErrorRow> rows;
    rows.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i)
        rows.push_back(make_row(cfg, cache.model(tasks[i].param), tasks[i], outcomes[i]));
    return rows;
}

/// zeta sweep rows for one method (eta_C = eta for the local method, the
/// cheap pairing used by the KG experiments).
std::vector<ErrorRow> sweep_rows(const SweepConfig& cfg, Method method,
                                 const ReferenceCache& cache) {
    std::vector<CellTask> tasks;
    for (double param : cfg.params())
        for (double dt : cfg.dt)
            for (double zeta : cfg.zeta_values()) {
                CellTask t;
                t.method = method;
                t.param = param;
                t.dt = dt;
                t.zeta = zeta;
                t.eta = zeta * dt;
                t.eta_c = method == Method::mean_corrected_local ? t.eta : kNaN;
                tasks.push_back(t);
            }
    return run_tasks(cfg, cache, tasks);
}

std::size_t best_row(const std::vector<ErrorRow>& rows, std::size_t begin,
                     std::size_t end) {
    std::size_t best = begin;
    for (std::size_t i = begin; i < end; ++i)
        if (rows[i].error < rows[best].error) best = i;  // ties keep the smaller window
    return best;
}

/// The two-step (eta*, eta_C*) procedure for one (param, dt) cell.
std::pair<std::vector<ErrorRow>, WindowSelection> select_rows(const SweepConfig& cfg,
                                                              double param, double dt,
                                                              const ReferenceCache& cache) {
    // Step (i): standard phase-averaged sweep over zeta picks eta*.
    std::vector<CellTask> pa_tasks;
    for (double zeta : cfg.zeta_values()) {
        CellTask t;
        t.method = Method::phase_averaged;
        t.param = param;
        t.dt = dt;
        t.zeta = zeta;
        t.eta = zeta * dt;
        pa_tasks.push_back(t);
    }
    std::vector<ErrorRow> rows = run_tasks(cfg, cache, pa_tasks);
    const std::size_t pa_best = best_row(rows, 0, rows.size());
    if (std::isinf(rows[pa_best].error))
        throw std::runtime_error("select_windows: every phase-averaged cell failed");

    WindowSelection sel;
    sel.param = param;
    sel.dt = dt;
    sel.zeta_star = rows[pa_best].zeta;
    sel.eta_star = rows[pa_best].eta;
    sel.pa_error = rows[pa_best].error;

    // Step (ii): fix eta* and sweep the mean-correction window.
    const double step = cfg.etaC_step_for(param);
    std::vector<CellTask> mc_tasks;
    for (int i = 1; i <= cfg.etaC_count; ++i) {
        CellTask t;
        t.method = Method::mean_corrected_local;
        t.param = param;
        t.dt = dt;
        t.zeta = sel.zeta_star;
        t.eta = sel.eta_star;
        t.eta_c = step * i;
        mc_tasks.push_back(t);
    }
    const std::size_t mc_begin = rows.size();
    std::vector<ErrorRow> mc = run_tasks(cfg, cache, mc_tasks);
    rows.insert(rows.end(), mc.begin(), mc.end());
    const std::size_t mc_best = best_row(rows, mc_begin, rows.size());
    if (std::isinf(rows[mc_best].error))
        throw std::runtime_error("select_windows: every mean-corrected cell failed");
    sel.etaC_star = rows[mc_best].eta_C;
    sel.mc_error = rows[mc_best].error;
    return {std::move(rows), sel};
}

void dump_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "t,field,mode,re,im\n";
    for (std::size_t n = 0; n < traj.size(); ++n)
        for (int f = 0; f < traj.states[n].n_fields(); ++f)
            for (int j = 0; j < traj.states[n].n_modes(); ++j)
                os << fmt_double(traj.times[n]) << ',' << f << ',' << j << ','
                   << fmt_double(traj.states[n](f, j).real()) << ','
                   << fmt_double(traj.states[n](f, j).imag()) << '\n';
}

/// At each method's best window, write the modulation-space and
/// standard-space trajectories for offline comparison plots.
void dump_best_trajectories(const SweepConfig& cfg, const ReferenceCache& cache,
                            const ErrorReport& report,
                            const std::filesystem::path& dir) {
    struct Key {
        std::string method;
        double param, dt;
        bool operator<(const Key& o) const {
            return std::tie(method, param, dt) < std::tie(o.method, o.param, o.dt);
        }
    };
    std::map<Key, const ErrorRow*> best;
    for (const ErrorRow& row : report.rows) {
        if (row.status != "ok") continue;
        const double param = cfg.kind() == ModelKind::spring ? row.rho : row.eps;
        Key key{row.method, param, row.dt};
        auto it = best.find(key);
        if (it == best.end() || row.error < it->second->error) best[key] = &row;
    }
    const KernelParams kp = cfg.kernel_params();
    for (const auto& [key, row] : best) {
        const ModelSystem& model = cache.model(key.param);
        const std::string tag = cfg.model + "_" + key.method + "_p" + fmt_short(key.param) +
                                "_dt" + fmt_short(key.dt);
        Trajectory mod;
        Trajectory std_traj;
        if (method_from_string(key.method) == Method::phase_averaged) {
            mod = integrate_phase_averaged(model, model.initial_state(), key.dt, cfg.T_max,
                                           row->eta, kp);
            std_traj = to_standard_space(model, mod);
        } else {
            const MeanCorrectionStrategy strategy =
                method_from_string(key.method) == Method::mean_corrected_classical
                    ? MeanCorrectionStrategy::classical()
                    : MeanCorrectionStrategy::local(row->eta_C);
            MeanCorrectedResult res =
                integrate_mean_corrected(model, model.initial_state(), key.dt, cfg.T_max,
                                         row->eta, strategy, kp, cfg.C_tol);
            mod = std::move(res.w);
            std_traj = std::move(res.u);
        }
        dump_trajectory_csv(dir / ("traj_" + tag + "_mod.csv"), mod);
        dump_trajectory_csv(dir / ("traj_" + tag + "_std.csv"), std_traj);
    }
}

nlohmann::json config_to_json(const SweepConfig& cfg) {
    nlohmann::json j;
    j["model"] = cfg.model;
    j["method"] = cfg.method;
    j["eps"] = cfg.eps;
    j["rho"] = cfg.rho;
    j["dt"] = cfg.dt;
    j["T_max"] = cfg.T_max;
    j["zeta_start"] = cfg.zeta_start;
    j["zeta_stop"] = cfg.zeta_stop;
    j["zeta_step"] = cfg.zeta_step;
    j["etaC_step"] = cfg.etaC_step;
    j["etaC_count"] = cfg.etaC_count;
    j["window_selection"] = cfg.window_selection;
    j["ref_dt"] = cfg.ref_dt;
    j["gamma"] = cfg.gamma;
    j["P"] = cfg.P;
    j["K_min"] = cfg.K_min;
    j["C_tol"] = cfg.C_tol;
    j["N_x"] = cfg.N_x;
    j["out"] = cfg.out;
    j["workers"] = cfg.workers;
    j["include_slow"] = cfg.include_slow;
    j["dry_run"] = cfg.dry_run;
    j["timing"] = cfg.timing;
    j["dump_traj"] = cfg.dump_traj;
    return j;
}

std::vector<double> as_double_list(const nlohmann::json& v, const char* key) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_array()) {
        for (const auto& e : v) out.push_back(e.get<double>());
    } else {
        throw std::invalid_argument(std::string("config: ") + key +
                                    " must be a number or an array of numbers");
    }
    return out;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::spring: return "spring";
        case ModelKind::kg: return "kg";
        case ModelKind::rswe: return "rswe";
    }
    return "?";
}

std::string to_string(Method method) {
    switch (method) {
        case Method::phase_averaged: return "pa";
        case Method::mean_corrected_classical: return "mc-classical";
        case Method::mean_corrected_local: return "mc-local";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "spring") return ModelKind::spring;
    if (s == "kg") return ModelKind::kg;
    if (s == "rswe") return ModelKind::rswe;
    throw std::invalid_argument("unknown model '" + s + "' (expected spring|kg|rswe)");
}

Method method_from_string(const std::string& s) {
    if (s == "pa") return Method::phase_averaged;
    if (s == "mc-classical") return Method::mean_corrected_classical;
    if (s == "mc-local") return Method::mean_corrected_local;
    throw std::invalid_argument("unknown method '" + s +
                                "' (expected pa|mc-classical|mc-local)");
}

ModelKind SweepConfig::kind() const { return model_kind_from_string(model); }

std::vector<Method> SweepConfig::methods() const {
    std::vector<Method> out;
    for (const std::string& m : method) out.push_back(method_from_string(m));
    return out;
}

std::vector<double> SweepConfig::params() const {
    return kind() == ModelKind::spring ? rho : eps;
}

std::vector<double> SweepConfig::zeta_values() const {
    std::vector<double> out;
    const long n = static_cast<long>(std::floor((zeta_stop - zeta_start) / zeta_step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(zeta_start + i * zeta_step);
    return out;
}

double SweepConfig::etaC_step_for(double param) const {
    if (etaC_step > 0.0) return etaC_step;
    return kind() == ModelKind::spring ? 1.0 : param;  // Delta eta_C = eps
}

KernelParams SweepConfig::kernel_params() const { return {gamma, P, K_min}; }

void SweepConfig::validate() const {
    const ModelKind k = kind();
    if (method.empty()) throw std::invalid_argument("config: at least one method required");
    const std::vector<Method> ms = methods();
    if (k == ModelKind::rswe)
        for (Method m : ms)
            if (m == Method::mean_corrected_classical)
                throw std::invalid_argument(
                    "config: the rswe model has no classical mean correction");
    if (k == ModelKind::spring) {
        if (rho.empty()) throw std::invalid_argument("config: spring requires rho values");
    } else {
        if (eps.empty()) throw std::invalid_argument("config: PDE models require eps values");
        for (double e : eps) {
            if (!(e > 0.0) || e > 1.0)
                throw std::invalid_argument("config: eps must lie in (0, 1]");
            if (k == ModelKind::rswe && e < 0.005 && !include_slow)
                throw std::invalid_argument(
                    "config: rswe eps < 0.005 cells are gated behind include_slow");
        }
    }
    if (dt.empty()) throw std::invalid_argument("config: at least one dt required");
    for (double d : dt) {
        if (!(d > 0.0)) throw std::invalid_argument("config: dt must be positive");
        exact_ratio(d, ref_dt, "config: ref_dt");
    }
    if (!(T_max > 0.0)) throw std::invalid_argument("config: T_max must be positive");
    if (!(zeta_step > 0.0)) throw std::invalid_argument("config: zeta_step must be positive");
    if (!(zeta_start >= 0.0) || zeta_stop < zeta_start)
        throw std::invalid_argument("config: invalid zeta grid");
    if (etaC_count < 1) throw std::invalid_argument("config: etaC_count must be >= 1");
    if (etaC_step < 0.0) throw std::invalid_argument("config: etaC_step must be >= 0");
    if (!(C_tol > 0.0)) throw std::invalid_argument("config: C_tol must be positive");
    if (!(gamma > 0.0) || !(P > 0.0) || K_min < 1)
        throw std::invalid_argument("config: invalid kernel parameters");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (window_selection) {
        bool has_local = false;
        for (Method m : ms) has_local |= m == Method::mean_corrected_local;
        if (!has_local)
            throw std::invalid_argument(
                "config: window_selection requires the mc-local method");
    }
    GridSpec check(N_x);  // validates the power-of-two constraint
    (void)check;
}

SweepConfig preset_config(ModelKind kind, bool include_slow) {
    SweepConfig cfg;
    cfg.model = to_string(kind);
    cfg.include_slow = include_slow;
    switch (kind) {
        case ModelKind::spring:
            cfg.method = {"pa", "mc-classical"};
            cfg.rho = {1.5, 1.7, 1.95, 2.0, 2.2, 2.5};
            cfg.eps = {};
            cfg.dt = {0.5};
            cfg.T_max = 200.0;
            cfg.zeta_start = 0.1;
            cfg.zeta_stop = 2.0;
            cfg.zeta_step = 0.1;
            cfg.ref_dt = 0.01;
            cfg.out = "out/spring";
            break;
        case ModelKind::kg:
            cfg.method = {"pa", "mc-classical", "mc-local"};
            cfg.eps = {0.5, 0.1, 0.05};
            if (include_slow) cfg.eps.push_back(0.01);
            cfg.dt = {1.0, 2.0, 3.0};
            cfg.T_max = 20.0;
            cfg.zeta_start = 0.05;
            cfg.zeta_stop = 2.0;
            cfg.zeta_step = 0.05;
            cfg.ref_dt = 1e-4;
            cfg.out = "out/kg";
            break;
        case ModelKind::rswe:
            cfg.method = {"mc-local"};
            cfg.window_selection = true;
            cfg.eps = {0.5, 0.1, 0.05, 0.01};
            if (include_slow) cfg.eps.push_back(0.001);
            cfg.dt = {0.1, 0.2, 0.3};
            cfg.T_max = 10.0;
            cfg.zeta_start = 0.05;
            cfg.zeta_stop = 2.0;
            cfg.zeta_step = 0.05;
            cfg.ref_dt = 1e-4;
            cfg.out = "out/rswe";
            break;
    }
    return cfg;
}

SweepConfig config_from_json_text(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    SweepConfig cfg;
    if (j.contains("model")) cfg.model = j.at("model").get<std::string>();
    cfg = preset_config(model_kind_from_string(cfg.model));
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const nlohmann::json& v = it.value();
        if (key == "model") {
            cfg.model = v.get<std::string>();
        } else if (key == "method") {
            cfg.method.clear();
            if (v.is_string())
                cfg.method.push_back(v.get<std::string>());
            else
                for (const auto& e : v) cfg.method.push_back(e.get<std::string>());
        } else if (key == "eps") {
            cfg.eps = as_double_list(v, "eps");
        } else if (key == "rho") {
            cfg.rho = as_double_list(v, "rho");
        } else if (key == "dt") {
            cfg.dt = as_double_list(v, "dt");
        } else if (key == "T_max") {
            cfg.T_max = v.get<double>();
        } else if (key == "zeta_start") {
            cfg.zeta_start = v.get<double>();
        } else if (key == "zeta_stop") {
            cfg.zeta_stop = v.get<double>();
        } else if (key == "zeta_step") {
            cfg.zeta_step = v.get<double>();
        } else if (key == "etaC_step") {
            cfg.etaC_step = v.get<double>();
        } else if (key == "etaC_count") {
            cfg.etaC_count = v.get<int>();
        } else if (key == "window_selection") {
            cfg.window_selection = v.get<bool>();
        } else if (key == "ref_dt") {
            cfg.ref_dt = v.get<double>();
        } else if (key == "gamma") {
            cfg.gamma = v.get<double>();
        } else if (key == "P") {
            cfg.P = v.get<double>();
        } else if (key == "K_min") {
            cfg.K_min = v.get<int>();
        } else if (key == "C_tol") {
            cfg.C_tol = v.get<double>();
        } else if (key == "N_x") {
            cfg.N_x = v.get<int>();
        } else if (key == "out") {
            cfg.out = v.get<std::string>();
        } else if (key == "workers") {
            cfg.workers = v.get<int>();
        } else if (key == "include_slow") {
            cfg.include_slow = v.get<bool>();
        } else if (key == "dry_run") {
            cfg.dry_run = v.get<bool>();
        } else if (key == "timing") {
            cfg.timing = v.get<bool>();
        } else if (key == "dump_traj") {
            cfg.dump_traj = v.get<bool>();
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

SweepConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const SweepConfig& cfg) {
    return config_to_json(cfg).dump(2);
}

const char* ErrorReport::csv_header() {
    return "model,method,eps,rho,dt,zeta,eta,eta_C,K_s,K_r,error,wall_ms,status";
}

void ErrorReport::write_csv(std::ostream& os) const {
    os << csv_header() << '\n';
    for (const ErrorRow& r : rows) {
        os << r.model << ',' << r.method << ',' << fmt_double(r.eps) << ',';
        if (!std::isnan(r.rho)) os << fmt_double(r.rho);
        os << ',' << fmt_double(r.dt) << ',' << fmt_double(r.zeta) << ','
           << fmt_double(r.eta) << ',';
        if (!std::isnan(r.eta_C)) os << fmt_double(r.eta_C);
        os << ',' << r.K_s << ',';
        if (r.K_r > 0) os << r.K_r;
        os << ',' << fmt_double(r.error) << ',' << fmt_double(r.wall_ms) << ','
           << r.status << '\n';
    }
}

double error_metric(const Trajectory& traj_u, const Trajectory& ref_u, ModelKind kind) {
    if (traj_u.size() < 2) throw std::invalid_argument("error_metric: empty trajectory");
    if (!(traj_u.dt > 0.0) || !(ref_u.dt > 0.0))
        throw std::invalid_argument("error_metric: trajectories need recording intervals");
    const long stride = exact_ratio(traj_u.dt, ref_u.dt, "error_metric");
    if ((traj_u.size() - 1) * static_cast<std::size_t>(stride) > ref_u.size() - 1)
        throw std::invalid_argument("error_metric: reference too short");

    double sum = 0.0;
    const std::size_t samples = traj_u.size() - 1;
    for (std::size_t n = 1; n <= samples; ++n) {
        const SpectralState& a = traj_u.states[n];
        const SpectralState& b = ref_u.states[n * stride];
        if (!same_shape(a, b)) throw std::invalid_argument("error_metric: shape mismatch");
        switch (kind) {
            case ModelKind::spring: {
                double sq = 0.0;
                for (int f = 0; f < a.n_fields(); ++f) {
                    const double d = a(f, 0).real() - b(f, 0).real();
                    sq += d * d;
                }
                sum += std::sqrt(sq);
                break;
            }
            case ModelKind::kg: {
                std::vector<Complex> diff(a.n_modes());
                for (int j = 0; j < a.n_modes(); ++j) diff[j] = a(0, j) - b(0, j);
                const std::vector<Complex> phys = dft_inverse(diff);
                double l1 = 0.0;
                for (const Complex& v : phys) l1 += std::abs(v.real());
                sum += l1;
                break;
            }
            case ModelKind::rswe: {
                double sq = 0.0;
                std::vector<Complex> diff(a.n_modes());
                for (int f = 0; f < a.n_fields(); ++f) {
                    for (int j = 0; j < a.n_modes(); ++j) diff[j] = a(f, j) - b(f, j);
                    const std::vector<Complex> phys = dft_inverse(diff);
                    for (const Complex& v : phys) sq += v.real() * v.real();
                }
                sum += std::sqrt(sq);
                break;
            }
        }
    }
    return sum / static_cast<double>(samples);
}

ErrorReport zeta_sweep(const SweepConfig& cfg) {
    cfg.validate();
    if (cfg.method.size() != 1)
        throw std::invalid_argument("zeta_sweep: exactly one method expected");
    ReferenceCache cache(cfg);
    cache.build();
    ErrorReport report;
    report.rows = sweep_rows(cfg, cfg.methods().front(), cache);
    return report;
}

SelectWindowsResult select_windows(const SweepConfig& cfg) {
    cfg.validate();
    if (cfg.methods() != std::vector<Method>{Method::mean_corrected_local})
        throw std::invalid_argument("select_windows: method must be mc-local");
    if (cfg.params().size() != 1 || cfg.dt.size() != 1)
        throw std::invalid_argument("select_windows: single (param, dt) cell expected");
    ReferenceCache cache(cfg);
    cache.build();
    auto [rows, sel] = select_rows(cfg, cfg.params().front(), cfg.dt.front(), cache);
    SelectWindowsResult result;
    result.eta_star = sel.eta_star;
    result.etaC_star = sel.etaC_star;
    result.selection = sel;
    result.report.rows = std::move(rows);
    return result;
}

ExperimentResult run_experiment(const SweepConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    if (cfg.dry_run) {
        std::cout << config_to_json_text(cfg) << std::endl;
        result.dry_run = true;
        return result;
    }

    ReferenceCache cache(cfg);
    cache.build();

    for (Method method : cfg.methods()) {
        if (method == Method::mean_corrected_local && cfg.window_selection) {
            for (double param : cfg.params())
                for (double dt : cfg.dt) {
                    auto [rows, sel] = select_rows(cfg, param, dt, cache);
                    result.report.rows.insert(result.report.rows.end(), rows.begin(),
                                              rows.end());
                    result.selections.push_back(sel);
                }
        } else {
            std::vector<ErrorRow> rows = sweep_rows(cfg, method, cache);
            result.report.rows.insert(result.report.rows.end(), rows.begin(), rows.end());
        }
    }

    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    result.csv_path = dir / "results.csv";
    result.json_path = dir / "config.json";

    std::ofstream csv(result.csv_path);
    if (!csv) throw std::runtime_error("cannot write " + result.csv_path.string());
    result.report.write_csv(csv);

    nlohmann::json sidecar = config_to_json(cfg);
    if (!result.selections.empty()) {
        nlohmann::json sels = nlohmann::json::array();
        for (const WindowSelection& s : result.selections) {
            nlohmann::json e;
            e[cfg.kind() == ModelKind::spring ? "rho" : "eps"] = s.param;
            e["dt"] = s.dt;
            e["zeta_star"] = s.zeta_star;
            e["eta_star"] = s.eta_star;
            e["etaC_star"] = s.etaC_star;
            e["pa_error"] = s.pa_error;
            e["mc_error"] = s.mc_error;
            sels.push_back(e);
        }
        sidecar["selected_windows"] = sels;
    }
    std::ofstream json_out(result.json_path);
    if (!json_out) throw std::runtime_error("cannot write " + result.json_path.string());
    json_out << sidecar.dump(2) << '\n';

    if (cfg.dump_traj) dump_best_trajectories(cfg, cache, result.report, dir);
    return result;
}

ErrorRow run_single_cell(const SweepConfig& cfg, const std::string& method, double param,
                         double dt, double eta, double eta_c) {
    SweepConfig single = cfg;
    single.method = {method};
    if (single.kind() == ModelKind::spring)
        single.rho = {param};
    else
        single.eps = {param};
    single.dt = {dt};
    single.validate();
    ReferenceCache cache(single);
    cache.build();
    CellTask task;
    task.method = method_from_string(method);
    task.param = param;
    task.dt = dt;
    task.zeta = eta / dt;
    task.eta = eta;
    task.eta_c = eta_c;
    return run_tasks(single, cache, {task}).front();
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    pool.reserve(count);
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace phaseavg
