#include "phaseavg/integrators.hpp"

#include <cmath>
#include <utility>

namespace phaseavg {

void ButcherTableau::validate() const {
    const int m = stages();
    if (m < 1 || static_cast<int>(a.size()) != m || static_cast<int>(c.size()) != m)
        throw std::invalid_argument("ButcherTableau: inconsistent sizes");
    double bsum = 0.0;
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(a[i].size()) != i)
            throw std::invalid_argument("ButcherTableau: a must be strictly lower triangular");
        bsum += b[i];
        double csum = 0.0;
        for (double v : a[i]) csum += v;
        if (std::abs(csum - c[i]) > 1e-14)
            throw std::invalid_argument("ButcherTableau: c_i != sum_j a_ij");
    }
    if (std::abs(bsum - 1.0) > 1e-14)
        throw std::invalid_argument("ButcherTableau: weights must sum to one");
}

ButcherTableau ButcherTableau::rk4() {
    ButcherTableau t;
    t.a = {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}};
    t.b = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    t.c = {0.0, 0.5, 0.5, 1.0};
    return t;
}

long step_count(double dt, double t_end) {
    if (!(dt > 0.0) || !(t_end >= 0.0))
        throw std::invalid_argument("step_count: need dt > 0 and t_end >= 0");
    return static_cast<long>(std::floor(t_end / dt + 1e-9));
}

namespace {

[[noreturn]] void throw_nonfinite(const std::string& what, double t) {
    throw IntegrationError(what + ": non-finite state at t = " + std::to_string(t) +
                           "; the configuration is too stiff for this step "
                           "size / averaging window");
}

/// Shared explicit RK stepping loop. `rhs(y, t, out)` must not alias its
/// arguments.
template <class Rhs>
Trajectory run_rk(const SpectralState& y0, double dt, double t_end, StateSpace space,
                  Rhs&& rhs, const IntegrateOptions& opt, const std::string& what) {
    if (opt.record_every < 1)
        throw std::invalid_argument(what + ": record_every must be >= 1");
    const ButcherTableau tab = ButcherTableau::rk4();
    const int m = tab.stages();
    const long n_steps = step_count(dt, t_end);

    Trajectory traj;
    traj.space = space;
    traj.dt = dt * opt.record_every;
    traj.times.reserve(n_steps / opt.record_every + 1);
    traj.states.reserve(n_steps / opt.record_every + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(y0);

    SpectralState y = y0;
    std::vector<SpectralState> f(m);
    SpectralState ystage;

    for (long n = 0; n < n_steps; ++n) {
        const double tn = static_cast<double>(n) * dt;
        for (int i = 0; i < m; ++i) {
            ystage = y;
            for (int j = 0; j < i; ++j)
                if (tab.a[i][j] != 0.0) add_scaled(dt * tab.a[i][j], f[j], ystage);
            rhs(ystage, tn + tab.c[i] * dt, f[i]);
        }
        for (int i = 0; i < m; ++i) add_scaled(dt * tab.b[i], f[i], y);
        if (!all_finite(y)) throw_nonfinite(what, tn + dt);
        if ((n + 1) % opt.record_every == 0) {
            traj.times.push_back(static_cast<double>(n + 1) * dt);
            traj.states.push_back(y);
        }
    }
    return traj;
}

}  // namespace

SpectralState rk_step(const ButcherTableau& tableau, const RhsFn& rhs,
                      const SpectralState& y, double t, double dt) {
    tableau.validate();
    const int m = tableau.stages();
    std::vector<SpectralState> f(m);
    SpectralState ystage;
    for (int i = 0; i < m; ++i) {
        ystage = y;
        for (int j = 0; j < i; ++j)
            if (tableau.a[i][j] != 0.0) add_scaled(dt * tableau.a[i][j], f[j], ystage);
        rhs(ystage, t + tableau.c[i] * dt, f[i]);
    }
    SpectralState out = y;
    for (int i = 0; i < m; ++i) add_scaled(dt * tableau.b[i], f[i], out);
    return out;
}

Trajectory integrate_standard(const ModelSystem& model, const SpectralState& u0,
                              double dt, double t_end, const IntegrateOptions& opt) {
    SpectralState lu;
    auto rhs = [&](const SpectralState& y, double, SpectralState& out) {
        model.dissipated_nonlinear(y, out);
        apply_block(model.linear_op(), y, lu);
        add_scaled(-1.0 / model.eps(), lu, out);
    };
    return run_rk(u0, dt, t_end, StateSpace::standard, rhs, opt,
                  "integrate_standard");
}

Trajectory integrate_modvar(const ModelSystem& model, const SpectralState& u0, double dt,
                            double t_end, const IntegrateOptions& opt) {
    const AveragingKernel kernel = build_kernel(0.0, 4.0, 1);
    AveragingWorkspace ws;
    auto rhs = [&](const SpectralState& y, double t, SpectralState& out) {
        detail::averaged_rhs(model, y, t, kernel, nullptr, ws, out);
    };
    return run_rk(u0, dt, t_end, StateSpace::modvar, rhs, opt, "integrate_modvar");
}

Trajectory integrate_phase_averaged(const ModelSystem& model, const SpectralState& u0,
                                    double dt, double t_end, double eta,
                                    const KernelParams& kernel_params,
                                    const IntegrateOptions& opt) {
    const AveragingKernel kernel =
        build_kernel_for(eta, model.omega_max(), model.eps(), kernel_params);
    AveragingWorkspace ws;
    auto rhs = [&](const SpectralState& y, double t, SpectralState& out) {
        detail::averaged_rhs(model, y, t, kernel, nullptr, ws, out);
    };
    return run_rk(u0, dt, t_end, StateSpace::modvar, rhs, opt,
                  "integrate_phase_averaged");
}

MeanCorrector::MeanCorrector(const ModelSystem& model,
                             const MeanCorrectionStrategy& strategy,
                             const KernelParams& kernel_params)
    : model_(&model),
      strategy_(strategy),
      kernel_(strategy.kind == MeanCorrectionStrategy::Kind::local
                  ? build_kernel_for(strategy.eta_c, model.omega_max(), model.eps(),
                                     kernel_params)
                  : build_kernel(0.0, kernel_params.gamma, 1)) {
    if (strategy.kind == MeanCorrectionStrategy::Kind::classical &&
        !model.has_classical_correction())
        throw std::invalid_argument(model.name() +
                                    ": classical mean correction requested but not defined");
    if (strategy.kind == MeanCorrectionStrategy::Kind::local && !(strategy.eta_c >= 0.0))
        throw std::invalid_argument("MeanCorrector: eta_C must be >= 0");
}

void MeanCorrector::evaluate(const SpectralState& w, double t, AveragingWorkspace& ws,
                             SpectralState& out) const {
    switch (strategy_.kind) {
        case MeanCorrectionStrategy::Kind::none:
            if (!same_shape(out, w)) out = SpectralState(w.n_fields(), w.n_modes());
            out.set_zero();
            return;
        case MeanCorrectionStrategy::Kind::classical:
            out = model_->classical_correction(w);
            return;
        case MeanCorrectionStrategy::Kind::local:
            detail::local_mean_correction(*model_, w, t, kernel_, ws, out);
            return;
    }
}

SpectralState MeanCorrector::operator()(const SpectralState& w, double t) const {
    AveragingWorkspace ws;
    SpectralState out;
    evaluate(w, t, ws, out);
    return out;
}

int MeanCorrector::k_r() const {
    return strategy_.kind == MeanCorrectionStrategy::Kind::local ? kernel_.size() : 0;
}

InitMeanCorrected init_mean_corrected(const ModelSystem& model, const SpectralState& u0,
                                      const MeanCorrector& corrector, double c_tol,
                                      int max_iter) {
    if (!(c_tol > 0.0)) throw std::invalid_argument("init_mean_corrected: C_tol must be > 0");

    AveragingWorkspace ws;
    SpectralState pinv_c;
    auto remap = [&](const SpectralState& c) {
        SpectralState w = u0;
        apply_block(model.linear_pinv(), c, pinv_c);
        add_scaled(-model.eps(), pinv_c, w);
        return w;
    };

    SpectralState c0 = corrector(u0, 0.0);
    SpectralState w0 = remap(c0);
    SpectralState c_new;
    corrector.evaluate(w0, 0.0, ws, c_new);
    int iterations = 1;
    while (l1_difference(c0, c_new) > c_tol) {
        if (iterations >= max_iter)
            throw ConvergenceError("init_mean_corrected: fixed point not converged after " +
                                   std::to_string(max_iter) + " iterations");
        ++iterations;
        c0 = c_new;
        w0 = remap(c0);
        corrector.evaluate(w0, 0.0, ws, c_new);
    }
    return {std::move(w0), std::move(c_new), iterations};
}

InitMeanCorrected init_mean_corrected(const ModelSystem& model, const SpectralState& u0,
                                      const AveragingKernel& kernel_c, double c_tol,
                                      int max_iter) {
    if (!(c_tol > 0.0)) throw std::invalid_argument("init_mean_corrected: C_tol must be > 0");
    AveragingWorkspace ws;
    SpectralState pinv_c;
    auto remap = [&](const SpectralState& c) {
        SpectralState w = u0;
        apply_block(model.linear_pinv(), c, pinv_c);
        add_scaled(-model.eps(), pinv_c, w);
        return w;
    };
    SpectralState c0;
    detail::local_mean_correction(model, u0, 0.0, kernel_c, ws, c0);
    SpectralState w0 = remap(c0);
    SpectralState c_new;
    detail::local_mean_correction(model, w0, 0.0, kernel_c, ws, c_new);
    int iterations = 1;
    while (l1_difference(c0, c_new) > c_tol) {
        if (iterations >= max_iter)
            throw ConvergenceError("init_mean_corrected: fixed point not converged after " +
                                   std::to_string(max_iter) + " iterations");
        ++iterations;
        c0 = c_new;
        w0 = remap(c0);
        detail::local_mean_correction(model, w0, 0.0, kernel_c, ws, c_new);
    }
    return {std::move(w0), std::move(c_new), iterations};
}

SpectralState back_transform(const ModelSystem& model, const SpectralState& w, double t,
                             const SpectralState* c) {
    SpectralState u = apply_exp(model, t, Sign::minus, w);
    if (c != nullptr) {
        SpectralState pinv_c = apply_block(model.linear_pinv(), *c);
        add_scaled(model.eps(), pinv_c, u);
    }
    return u;
}

MeanCorrectedResult integrate_mean_corrected(const ModelSystem& model,
                                             const SpectralState& u0, double dt,
                                             double t_end, double eta,
                                             const MeanCorrectionStrategy& strategy,
                                             const KernelParams& kernel_params,
                                             double c_tol, const IntegrateOptions& opt,
                                             int max_init_iter) {
    if (opt.record_every < 1)
        throw std::invalid_argument("integrate_mean_corrected: record_every must be >= 1");
    const bool corrected = strategy.kind != MeanCorrectionStrategy::Kind::none;
    const AveragingKernel kernel =
        build_kernel_for(eta, model.omega_max(), model.eps(), kernel_params);
    const MeanCorrector corrector(model, strategy, kernel_params);
    const ButcherTableau tab = ButcherTableau::rk4();
    const int m = tab.stages();
    const long n_steps = step_count(dt, t_end);

    MeanCorrectedResult result;

    SpectralState w = u0;
    SpectralState c_cur;  // end-of-step correction, reused by the next stage 1
    if (corrected) {
        InitMeanCorrected init = init_mean_corrected(model, u0, corrector, c_tol,
                                                     max_init_iter);
        w = std::move(init.w0);
        c_cur = std::move(init.c0);
        result.init_iterations = init.iterations;
    }

    result.w.space = StateSpace::meancor;
    result.w.dt = dt * opt.record_every;
    result.u.space = StateSpace::standard;
    result.u.dt = result.w.dt;
    result.w.times.push_back(0.0);
    result.w.states.push_back(w);
    result.u.times.push_back(0.0);
    result.u.states.push_back(u0);

    AveragingWorkspace ws;
    AveragingWorkspace ws_corr;
    std::vector<SpectralState> f(m);
    SpectralState wstage;
    SpectralState c_stage;

    for (long n = 0; n < n_steps; ++n) {
        const double tn = static_cast<double>(n) * dt;
        for (int i = 0; i < m; ++i) {
            const double ti = tn + tab.c[i] * dt;
            wstage = w;
            for (int j = 0; j < i; ++j)
                if (tab.a[i][j] != 0.0) add_scaled(dt * tab.a[i][j], f[j], wstage);
            const SpectralState* c_i = nullptr;
            if (corrected) {
                if (i == 0) {
                    c_i = &c_cur;  // stage 1 reuses the previous end-of-step C
                } else {
                    corrector.evaluate(wstage, ti, ws_corr, c_stage);
                    ++result.stage_corrections;
                    c_i = &c_stage;
                }
            }
            detail::averaged_rhs(model, wstage, ti, kernel, c_i, ws, f[i]);
        }
        for (int i = 0; i < m; ++i) add_scaled(dt * tab.b[i], f[i], w);

        const double t_next = static_cast<double>(n + 1) * dt;
        if (!all_finite(w))
            throw IntegrationError("integrate_mean_corrected: non-finite state at t = " +
                                   std::to_string(t_next) +
                                   "; the configuration is too stiff for this step "
                                   "size / averaging window");
        if (corrected) {
            corrector.evaluate(w, t_next, ws_corr, c_cur);
            ++result.endstep_corrections;
        }
        if ((n + 1) % opt.record_every == 0) {
            result.w.times.push_back(t_next);
            result.w.states.push_back(w);
            result.u.times.push_back(t_next);
            result.u.states.push_back(
                back_transform(model, w, t_next, corrected ? &c_cur : nullptr));
        }
    }
    return result;
}

}  // namespace phaseavg
