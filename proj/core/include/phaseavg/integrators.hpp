#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaseavg/averaging.hpp"
#include "phaseavg/kernel.hpp"
#include "phaseavg/model.hpp"
#include "phaseavg/spectral.hpp"

namespace phaseavg {

/// Thrown when a trajectory leaves the finite range; carries a stiffness
/// diagnostic naming the time of failure.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when the mean-correction fixed-point iteration fails to reach
/// C_tol within the iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Coefficients of an explicit Runge-Kutta scheme. Row i of `a` holds the
/// i coefficients a_{i,0..i-1} (strictly lower triangular).
struct ButcherTableau {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    std::vector<double> c;

    int stages() const { return static_cast<int>(b.size()); }
    void validate() const;

    static ButcherTableau rk4();
};

enum class StateSpace { standard, modvar, meancor };

/// Uniformly sampled states from one integration. `dt` is the recording
/// interval (the coarse step times an optional stride).
struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralState> states;
    StateSpace space = StateSpace::standard;
    double dt = 0.0;

    std::size_t size() const { return states.size(); }
};

using RhsFn = std::function<void(const SpectralState&, double, SpectralState&)>;

/// One explicit Runge-Kutta step of the given tableau.
SpectralState rk_step(const ButcherTableau& tableau, const RhsFn& rhs,
                      const SpectralState& y, double t, double dt);

struct IntegrateOptions {
    /// Record every n-th step; reference solutions use a stride so that
    /// recorded times align with the coarse grids they are compared on.
    int record_every = 1;
};

/// RK4 on the standard equation dU/dt = -(1/eps) L U + N*(U). Only used
/// where dt resolves omega_max/eps (reference solutions).
Trajectory integrate_standard(const ModelSystem& model, const SpectralState& u0,
                              double dt, double t_end,
                              const IntegrateOptions& opt = {});

/// RK4 on the unaveraged modulation-variable system, V(0) = U0.
Trajectory integrate_modvar(const ModelSystem& model, const SpectralState& u0,
                            double dt, double t_end,
                            const IntegrateOptions& opt = {});

/// RK4 on the phase-averaged tendency with window eta, Vbar(0) = U0.
/// eta = 0 reproduces integrate_modvar bit-for-bit.
Trajectory integrate_phase_averaged(const ModelSystem& model, const SpectralState& u0,
                                    double dt, double t_end, double eta,
                                    const KernelParams& kernel_params = {},
                                    const IntegrateOptions& opt = {});

/// Evaluates the mean correction C(W, t) for a fixed strategy. Classical
/// corrections defer to the model; local ones carry their own kernel.
class MeanCorrector {
public:
    MeanCorrector(const ModelSystem& model, const MeanCorrectionStrategy& strategy,
                  const KernelParams& kernel_params);

    SpectralState operator()(const SpectralState& w, double t) const;
    void evaluate(const SpectralState& w, double t, AveragingWorkspace& ws,
                  SpectralState& out) const;

    const MeanCorrectionStrategy& strategy() const { return strategy_; }

    /// Node count K_r of the mean-correction kernel; zero for strategies
    /// that need no kernel.
    int k_r() const;

private:
    const ModelSystem* model_;
    MeanCorrectionStrategy strategy_;
    AveragingKernel kernel_;
};

struct InitMeanCorrected {
    SpectralState w0;
    SpectralState c0;
    int iterations = 0;  // number of C evaluations at candidate W0 values
};

/// Fixed-point iteration for the implicit initial condition
/// W(0) = U0 - eps L^+ C(W(0)), converged when the L1 change of C over all
/// entries drops to C_tol. Non-convergence raises ConvergenceError.
InitMeanCorrected init_mean_corrected(const ModelSystem& model, const SpectralState& u0,
                                      const MeanCorrector& corrector, double c_tol,
                                      int max_iter = 100);

/// Convenience overload computing a local correction with the given kernel.
InitMeanCorrected init_mean_corrected(const ModelSystem& model, const SpectralState& u0,
                                      const AveragingKernel& kernel_c, double c_tol,
                                      int max_iter = 100);

struct MeanCorrectedResult {
    Trajectory w;  // mean-corrected modulation variable Wbar
    Trajectory u;  // back-transformed standard-space solution
    int init_iterations = 0;
    long stage_corrections = 0;    // C evaluations at RK stages i != 1
    long endstep_corrections = 0;  // end-of-step C evaluations
};

/// The mean-corrected method: RK4 on the mean-corrected tendency with the
/// correction recomputed at every stage except the first, which reuses the
/// previous end-of-step value. Each step finishes by refreshing C at
/// (W^{n+1}, t^{n+1}) and back-transforming to the standard space.
MeanCorrectedResult integrate_mean_corrected(const ModelSystem& model,
                                             const SpectralState& u0, double dt,
                                             double t_end, double eta,
                                             const MeanCorrectionStrategy& strategy,
                                             const KernelParams& kernel_params = {},
                                             double c_tol = 1e-10,
                                             const IntegrateOptions& opt = {},
                                             int max_init_iter = 100);

/// U = exp(-t L / eps) W + eps L^+ C; pass c = nullptr for the plain
/// modulation-variable back-transform.
SpectralState back_transform(const ModelSystem& model, const SpectralState& w, double t,
                             const SpectralState* c = nullptr);

/// Number of whole steps of size dt fitting into [0, t_end].
long step_count(double dt, double t_end);

}  // namespace phaseavg
