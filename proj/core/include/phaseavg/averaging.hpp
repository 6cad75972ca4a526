#pragma once

#include "phaseavg/kernel.hpp"
#include "phaseavg/model.hpp"
#include "phaseavg/spectral.hpp"

namespace phaseavg {

/// How the mean correction C is obtained at each evaluation point.
struct MeanCorrectionStrategy {
    enum class Kind { none, classical, local };

    Kind kind = Kind::none;
    double eta_c = 0.0;  // window length for Kind::local

    static MeanCorrectionStrategy none() { return {Kind::none, 0.0}; }
    static MeanCorrectionStrategy classical() { return {Kind::classical, 0.0}; }
    static MeanCorrectionStrategy local(double eta_c) { return {Kind::local, eta_c}; }
};

/// A computed mean correction together with the strategy that produced it.
struct MeanCorrection {
    SpectralState c;
    MeanCorrectionStrategy strategy;
};

/// Scratch buffers for the kernel-point loop; one instance per integration
/// keeps the hot path allocation-free. Distinct evaluations may run on
/// distinct workspaces concurrently.
struct AveragingWorkspace {
    BlockOperator exp_block;
    SpectralState mapped;
    SpectralState nl;
    SpectralState pushed;
    SpectralState shift;
    SpectralState llc;
};

/// Unaveraged modulation-variable tendency
///   exp(+t L / eps) N*(exp(-t L / eps) V).
/// Shares the kernel-sum code path with phase_averaged_rhs via the
/// degenerate eta = 0 kernel, so the two agree bit-for-bit there.
SpectralState modvar_rhs(const ModelSystem& model, const SpectralState& v, double t);

/// Finite phase-average of the tendency:
///   sum_k w_k exp(+(t+s_k) L / eps) N*(exp(-(t+s_k) L / eps) Vbar),
/// accumulated in ascending node order.
SpectralState phase_averaged_rhs(const ModelSystem& model, const SpectralState& vbar,
                                 double t, const AveragingKernel& kernel);

/// Local mean correction, a windowed average of the bare nonlinearity:
///   C = sum_k w_k N(exp(-(t+r_k) L / eps) W).
/// No dissipation and no forward exponential enter here.
MeanCorrection local_mean_correction(const ModelSystem& model, const SpectralState& w,
                                     double t, const AveragingKernel& kernel_c);

/// Mean-corrected phase-averaged tendency:
///   sum_k w_k exp(+(t+s_k) L / eps)
///         [ N*(exp(-(t+s_k) L / eps) Wbar + eps L^+ C) - L L^+ C ].
SpectralState mean_corrected_rhs(const ModelSystem& model, const SpectralState& wbar,
                                 double t, const AveragingKernel& kernel,
                                 const SpectralState& c);

namespace detail {
/// Shared evaluator behind the three averaged tendencies. correction ==
/// nullptr selects the plain phase-averaged path.
void averaged_rhs(const ModelSystem& model, const SpectralState& state, double t,
                  const AveragingKernel& kernel, const SpectralState* correction,
                  AveragingWorkspace& ws, SpectralState& out);

void local_mean_correction(const ModelSystem& model, const SpectralState& w, double t,
                           const AveragingKernel& kernel_c, AveragingWorkspace& ws,
                           SpectralState& out);
}  // namespace detail

}  // namespace phaseavg
