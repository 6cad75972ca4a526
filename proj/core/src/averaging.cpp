#include "phaseavg/averaging.hpp"

#include <stdexcept>

namespace phaseavg {

namespace detail {

void averaged_rhs(const ModelSystem& model, const SpectralState& state, double t,
                  const AveragingKernel& kernel, const SpectralState* correction,
                  AveragingWorkspace& ws, SpectralState& out) {
    if (!same_shape(out, state)) out = SpectralState(state.n_fields(), state.n_modes());
    out.set_zero();

    const bool corrected = correction != nullptr;
    if (corrected) {
        // shift = eps * L^+ C and llc = L L^+ C are fixed for the whole
        // kernel sum; C is held constant across the stage evaluation.
        apply_block(model.linear_pinv(), *correction, ws.shift);
        scale_in_place(ws.shift, model.eps());
        apply_block(model.l_lpinv(), *correction, ws.llc);
    }

    for (int k = 0; k < kernel.size(); ++k) {
        const double ts = t + kernel.node(k);
        model.exp_op(ts, Sign::minus, ws.exp_block);
        apply_block(ws.exp_block, state, ws.mapped);
        if (corrected) add_in_place(ws.mapped, ws.shift);
        model.dissipated_nonlinear(ws.mapped, ws.nl);
        if (corrected) sub_in_place(ws.nl, ws.llc);
        model.exp_op(ts, Sign::plus, ws.exp_block);
        apply_block(ws.exp_block, ws.nl, ws.pushed);
        add_scaled(kernel.weight(k), ws.pushed, out);
    }
}

void local_mean_correction(const ModelSystem& model, const SpectralState& w, double t,
                           const AveragingKernel& kernel_c, AveragingWorkspace& ws,
                           SpectralState& out) {
    if (!same_shape(out, w)) out = SpectralState(w.n_fields(), w.n_modes());
    out.set_zero();
    for (int k = 0; k < kernel_c.size(); ++k) {
        model.exp_op(t + kernel_c.node(k), Sign::minus, ws.exp_block);
        apply_block(ws.exp_block, w, ws.mapped);
        model.nonlinear(ws.mapped, ws.nl);
        add_scaled(kernel_c.weight(k), ws.nl, out);
    }
}

}  // namespace detail

SpectralState modvar_rhs(const ModelSystem& model, const SpectralState& v, double t) {
    static const AveragingKernel degenerate = build_kernel(0.0, 4.0, 1);
    AveragingWorkspace ws;
    SpectralState out;
    detail::averaged_rhs(model, v, t, degenerate, nullptr, ws, out);
    return out;
}

SpectralState phase_averaged_rhs(const ModelSystem& model, const SpectralState& vbar,
                                 double t, const AveragingKernel& kernel) {
    AveragingWorkspace ws;
    SpectralState out;
    detail::averaged_rhs(model, vbar, t, kernel, nullptr, ws, out);
    return out;
}

MeanCorrection local_mean_correction(const ModelSystem& model, const SpectralState& w,
                                     double t, const AveragingKernel& kernel_c) {
    AveragingWorkspace ws;
    SpectralState c;
    detail::local_mean_correction(model, w, t, kernel_c, ws, c);
    return {std::move(c), MeanCorrectionStrategy::local(kernel_c.eta())};
}

SpectralState mean_corrected_rhs(const ModelSystem& model, const SpectralState& wbar,
                                 double t, const AveragingKernel& kernel,
                                 const SpectralState& c) {
    if (!same_shape(wbar, c))
        throw std::invalid_argument("mean_corrected_rhs: correction shape mismatch");
    AveragingWorkspace ws;
    SpectralState out;
    detail::averaged_rhs(model, wbar, t, kernel, &c, ws, out);
    return out;
}

}  // namespace phaseavg
