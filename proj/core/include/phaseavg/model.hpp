#pragma once

#include <string>

#include "phaseavg/spectral.hpp"

namespace phaseavg {

enum class Sign { plus, minus };

/// An oscillatory multiscale system dU/dt + (1/eps) L U = N(U) in spectral
/// form. Implementations supply the block-diagonal linear operator L, its
/// (pseudo)inverse, the analytic matrix exponential exp(+-t L / eps), the
/// nonlinearity N (plus a dissipation-augmented N* where the model needs
/// one), and the standard initial condition.
///
/// Models are immutable after construction; all evaluations are pure and
/// safe to call concurrently.
class ModelSystem {
public:
    virtual ~ModelSystem() = default;

    virtual std::string name() const = 0;
    virtual int n_fields() const = 0;
    virtual int n_modes() const = 0;

    /// Timescale separation parameter in (0, 1].
    virtual double eps() const = 0;

    /// Fastest |eigenvalue| of L, used by the kernel node-count rule.
    virtual double omega_max() const = 0;

    virtual const BlockOperator& linear_op() const = 0;

    /// L^-1, or the Moore-Penrose pseudoinverse L^+ when L is singular.
    virtual const BlockOperator& linear_pinv() const = 0;

    /// L L^-1: the identity for invertible L, the explicit projector for
    /// singular L.
    virtual const BlockOperator& l_lpinv() const = 0;

    /// exp(sign * t L / eps) as per-mode blocks, written into out.
    virtual void exp_op(double t, Sign sign, BlockOperator& out) const = 0;
    BlockOperator exp_op(double t, Sign sign) const;

    virtual void nonlinear(const SpectralState& u, SpectralState& out) const = 0;

    /// N*(U) = N(U) + D U for models with dissipation; defaults to N.
    virtual void dissipated_nonlinear(const SpectralState& u, SpectralState& out) const {
        nonlinear(u, out);
    }

    virtual bool has_classical_correction() const { return false; }

    /// Closed-form infinite-window mean correction C_inf(W); only models
    /// reporting has_classical_correction() provide one.
    virtual SpectralState classical_correction(const SpectralState& w) const;

    virtual SpectralState initial_state() const = 0;
};

/// Convenience: exp(sign * t L / eps) x through freshly built blocks.
SpectralState apply_exp(const ModelSystem& model, double t, Sign sign,
                        const SpectralState& x);

}  // namespace phaseavg
