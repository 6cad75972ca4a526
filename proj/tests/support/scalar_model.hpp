#pragma once

#include <cmath>
#include <memory>

#include "phaseavg/model.hpp"

namespace testsupport {

using phaseavg::BlockOperator;
using phaseavg::Complex;
using phaseavg::SpectralState;

/// Single-mode ODE du/dt + (i omega / eps) u = c with constant forcing.
/// Its mean-corrected solution is exact for any averaging window, which
/// makes it the exactness fixture for the whole pipeline.
class ConstantForcingModel final : public phaseavg::ModelSystem {
public:
    ConstantForcingModel(double omega, double eps, Complex c, Complex u0)
        : omega_(omega), eps_(eps), c_(c), u0_(u0), linear_(1, 1), pinv_(1, 1),
          llpinv_(BlockOperator::identity(1, 1)) {
        linear_.at(0, 0, 0) = Complex{0.0, omega};
        pinv_.at(0, 0, 0) = Complex{0.0, -1.0 / omega};
    }

    std::string name() const override { return "constant-forcing"; }
    int n_fields() const override { return 1; }
    int n_modes() const override { return 1; }
    double eps() const override { return eps_; }
    double omega_max() const override { return omega_; }

    const BlockOperator& linear_op() const override { return linear_; }
    const BlockOperator& linear_pinv() const override { return pinv_; }
    const BlockOperator& l_lpinv() const override { return llpinv_; }

    void exp_op(double t, phaseavg::Sign sign, BlockOperator& out) const override {
        out.resize(1, 1);
        const double s = (sign == phaseavg::Sign::plus) ? 1.0 : -1.0;
        const double phase = s * omega_ * t / eps_;
        out.at(0, 0, 0) = Complex{std::cos(phase), std::sin(phase)};
    }

    void nonlinear(const SpectralState&, SpectralState& out) const override {
        if (out.n_fields() != 1 || out.n_modes() != 1) out = SpectralState(1, 1);
        out(0, 0) = c_;
    }

    bool has_classical_correction() const override { return true; }

    SpectralState classical_correction(const SpectralState&) const override {
        SpectralState c(1, 1);
        c(0, 0) = c_;
        return c;
    }

    SpectralState initial_state() const override {
        SpectralState u(1, 1);
        u(0, 0) = u0_;
        return u;
    }

    /// Analytic standard-space solution
    /// u(t) = (i c eps / omega)(exp(-i omega t / eps) - 1) + exp(-i omega t / eps) u0.
    Complex analytic_u(double t) const {
        const Complex rot = std::exp(Complex{0.0, -omega_ * t / eps_});
        return Complex{0.0, 1.0} * c_ * eps_ / omega_ * (rot - 1.0) + rot * u0_;
    }

    /// Analytic modulation-variable solution
    /// v(t) = (i c eps / omega)(1 - exp(+i omega t / eps)) + u0.
    Complex analytic_v(double t) const {
        const Complex rot = std::exp(Complex{0.0, omega_ * t / eps_});
        return Complex{0.0, 1.0} * c_ * eps_ / omega_ * (1.0 - rot) + u0_;
    }

private:
    double omega_;
    double eps_;
    Complex c_;
    Complex u0_;
    BlockOperator linear_;
    BlockOperator pinv_;
    BlockOperator llpinv_;
};

}  // namespace testsupport
