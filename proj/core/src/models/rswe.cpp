#include "phaseavg/models/rswe.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace phaseavg {

namespace {

constexpr Complex kImag{0.0, 1.0};

class RsweModel final : public ModelSystem {
public:
    RsweModel(const RsweParams& p, const GridSpec& grid)
        : p_(p), grid_(grid), k_op_(grid.size()), psi_(grid.size()), k4_(grid.size()),
          linear_(grid.size(), 3), pinv_(grid.size(), 3), llpinv_(grid.size(), 3) {
        for (int j = 0; j < grid.size(); ++j) {
            // Self-conjugate Nyquist mode: every odd-derivative ik factor
            // uses the symmetric convention k = 0 there, so real fields
            // stay real. The even-power hyperviscosity keeps the true k.
            const double k_true = grid.wavenumber(j);
            const double k = (j == grid.size() / 2) ? 0.0 : k_true;
            k_op_[j] = k;
            const double psi2 = 1.0 + k * k;
            psi_[j] = std::sqrt(psi2);
            k4_[j] = k_true * k_true * k_true * k_true;
            const Complex ik = kImag * k;

            linear_.at(j, 0, 1) = -1.0;
            linear_.at(j, 0, 2) = ik;
            linear_.at(j, 1, 0) = 1.0;
            linear_.at(j, 2, 0) = ik;

            pinv_.at(j, 0, 1) = 1.0 / psi2;
            pinv_.at(j, 0, 2) = -ik / psi2;
            pinv_.at(j, 1, 0) = -1.0 / psi2;
            pinv_.at(j, 2, 0) = -ik / psi2;

            llpinv_.at(j, 0, 0) = 1.0;
            llpinv_.at(j, 1, 1) = 1.0 / psi2;
            llpinv_.at(j, 1, 2) = -ik / psi2;
            llpinv_.at(j, 2, 1) = ik / psi2;
            llpinv_.at(j, 2, 2) = k * k / psi2;
        }
        // Kernel sampling bound from the dispersion relation at the highest
        // resolvable wavenumber.
        const double k_max = grid.size() / 2;
        omega_max_ = std::sqrt(1.0 + k_max * k_max);
    }

    std::string name() const override { return "rswe"; }
    int n_fields() const override { return 3; }
    int n_modes() const override { return grid_.size(); }
    double eps() const override { return p_.eps; }
    double omega_max() const override { return omega_max_; }

    const BlockOperator& linear_op() const override { return linear_; }
    const BlockOperator& linear_pinv() const override { return pinv_; }
    const BlockOperator& l_lpinv() const override { return llpinv_; }

    void exp_op(double t, Sign sign, BlockOperator& out) const override {
        out.resize(grid_.size(), 3);
        const double sgn = (sign == Sign::plus) ? 1.0 : -1.0;
        for (int j = 0; j < grid_.size(); ++j) {
            const double k = k_op_[j];
            const double psi = psi_[j];
            const double psi2 = 1.0 + k * k;
            const double phase = psi * t / p_.eps;
            const double cs = std::cos(phase);
            const double sn = sgn * std::sin(phase);
            const Complex ik = kImag * k;

            out.at(j, 0, 0) = cs;
            out.at(j, 0, 1) = -sn / psi;
            out.at(j, 0, 2) = ik * sn / psi;
            out.at(j, 1, 0) = sn / psi;
            out.at(j, 1, 1) = (k * k + cs) / psi2;
            out.at(j, 1, 2) = ik * (1.0 - cs) / psi2;
            out.at(j, 2, 0) = ik * sn / psi;
            out.at(j, 2, 1) = ik * (cs - 1.0) / psi2;
            out.at(j, 2, 2) = (1.0 + k * k * cs) / psi2;
        }
    }

    // N = -F[u u_x, u v_x, (u phi)_x]: derivatives in spectral space,
    // products on the collocation grid.
    void nonlinear(const SpectralState& state, SpectralState& out) const override {
        const int n = grid_.size();
        if (state.n_fields() != 3 || state.n_modes() != n)
            throw std::invalid_argument("rswe: state shape mismatch");
        if (!same_shape(out, state)) out = SpectralState(3, n);

        thread_local std::vector<Complex> du_hat, dv_hat, prod;
        du_hat.resize(n);
        dv_hat.resize(n);
        prod.resize(n);

        for (int j = 0; j < n; ++j) {
            const Complex ik = kImag * k_op_[j];
            du_hat[j] = ik * state(0, j);
            dv_hat[j] = ik * state(1, j);
        }

        const std::vector<Complex> u = dft_inverse(state.row(0));
        const std::vector<Complex> ux = dft_inverse(du_hat);
        const std::vector<Complex> vx = dft_inverse(dv_hat);
        const std::vector<Complex> phi = dft_inverse(state.row(2));

        for (int i = 0; i < n; ++i) prod[i] = u[i] * ux[i];
        std::vector<Complex> f = dft_forward(prod);
        for (int j = 0; j < n; ++j) out(0, j) = -f[j];

        for (int i = 0; i < n; ++i) prod[i] = u[i] * vx[i];
        f = dft_forward(prod);
        for (int j = 0; j < n; ++j) out(1, j) = -f[j];

        for (int i = 0; i < n; ++i) prod[i] = u[i] * phi[i];
        f = dft_forward(prod);
        for (int j = 0; j < n; ++j) out(2, j) = -kImag * k_op_[j] * f[j];
    }

    // N*(U) = N(U) + D U with D = -mu k^4 per mode.
    void dissipated_nonlinear(const SpectralState& state, SpectralState& out) const override {
        nonlinear(state, out);
        for (int f = 0; f < 3; ++f)
            for (int j = 0; j < grid_.size(); ++j) out(f, j) -= p_.mu * k4_[j] * state(f, j);
    }

    SpectralState initial_state() const override {
        const int n = grid_.size();
        std::vector<double> phi(n);
        for (int i = 0; i < n; ++i) {
            const double dx = grid_.x(i) - std::numbers::pi;
            phi[i] = std::exp(-0.5 * dx * dx);
        }
        const std::vector<Complex> phi_hat = dft_forward(phi);
        SpectralState u(3, n);
        u.set_zero();
        for (int j = 0; j < n; ++j) u(2, j) = phi_hat[j];
        return u;
    }

private:
    RsweParams p_;
    GridSpec grid_;
    std::vector<double> k_op_;
    std::vector<double> psi_;
    std::vector<double> k4_;
    double omega_max_ = 0.0;
    BlockOperator linear_;
    BlockOperator pinv_;
    BlockOperator llpinv_;
};

}  // namespace

std::unique_ptr<ModelSystem> rswe_model(const RsweParams& params, const GridSpec& grid) {
    return std::make_unique<RsweModel>(params, grid);
}

}  // namespace phaseavg
