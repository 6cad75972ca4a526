#include "phaseavg/models/kg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace phaseavg {

namespace {

class KgModel final : public ModelSystem {
public:
    KgModel(const KgParams& p, const GridSpec& grid)
        : p_(p), grid_(grid), omega_(grid.size()), linear_(grid.size(), 2),
          pinv_(grid.size(), 2), llpinv_(BlockOperator::identity(grid.size(), 2)) {
        double wmax = 0.0;
        for (int j = 0; j < grid.size(); ++j) {
            const double k = grid.wavenumber(j);
            omega_[j] = std::sqrt(1.0 + k * k);
            wmax = std::max(wmax, omega_[j]);
            linear_.at(j, 0, 1) = -omega_[j];
            linear_.at(j, 1, 0) = omega_[j];
            pinv_.at(j, 0, 1) = 1.0 / omega_[j];
            pinv_.at(j, 1, 0) = -1.0 / omega_[j];
        }
        omega_max_ = wmax;
    }

    std::string name() const override { return "kg"; }
    int n_fields() const override { return 2; }
    int n_modes() const override { return grid_.size(); }
    double eps() const override { return p_.eps; }
    double omega_max() const override { return omega_max_; }

    const BlockOperator& linear_op() const override { return linear_; }
    const BlockOperator& linear_pinv() const override { return pinv_; }
    const BlockOperator& l_lpinv() const override { return llpinv_; }

    // Per-mode rotation blocks [[cos, -+sin], [+-sin, cos]].
    void exp_op(double t, Sign sign, BlockOperator& out) const override {
        out.resize(grid_.size(), 2);
        const double s = (sign == Sign::plus) ? 1.0 : -1.0;
        for (int j = 0; j < grid_.size(); ++j) {
            const double phase = omega_[j] * t / p_.eps;
            const double cs = std::cos(phase);
            const double sn = s * std::sin(phase);
            out.at(j, 0, 0) = cs;
            out.at(j, 0, 1) = -sn;
            out.at(j, 1, 0) = sn;
            out.at(j, 1, 1) = cs;
        }
    }

    // N = [0, -(eps a / omega) conv (eps a / omega)], evaluated directly in
    // spectral space from the discrete convolution definition.
    void nonlinear(const SpectralState& u, SpectralState& out) const override {
        const int n = grid_.size();
        if (u.n_fields() != 2 || u.n_modes() != n)
            throw std::invalid_argument("kg: state shape mismatch");
        if (!same_shape(out, u)) out = SpectralState(2, n);

        thread_local std::vector<Complex> scaled;
        scaled.resize(n);
        for (int j = 0; j < n; ++j) scaled[j] = (p_.eps / omega_[j]) * u(0, j);
        const std::vector<Complex> conv = circular_convolution(scaled, scaled);
        for (int j = 0; j < n; ++j) {
            out(0, j) = 0.0;
            out(1, j) = -conv[j];
        }
    }

    bool has_classical_correction() const override { return true; }

    SpectralState classical_correction(const SpectralState& w) const override {
        return kg_classical_correction(w, grid_, p_.eps);
    }

    SpectralState initial_state() const override {
        const int n = grid_.size();
        std::vector<double> a(n);
        for (int i = 0; i < n; ++i) {
            const double dx = grid_.x(i) - std::numbers::pi;
            a[i] = std::exp(-0.5 * dx * dx);
        }
        const std::vector<Complex> a_hat = dft_forward(a);
        SpectralState u(2, n);
        for (int j = 0; j < n; ++j) {
            u(0, j) = a_hat[j];
            u(1, j) = 0.0;
        }
        return u;
    }

private:
    KgParams p_;
    GridSpec grid_;
    std::vector<double> omega_;
    double omega_max_ = 0.0;
    BlockOperator linear_;
    BlockOperator pinv_;
    BlockOperator llpinv_;
};

}  // namespace

std::unique_ptr<ModelSystem> kg_model(const KgParams& params, const GridSpec& grid) {
    return std::make_unique<KgModel>(params, grid);
}

SpectralState kg_classical_correction(const SpectralState& w, const GridSpec& grid,
                                      double eps) {
    const int n = grid.size();
    if (w.n_fields() != 2 || w.n_modes() != n)
        throw std::invalid_argument("kg_classical_correction: length mismatch");

    std::vector<double> omega_sq(n);
    for (int j = 0; j < n; ++j) {
        const double k = grid.wavenumber(j);
        omega_sq[j] = 1.0 + k * k;
    }

    SpectralState c(2, n);
    c.set_zero();
    const auto chat = w.row(0);
    const auto dhat = w.row(1);
    // The nonlinearity carries a factor -(eps/omega)^2 into each product;
    // the surviving zero-frequency trig averages contribute 1/2.
    const double scale = -(eps * eps) / (2.0 * n);

    Complex zero_mode = 0.0;
    for (int j = 0; j < n; ++j) {
        const int jc = (n - j) % n;
        zero_mode += (chat[j] * chat[jc] + dhat[j] * dhat[jc]) / omega_sq[j];
    }
    c(1, 0) = scale * zero_mode;

    for (int i = 2; i < n; i += 2) {
        const int j1 = i / 2;
        const int j2 = (i + n) / 2;
        c(1, i) = scale * ((chat[j1] * chat[j1] + dhat[j1] * dhat[j1]) / omega_sq[j1] +
                           (chat[j2] * chat[j2] + dhat[j2] * dhat[j2]) / omega_sq[j2]);
    }
    return c;
}

}  // namespace phaseavg
