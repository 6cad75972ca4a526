#include "phaseavg/models/spring.hpp"

#include <cmath>

namespace phaseavg {

namespace {

constexpr Complex kImag{0.0, 1.0};

class SpringModel final : public ModelSystem {
public:
    explicit SpringModel(const SpringParams& p)
        : p_(p),
          lambda_(p.lambda_value()),
          linear_(1, 3),
          pinv_(1, 3),
          llpinv_(BlockOperator::identity(1, 3)) {
        const double wr = p.omega_r;
        const double wz = p.omega_z();
        linear_.at(0, 0, 0) = kImag * wr;
        linear_.at(0, 1, 1) = kImag * wr;
        linear_.at(0, 2, 2) = kImag * wz;
        pinv_.at(0, 0, 0) = -kImag / wr;
        pinv_.at(0, 1, 1) = -kImag / wr;
        pinv_.at(0, 2, 2) = -kImag / wz;
    }

    std::string name() const override { return "spring"; }
    int n_fields() const override { return 3; }
    int n_modes() const override { return 1; }
    double eps() const override { return p_.eps; }
    double omega_max() const override { return std::max(p_.omega_r, p_.omega_z()); }

    const BlockOperator& linear_op() const override { return linear_; }
    const BlockOperator& linear_pinv() const override { return pinv_; }
    const BlockOperator& l_lpinv() const override { return llpinv_; }

    void exp_op(double t, Sign sign, BlockOperator& out) const override {
        out.resize(1, 3);
        out.set_zero();
        const double s = (sign == Sign::plus) ? 1.0 : -1.0;
        const double phase_r = s * p_.omega_r * t / p_.eps;
        const double phase_z = s * p_.omega_z() * t / p_.eps;
        out.at(0, 0, 0) = Complex{std::cos(phase_r), std::sin(phase_r)};
        out.at(0, 1, 1) = out.at(0, 0, 0);
        out.at(0, 2, 2) = Complex{std::cos(phase_z), std::sin(phase_z)};
    }

    void nonlinear(const SpectralState& u, SpectralState& out) const override {
        if (u.n_fields() != 3 || u.n_modes() != 1)
            throw std::invalid_argument("spring: state shape mismatch");
        if (!same_shape(out, u)) out = SpectralState(3, 1);
        const double x = u(0, 0).real();
        const double y = u(1, 0).real();
        const double z = u(2, 0).real();
        const double wr = p_.omega_r;
        out(0, 0) = kImag * (lambda_ / wr) * x * z;
        out(1, 0) = kImag * (lambda_ / wr) * y * z;
        out(2, 0) = kImag * (lambda_ / (2.0 * p_.rho * wr)) * (x * x + y * y);
    }

    bool has_classical_correction() const override { return true; }

    /// Only the z slot survives the infinite-window average; the surviving
    /// factor is the squared radial position |x|^2 + |y|^2 of the pendulum
    /// in the modulation variable.
    SpectralState classical_correction(const SpectralState& w) const override {
        if (w.n_fields() != 3 || w.n_modes() != 1)
            throw std::invalid_argument("spring: state shape mismatch");
        SpectralState c(3, 1);
        c.set_zero();
        const double r2 = std::norm(w(0, 0)) + std::norm(w(1, 0));
        c(2, 0) = kImag * (lambda_ / (4.0 * p_.rho * p_.omega_r)) * r2;
        return c;
    }

    SpectralState initial_state() const override {
        SpectralState u(3, 1);
        u(0, 0) = 0.04;
        u(1, 0) = Complex{0.0, 0.03427 / std::numbers::pi};
        u(2, 0) = 0.08;
        return u;
    }

private:
    SpringParams p_;
    double lambda_;
    BlockOperator linear_;
    BlockOperator pinv_;
    BlockOperator llpinv_;
};

}  // namespace

std::unique_ptr<ModelSystem> spring_model(const SpringParams& params) {
    return std::make_unique<SpringModel>(params);
}

}  // namespace phaseavg
