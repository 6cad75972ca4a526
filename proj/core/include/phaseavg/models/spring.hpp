#pragma once

#include <memory>
#include <numbers>
#include <optional>

#include "phaseavg/model.hpp"

namespace phaseavg {

/// Swinging-spring parameters. The resonance factor rho relates the
/// springing and swinging frequencies, omega_Z = rho * omega_R; the
/// coupling lambda = l0 omega_Z^2 / l^2 with l0 = 1.2 m and l = 1 m unless
/// overridden.
struct SpringParams {
    double rho = 2.0;
    double omega_r = std::numbers::pi;
    double eps = 1.0;
    std::optional<double> lambda;  // default 1.2 rho^2 pi^2

    double omega_z() const { return rho * omega_r; }
    double lambda_value() const {
        return lambda ? *lambda : 1.2 * rho * rho * std::numbers::pi * std::numbers::pi;
    }
};

/// Elastic-pendulum ODE as a complex three-component system
/// U = [x + i p_x, y + i p_y, z + i p_z] with diagonal L and a classical
/// mean correction acting on the z slot only.
std::unique_ptr<ModelSystem> spring_model(const SpringParams& params);

}  // namespace phaseavg
