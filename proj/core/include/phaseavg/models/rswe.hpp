#pragma once

#include <memory>

#include "phaseavg/model.hpp"

namespace phaseavg {

struct RsweParams {
    double eps = 0.1;
    double mu = 1e-4;  // (nabla^2)^2 hyperviscosity coefficient
};

/// Nondimensional f-plane rotating shallow water equations in one spatial
/// dimension, spectral state [u_hat, v_hat, phi_hat]. The zero-frequency
/// Rossby branch makes L singular, so the Moore-Penrose pseudoinverse L^+
/// and the projector L L^+ are used. The nonlinearity is evaluated
/// pseudospectrally (derivatives in spectral space, products in physical
/// space) and stabilised by -mu k^4 hyperviscosity in N*. Initial
/// condition: a Gaussian geopotential perturbation at rest.
std::unique_ptr<ModelSystem> rswe_model(const RsweParams& params, const GridSpec& grid);

}  // namespace phaseavg
