#pragma once

#include <memory>

#include "phaseavg/model.hpp"

namespace phaseavg {

struct KgParams {
    double eps = 0.1;
};

/// Klein-Gordon-type PDE u_tt + (1/eps^2)(u - u_xx) = -u^2 on a periodic
/// grid, written as a first-order spectral system in [a, b] with
/// a = (omega/eps) u and b = u_t. Per-mode frequency omega = sqrt(1 + k^2);
/// the quadratic nonlinearity is the discrete circular convolution of the
/// rescaled a field with itself. Initial condition: a Gaussian bump in a.
std::unique_ptr<ModelSystem> kg_model(const KgParams& params, const GridSpec& grid);

/// Infinite-window (classical) mean correction of the KG nonlinearity,
/// evaluated in closed form from the spectral modulation variable
/// W = [c_hat, d_hat]. Only the b slot is nonzero; odd spectral indices
/// vanish identically.
SpectralState kg_classical_correction(const SpectralState& w, const GridSpec& grid,
                                      double eps);

}  // namespace phaseavg
