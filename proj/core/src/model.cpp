#include "phaseavg/model.hpp"

#include <stdexcept>

namespace phaseavg {

BlockOperator ModelSystem::exp_op(double t, Sign sign) const {
    BlockOperator out(n_modes(), n_fields());
    exp_op(t, sign, out);
    return out;
}

SpectralState ModelSystem::classical_correction(const SpectralState&) const {
    throw std::logic_error(name() + ": no classical mean correction available");
}

SpectralState apply_exp(const ModelSystem& model, double t, Sign sign,
                        const SpectralState& x) {
    return apply_block(model.exp_op(t, sign), x);
}

}  // namespace phaseavg
