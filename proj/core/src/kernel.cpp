#include "phaseavg/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace phaseavg {

AveragingKernel::AveragingKernel(double eta, double gamma, std::vector<double> nodes,
                                 std::vector<double> weights)
    : eta_(eta), gamma_(gamma), nodes_(std::move(nodes)), weights_(std::move(weights)) {
    if (nodes_.empty() || nodes_.size() != weights_.size())
        throw std::invalid_argument("AveragingKernel: node/weight size mismatch");
}

double bump_kernel_unnormalised(double eta, double gamma, double s) {
    const double half = 0.5 * eta;
    if (!(std::abs(s) < half)) return 0.0;
    return std::exp(-eta / (gamma * (half + s) * (half - s)));
}

AveragingKernel build_kernel(double eta, double gamma, int k_count) {
    if (k_count < 1) throw std::invalid_argument("build_kernel: K must be >= 1");
    if (!(eta >= 0.0)) throw std::invalid_argument("build_kernel: eta must be >= 0");
    if (eta == 0.0) return AveragingKernel(0.0, gamma, {0.0}, {1.0});

    const int k = k_count;
    std::vector<double> nodes(k);
    std::vector<double> raw(k);

    // Fill the negative half and mirror, so node and weight symmetry holds
    // bitwise; an odd K places the middle node exactly at zero.
    for (int i = 0; i < k / 2; ++i) {
        const double s = ((2.0 * (i + 1) - 1.0) / (2.0 * k) - 0.5) * eta;
        nodes[i] = s;
        nodes[k - 1 - i] = -s;
    }
    if (k % 2 == 1) nodes[k / 2] = 0.0;

    for (int i = 0; i <= (k - 1) / 2; ++i) {
        const double v = bump_kernel_unnormalised(eta, gamma, nodes[i]);
        raw[i] = v;
        raw[k - 1 - i] = v;
    }

    // Extended-precision accumulation keeps sum(w) - 1 at a few ulps even
    // for the multi-thousand-node kernels of the small-eps regimes.
    long double total = 0.0L;
    for (double v : raw) total += v;
    if (!(total > 0.0L)) throw std::invalid_argument("build_kernel: degenerate kernel values");

    std::vector<double> weights(k);
    for (int i = 0; i < k; ++i) weights[i] = static_cast<double>(raw[i] / total);

    return AveragingKernel(eta, gamma, std::move(nodes), std::move(weights));
}

int sample_count(double eta, double omega_max, double eps, double samples_per_period,
                 int k_min) {
    if (!(eta >= 0.0)) throw std::invalid_argument("sample_count: eta must be >= 0");
    if (!(omega_max > 0.0) || !(eps > 0.0) || !(samples_per_period > 0.0) || k_min < 1)
        throw std::invalid_argument("sample_count: parameters must be positive");
    if (eta == 0.0) return 1;
    const double raw =
        samples_per_period * eta * omega_max / (2.0 * std::numbers::pi * eps);
    if (!(raw < 5e7))
        throw std::runtime_error("sample_count: kernel node count exceeds 5e7; "
                                 "check eta, omega_max and eps");
    const int k = static_cast<int>(std::ceil(raw));
    return std::max(k_min, std::max(1, k));
}

AveragingKernel build_kernel_for(double eta, double omega_max, double eps,
                                 const KernelParams& params) {
    return build_kernel(eta, params.gamma,
                        sample_count(eta, omega_max, eps, params.P, params.K_min));
}

}  // namespace phaseavg
