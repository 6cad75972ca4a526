#pragma once

#include <vector>

namespace phaseavg {

/// Discretisation parameters shared by the phase-average kernel and the
/// mean-correction kernel: decay rate gamma, samples per fastest period P,
/// and the minimum node count used in the few-oscillation regime.
struct KernelParams {
    double gamma = 4.0;
    double P = 4.0;
    int K_min = 8;
};

/// Exponential-bump averaging kernel sampled at K equispaced nodes inside
/// its window (-eta/2, eta/2). Weights carry the discrete normalisation
/// sum_k w_k = 1; nodes and weights are symmetric about zero by
/// construction (bitwise). eta == 0 degenerates to the single node {0, 1},
/// i.e. pointwise evaluation.
class AveragingKernel {
public:
    AveragingKernel(double eta, double gamma, std::vector<double> nodes,
                    std::vector<double> weights);

    double eta() const { return eta_; }
    double gamma() const { return gamma_; }
    int size() const { return static_cast<int>(nodes_.size()); }

    double node(int k) const { return nodes_[k]; }
    double weight(int k) const { return weights_[k]; }

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    double eta_ = 0.0;
    double gamma_ = 4.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Unnormalised continuous kernel value exp(-eta / (gamma (eta/2 + s)(eta/2 - s)))
/// for |s| < eta/2, zero outside.
double bump_kernel_unnormalised(double eta, double gamma, double s);

/// Build the kernel with K nodes s_k = ((2k-1)/(2K) - 1/2) eta, k = 1..K,
/// weights normalised so they sum to one.
AveragingKernel build_kernel(double eta, double gamma, int k_count);

/// Node-count rule K = max(K_min, ceil(P eta omega_max / (2 pi eps)));
/// eta == 0 yields 1.
int sample_count(double eta, double omega_max, double eps, double samples_per_period,
                 int k_min);

/// build_kernel with the node count from sample_count.
AveragingKernel build_kernel_for(double eta, double omega_max, double eps,
                                 const KernelParams& params);

}  // namespace phaseavg
