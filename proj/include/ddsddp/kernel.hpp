#pragma once

#include "ddsddp/lp.hpp"

#include <vector>

namespace ddsddp {

enum class BandwidthRule { Manual, AutoRate };
enum class KernelKind { Exponential };

struct KernelConfig {
    double bandwidth_h = 1.0;
    BandwidthRule bandwidth_rule = BandwidthRule::Manual;
    /// Scale c_h used by AutoRate.
    double c_h = 1.0;
    KernelKind kernel_kind = KernelKind::Exponential;

    /// Bandwidth in effect for N samples of dimension p.
    double bandwidth(int n, int p) const;
};

/// Conditional probabilities over the N anchors. Nonnegative, sums to 1.
struct ConditionalWeights {
    Vector weights;

    static ConditionalWeights uniform(int n);
    Eigen::Index size() const { return weights.size(); }
    double operator[](Eigen::Index i) const { return weights[i]; }
};

/// weights[i] proportional to exp(-|query - anchors[i]|_2 / h).
ConditionalWeights nw_weights(const Vector& query, const std::vector<Vector>& anchors,
                              const KernelConfig& config);

/// c_h * N^(-1/(p+4))
double auto_bandwidth(int n, int p, double c_h);

}  // namespace ddsddp
