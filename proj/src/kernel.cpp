#include "ddsddp/kernel.hpp"

#include "ddsddp/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ddsddp {

double KernelConfig::bandwidth(int n, int p) const {
    const double h = bandwidth_rule == BandwidthRule::AutoRate ? auto_bandwidth(n, p, c_h) : bandwidth_h;
    if (!(h > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
    return h;
}

ConditionalWeights ConditionalWeights::uniform(int n) {
    if (n < 1) throw std::invalid_argument("uniform weights need at least one entry");
    return {Vector::Constant(n, 1.0 / n)};
}

ConditionalWeights nw_weights(const Vector& query, const std::vector<Vector>& anchors,
                              const KernelConfig& config) {
    if (anchors.empty()) throw std::invalid_argument("nw_weights: no anchors");
    const auto n = static_cast<int>(anchors.size());
    const double h = config.bandwidth(n, static_cast<int>(query.size()));
    Vector dist(n);
    for (int i = 0; i < n; ++i) {
        if (anchors[static_cast<std::size_t>(i)].size() != query.size())
            throw DimensionError("nw_weights: anchor " + std::to_string(i) + " has dimension " +
                                 std::to_string(anchors[static_cast<std::size_t>(i)].size()) +
                                 ", query has " + std::to_string(query.size()));
        dist[i] = (query - anchors[static_cast<std::size_t>(i)]).norm();
    }
    // Shift by the smallest distance so the nearest anchor gets exp(0).
    const double shift = dist.minCoeff();
    Vector w(n);
    for (int i = 0; i < n; ++i) w[i] = std::exp(-(dist[i] - shift) / h);
    w /= w.sum();
    return {w};
}

double auto_bandwidth(int n, int p, double c_h) {
    if (n < 1 || p < 1 || !(c_h > 0.0)) throw std::invalid_argument("auto_bandwidth: need N >= 1, p >= 1, c_h > 0");
    return c_h * std::pow(static_cast<double>(n), -1.0 / (p + 4));
}

}  // namespace ddsddp
