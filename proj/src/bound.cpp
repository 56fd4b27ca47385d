#include "ddsddp/sddp.hpp"

#include <cmath>
#include <stdexcept>

namespace ddsddp {

double generalization_bound(const BoundInputs& in) {
    const int T = in.T;
    if (T < 2) throw std::domain_error("generalization_bound: T must be at least 2");
    const auto stages = static_cast<std::size_t>(T - 1);
    if (in.sigma.size() < stages || in.L.size() < stages || in.delta.size() < stages || in.D.size() < stages ||
        in.d.size() < stages)
        throw std::domain_error("generalization_bound: need T-1 entries for sigma, L, delta, D, d");
    if (!(in.g_min > 0.0) || !(in.eta > 0.0) || !(in.N > 0.0) || !(in.h > 0.0) || in.p < 1)
        throw std::domain_error("generalization_bound: g_min, eta, N, h and p must be positive");

    double total = 0.0;
    double log_cover = 0.0;  // sum_{s < t} d_s log(D_s / eta)
    for (int t = 2; t <= T; ++t) {
        const auto s = static_cast<std::size_t>(t - 2);
        const double sigma = in.sigma[s];
        const double L = in.L[s];
        const double delta = in.delta[s];
        if (sigma < 0.0 || L < 0.0) throw std::domain_error("generalization_bound: sigma and L must be >= 0");
        if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("generalization_bound: delta must lie in (0, 1)");
        if (!(in.D[s] > 0.0) || in.d[s] < 1) throw std::domain_error("generalization_bound: D and d must be positive");
        log_cover += in.d[s] * std::log(in.D[s] / in.eta);
        const double log_term = (t - 2) * std::log(in.N) + log_cover - std::log(delta);
        if (log_term < 0.0) throw std::domain_error("generalization_bound: logarithm term is negative");
        total += std::sqrt(sigma * sigma * log_term / (in.N * std::pow(in.h, in.p) * in.g_min)) + 2.0 * L * in.eta;
    }
    return total;
}

}  // namespace ddsddp
