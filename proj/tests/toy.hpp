#pragma once

#include "ddsddp/scenarios.hpp"
#include "ddsddp/stage_model.hpp"

#include <cstdint>

namespace ddsddp::fixtures {

/// Seeded inventory instance with Markov (demand, order cost) features.
inline TrajectorySet toy_instance(std::uint64_t seed, int T = 3, int N = 2) {
    Rng r(seed * 7919 + 13);
    InventoryConfig cfg;
    cfg.horizon_T = T;
    cfg.capacity = 6.0 + 4.0 * r.uniform();
    cfg.holding = 0.1 + 0.3 * r.uniform();
    cfg.emergency = 5.0 + 2.0 * r.uniform();
    cfg.disposal = 0.2 + 0.5 * r.uniform();
    cfg.terminal_salvage = 0.8 * r.uniform();
    SyntheticSpec spec;
    spec.mu = Vector(2);
    spec.mu << 2.0 + 2.0 * r.uniform(), 1.0 + r.uniform();
    spec.phi = Matrix::Zero(2, 2);
    spec.phi(0, 0) = 0.6 * r.uniform();
    spec.phi(1, 1) = 0.6 * r.uniform();
    spec.phi(0, 1) = 0.2 * r.uniform();
    spec.noise_chol = Matrix::Zero(2, 2);
    spec.noise_chol(0, 0) = 1.5;
    spec.noise_chol(1, 1) = 0.6;
    spec.box_lo = Vector(2);
    spec.box_lo << 0.0, 0.5;
    spec.box_hi = Vector(2);
    spec.box_hi << 8.0, 4.0;
    spec.xi1 = Vector(2);
    spec.xi1 << 3.0, 2.0;
    return generate_synthetic_markov(spec, build_inventory_instance(cfg), N, seed);
}

}  // namespace ddsddp::fixtures
