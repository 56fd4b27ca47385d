#pragma once

#include "ddsddp/sddp.hpp"

#include <vector>

namespace ddsddp {

struct CrossValConfig {
    /// Candidate constants C; rho = C / sqrt(N_train h^p).
    std::vector<double> grid;
    int folds = 5;
};

/// 10 points log-spaced over [1e-3, 1e1].
std::vector<double> default_cv_grid(int points = 10, double lo = 1e-3, double hi = 1e1);

struct CrossValResult {
    std::vector<double> grid;
    std::vector<double> scores;  // mean held-out objective per grid point
    int best_index = 0;
    double best_c = 0.0;
    /// Radius for the full training set at best_c.
    double best_rho = 0.0;
};

/// k-fold selection of the RDD radius over trajectories. Lowest mean
/// held-out objective wins; ties go to the earlier grid point.
CrossValResult cross_validate_rho(const TrajectorySet& traj, const SolveConfig& base, const CrossValConfig& cv);

}  // namespace ddsddp
