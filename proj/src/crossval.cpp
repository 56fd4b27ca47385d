#include "ddsddp/crossval.hpp"

#include <cmath>
#include <stdexcept>

namespace ddsddp {

std::vector<double> default_cv_grid(int points, double lo, double hi) {
    if (points < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("default_cv_grid: bad range");
    std::vector<double> g;
    for (int k = 0; k < points; ++k)
        g.push_back(points == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1)));
    return g;
}

namespace {

double radius(double c, const TrajectorySet& traj, const KernelConfig& kernel) {
    const int p = std::max(1, traj.feature_dim);
    return rate_scaled_rho(c, traj.n_paths, kernel.bandwidth(traj.n_paths, p), p);
}

}  // namespace

CrossValResult cross_validate_rho(const TrajectorySet& traj, const SolveConfig& base, const CrossValConfig& cv) {
    if (cv.grid.empty()) throw std::invalid_argument("cross-validation grid is empty");
    const int n = traj.n_paths;
    if (cv.folds < 2 || cv.folds > n) throw std::invalid_argument("cross-validation needs 2 <= folds <= N");

    SolveConfig cfg = base;
    cfg.algorithm = Algorithm::RDD;
    cfg.compute_upper_bound = false;

    std::vector<std::vector<int>> train_idx(static_cast<std::size_t>(cv.folds)), test_idx(static_cast<std::size_t>(cv.folds));
    for (int i = 0; i < n; ++i)
        for (int f = 0; f < cv.folds; ++f) (i % cv.folds == f ? test_idx : train_idx)[static_cast<std::size_t>(f)].push_back(i);

    CrossValResult out;
    out.grid = cv.grid;
    for (double c : cv.grid) {
        double score = 0.0;
        for (int f = 0; f < cv.folds; ++f) {
            const TrajectorySet train = traj.subset(train_idx[static_cast<std::size_t>(f)]);
            const TrajectorySet test = traj.subset(test_idx[static_cast<std::size_t>(f)]);
            cfg.rho = radius(c, train, cfg.kernel);
            const RunResult r = run(train, cfg);
            score += evaluate_policy_out_of_sample(r.policy, test).mean;
        }
        out.scores.push_back(score / cv.folds);
    }
    for (std::size_t k = 1; k < out.scores.size(); ++k)
        if (out.scores[k] < out.scores[static_cast<std::size_t>(out.best_index)]) out.best_index = static_cast<int>(k);
    out.best_c = out.grid[static_cast<std::size_t>(out.best_index)];
    out.best_rho = radius(out.best_c, traj, base.kernel);
    return out;
}

}  // namespace ddsddp
