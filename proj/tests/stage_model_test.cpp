#include "ddsddp/cuts.hpp"
#include "ddsddp/errors.hpp"
#include "ddsddp/sddp.hpp"
#include "ddsddp/stage_model.hpp"
#include "toy.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ddsddp;

namespace {

StageProblem one_variable() {
    StageProblem p;
    p.stage_t = 2;
    p.dims = {1, 1, 1, 1};
    p.datum.c = Vector::Ones(1);
    p.datum.A = Matrix::Ones(1, 1);
    p.datum.B = Matrix::Ones(1, 1);
    p.datum.b = Vector::Constant(1, 2.0);
    p.datum.feature = Vector::Zero(0);
    return p;
}

double stage_value(const StageProblem& p, const Vector& x, Vector* grad = nullptr) {
    StageLp lp = assemble_stage_lp(p, x);
    const LpSolution s = solve_stage(lp, "test");
    if (grad) *grad = lp.copy_duals(s);
    return s.objective_value;
}

// Deterministic trajectory set (N = 1) from a template and fixed features.
TrajectorySet deterministic(const InstanceTemplate& inst, const Vector& feature) {
    std::vector<Vector> path(static_cast<std::size_t>(inst.horizon_T), feature);
    return materialize(inst, {path});
}

}  // namespace

TEST(AssembleStage, OneVariableCopyDual) {
    Vector g;
    const double v = stage_value(one_variable(), Vector::Ones(1), &g);
    EXPECT_NEAR(v, 1.0, 1e-12);
    EXPECT_NEAR(g[0], -1.0, 1e-12);
    StageLp lp = assemble_stage_lp(one_variable(), Vector::Ones(1));
    const LpSolution s = solve_stage(lp, "test");
    EXPECT_NEAR(s.primal[0], 1.0, 1e-12);
    EXPECT_EQ(lp.copy_rows.size(), 1u);
}

TEST(AssembleStage, RecourseViolationIsModelError) {
    StageProblem p = one_variable();
    EXPECT_THROW(stage_value(p, Vector::Constant(1, 3.0)), ModelError);
}

TEST(AssembleStage, InactiveCutLeavesObjective) {
    StageLp lp = assemble_stage_lp(one_variable(), Vector::Ones(1));
    splice_lower(lp.builder, lp.state_cols, {Cut{Vector::Zero(1), 0.0, Vector::Zero(1), 1}});
    EXPECT_NEAR(solve_stage(lp, "test").objective_value, 1.0, 1e-12);
}

TEST(AssembleStage, WrongIncomingLength) {
    EXPECT_THROW(assemble_stage_lp(one_variable(), Vector::Ones(2)), DimensionError);
}

TEST(Utility, ValidationAndChords) {
    EXPECT_THROW((PiecewiseUtility{{0.0, 0.0}, {1.0, 2.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((PiecewiseUtility{{0.0}, {-1.0}}.validate()), std::invalid_argument);
    const auto u = PiecewiseUtility::exponential_chords();
    u.validate();
    for (double w : {0.0, 0.6, 1.2, 1.8, 2.4, 3.0}) EXPECT_NEAR(u(w), 1.0 - std::exp(-w), 1e-12);
    PortfolioConfig bad;
    bad.utility = {{0.0, 1.0}, {0.5, 1.0}};
    EXPECT_THROW(build_portfolio_instance(bad), std::invalid_argument);
}

TEST(Portfolio, DeterministicCompounding) {
    for (int T : {2, 3, 4})
        for (double r : {1.1, 0.95}) {
            PortfolioConfig cfg;
            cfg.assets_K = 1;
            cfg.horizon_T = T;
            cfg.risk_free = 1.02;
            cfg.utility = PiecewiseUtility::linear();
            const auto ts = deterministic(build_portfolio_instance(cfg), Vector::Constant(1, r));
            const double wealth = std::pow(std::max(r, 1.02), T - 1);
            EXPECT_NEAR(-extensive_form_oracle(ts, KernelConfig{}), wealth, 1e-10) << "T=" << T << " r=" << r;
        }
}

TEST(Portfolio, FullFeesNeverTrade) {
    PortfolioConfig cfg;
    cfg.assets_K = 1;
    cfg.horizon_T = 3;
    cfg.fee_buy = 1.0;
    cfg.fee_sell = 1.0;
    cfg.risk_free = 1.0;
    cfg.utility = PiecewiseUtility::linear();
    const auto ts = deterministic(build_portfolio_instance(cfg), Vector::Constant(1, 1.2));
    EXPECT_NEAR(-extensive_form_oracle(ts, KernelConfig{}), 1.0, 1e-10);
}

TEST(Portfolio, ZeroWealthGivesUtilityAtZero) {
    PortfolioConfig cfg;
    cfg.assets_K = 2;
    cfg.horizon_T = 3;
    cfg.initial_wealth = 0.0;
    cfg.utility = {{0.5, 1.0}, {2.0, 0.5}};
    const auto ts = deterministic(build_portfolio_instance(cfg), Vector::Constant(2, 1.1));
    EXPECT_NEAR(extensive_form_oracle(ts, KernelConfig{}), -0.5, 1e-12);
}

TEST(Property, CopyDualMatchesFiniteDifference) {
    Rng r(31);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        PortfolioConfig cfg;
        cfg.assets_K = 2;
        cfg.horizon_T = 2;
        cfg.fee_buy = 0.01;
        cfg.fee_sell = 0.01;
        const auto inst = build_portfolio_instance(cfg);
        Vector xi(2);
        xi << 0.8 + 0.4 * r.uniform(), 0.8 + 0.4 * r.uniform();
        StageProblem p{2, inst.make(2, xi), inst.dims[1]};
        Vector x(3);
        x << 2.0 * r.uniform(), 2.0 * r.uniform(), 2.0 * r.uniform();
        Vector g;
        stage_value(p, x, &g);
        const double step = 1e-6;
        bool smooth = true;
        Vector fd(3);
        for (int k = 0; k < 3; ++k) {
            Vector up = x, dn = x;
            up[k] += step;
            dn[k] -= step;
            const double v0 = stage_value(p, x);
            const double right = (stage_value(p, up) - v0) / step;
            const double left = (v0 - stage_value(p, dn)) / step;
            if (std::abs(right - left) > 1e-6) smooth = false;
            fd[k] = (stage_value(p, up) - stage_value(p, dn)) / (2 * step);
        }
        if (!smooth) continue;
        ++checked;
        EXPECT_LE((fd - g).cwiseAbs().maxCoeff(), 1e-5);
    }
    EXPECT_GT(checked, 30);
}

TEST(Property, StageValueConvexInState) {
    Rng r(8);
    const TrajectorySet ts = fixtures::toy_instance(2, 3, 2);
    for (int trial = 0; trial < 200; ++trial) {
        StageProblem p{2, ts.at(2, trial % 2), ts.stage_dims(2)};
        const Vector a = Vector::Constant(1, 12.0 * r.uniform());
        const Vector b = Vector::Constant(1, 12.0 * r.uniform());
        const double alpha = r.uniform();
        const double mid = stage_value(p, alpha * a + (1 - alpha) * b);
        EXPECT_LE(mid, alpha * stage_value(p, a) + (1 - alpha) * stage_value(p, b) + 1e-8);
    }
}
