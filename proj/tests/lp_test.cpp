#include "ddsddp/errors.hpp"
#include "ddsddp/lp.hpp"
#include "ddsddp/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ddsddp;

namespace {

LinearProgram single(double rhs) {
    return LinearProgram(Vector::Ones(1), Matrix::Ones(1, 1), Vector::Constant(1, rhs));
}

LinearProgram three_column() {
    Vector c(3);
    c << -1, -1, 0;
    return LinearProgram(c, Matrix::Ones(1, 3), Vector::Ones(1));
}

// Random LP that is feasible by construction (b = A x0, x0 >= 0).
LinearProgram random_lp(Rng& r, int n, int m) {
    Matrix a(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = std::round(8.0 * r.uniform() - 4.0);
    Vector x0(n);
    for (int j = 0; j < n; ++j) x0[j] = r.uniform() < 0.3 ? 0.0 : std::round(5.0 * r.uniform());
    Vector c(n);
    for (int j = 0; j < n; ++j) c[j] = std::round(10.0 * r.uniform() - 3.0);
    LinearProgram lp(c, a, a * x0);
    for (int j = 0; j < n; ++j)
        if (r.uniform() < 0.3) lp.var_upper[j] = x0[j] + std::round(3.0 * r.uniform());
    return lp;
}

}  // namespace

TEST(Solve, ForcedSingleVariable) {
    const LpSolution s = solve(single(1.0));
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.primal[0], 1.0, 1e-12);
    EXPECT_NEAR(s.objective_value, 1.0, 1e-12);
    EXPECT_NEAR(s.duals[0], 1.0, 1e-12);
}

TEST(Solve, ContradictoryBoundIsInfeasible) { EXPECT_EQ(solve(single(-1.0)).status, LpStatus::Infeasible); }

TEST(Solve, ThreeColumnVertex) {
    const LpSolution s = solve(three_column());
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.objective_value, -1.0, 1e-12);
    EXPECT_NEAR(s.primal[0] + s.primal[1], 1.0, 1e-12);
    EXPECT_EQ(s.basis.size(), 1u);
}

TEST(Solve, Unbounded) {
    Vector c(2);
    c << -1, 0;
    Matrix a(1, 2);
    a << 1, -1;
    EXPECT_EQ(solve(LinearProgram(c, a, Vector::Zero(1))).status, LpStatus::Unbounded);
}

TEST(Solve, MalformedInputThrows) {
    LinearProgram lp(Vector::Ones(2), Matrix::Ones(1, 3), Vector::Ones(1));
    EXPECT_THROW(solve(lp), DimensionError);
}

TEST(Solve, FreeAndBoundedVariables) {
    // min x - y  s.t. x + y = 1, x free, -2 <= y <= 3  -> y = 3, x = -2
    LpBuilder b;
    const int x = b.add_free_variable(1.0);
    const int y = b.add_variable(-1.0, -2.0, 3.0);
    b.add_row({{x, 1.0}, {y, 1.0}}, 1.0);
    const LpSolution s = solve(b.build());
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.primal[x], -2.0, 1e-12);
    EXPECT_NEAR(s.primal[y], 3.0, 1e-12);
    EXPECT_NEAR(s.objective_value, -5.0, 1e-12);
    EXPECT_NEAR(s.duals[0], 1.0, 1e-12);
}

TEST(Solve, UpperOnlyVariable) {
    // max y s.t. y <= 4 via min -y, y in (-inf, 4]
    LpBuilder b;
    b.add_variable(-1.0, -kInf, 4.0);
    const LpSolution s = solve(b.build());
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.primal[0], 4.0, 1e-12);
}

TEST(Solve, RedundantRowsAreTolerated) {
    Matrix a(2, 2);
    a << 1, 1, 2, 2;
    Vector b(2);
    b << 1, 2;
    Vector c(2);
    c << 1, 2;
    const LpSolution s = solve(LinearProgram(c, a, b));
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.objective_value, 1.0, 1e-12);
}

TEST(Solve, DeterministicBasis) {
    Rng r(5);
    const LinearProgram lp = random_lp(r, 6, 4);
    const LpSolution a = solve(lp);
    const LpSolution b = solve(lp);
    EXPECT_EQ(a.basis, b.basis);
    EXPECT_EQ(a.status, b.status);
}

TEST(Solve, NegativeRhsDualSign) {
    // min x s.t. -x = -3  -> x = 3, dual -1
    const LpSolution s = solve(LinearProgram(Vector::Ones(1), -Matrix::Ones(1, 1), Vector::Constant(1, -3.0)));
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.duals[0], -1.0, 1e-12);
}

TEST(Enumerate, ThreeColumnSystem) {
    const auto v = enumerate_vertices(three_column());
    // All three single-column bases of x1 + x2 + s = 1 are feasible.
    EXPECT_EQ(v.size(), 3u);
    double best = kInf;
    int at_best = 0;
    for (const auto& [x, val] : v) {
        best = std::min(best, val);
        if (std::abs(val + 1.0) < 1e-12) ++at_best;
    }
    EXPECT_NEAR(best, -1.0, 1e-12);
    EXPECT_EQ(at_best, 2);
}

TEST(Enumerate, SingleVertex) {
    const auto v = enumerate_vertices(single(1.0));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NEAR(v[0].first[0], 1.0, 1e-12);
}

TEST(Enumerate, InfeasibleIsEmpty) { EXPECT_TRUE(enumerate_vertices(single(-1.0)).empty()); }

TEST(Enumerate, ScaleLimit) {
    LinearProgram lp(Vector::Ones(13), Matrix::Ones(1, 13), Vector::Ones(1));
    EXPECT_THROW(enumerate_vertices(lp), ScaleError);
}

TEST(Property, SolveMatchesEnumerationAndStrongDuality) {
    Rng r(2024);
    int optimal = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(r.uniform() * 6);
        const int m = 1 + static_cast<int>(r.uniform() * 4);
        LinearProgram lp = random_lp(r, n, m);
        lp.var_upper.setConstant(kInf);
        const LpSolution s = solve(lp);
        const auto verts = enumerate_vertices(lp);
        ASSERT_FALSE(verts.empty());
        if (s.status == LpStatus::Unbounded) continue;
        ASSERT_TRUE(s.optimal());
        ++optimal;
        double best = kInf;
        for (const auto& v : verts) best = std::min(best, v.second);
        EXPECT_NEAR(s.objective_value, best, 1e-9);
        const double gap = lp.objective.dot(s.primal) - lp.eq_rhs.dot(s.duals);
        EXPECT_LE(std::abs(gap), 1e-8 * (1.0 + std::abs(s.objective_value)));
        EXPECT_LE((lp.eq_matrix * s.primal - lp.eq_rhs).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_GE(s.primal.minCoeff(), 0.0);
    }
    EXPECT_GT(optimal, 100);
}

// Degenerate, bounded LPs with free columns pinned by copy rows, the shape of
// spliced stage problems. Both pricing rules must agree.
TEST(Property, PivotRulesAgreeOnDegenerateFreeColumns) {
    Rng r(909);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 6 + static_cast<int>(r.uniform() * 10);
        const int m = 2 + static_cast<int>(r.uniform() * 6);
        const int free_cols = 1 + static_cast<int>(r.uniform() * 3);
        const int cols = n + free_cols;
        Matrix a = Matrix::Zero(m + free_cols, cols);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < cols; ++j)
                if (r.uniform() < 0.4) a(i, j) = (r.uniform() - 0.5) * std::pow(10.0, 4.0 * r.uniform() - 2.0);
        Vector x0 = Vector::Zero(cols);
        for (int j = 0; j < n; ++j)
            if (r.uniform() < 0.4) x0[j] = r.uniform();
        for (int k = 0; k < free_cols; ++k) {
            a(m + k, n + k) = 1.0;
            x0[n + k] = r.uniform() < 0.5 ? 0.0 : r.uniform() - 0.5;
        }
        Vector c(cols);
        for (int j = 0; j < cols; ++j) c[j] = r.uniform() - 0.3;
        LinearProgram lp(c, a, a * x0);
        for (int j = 0; j < n; ++j) lp.var_upper[j] = x0[j] + 2.0;
        for (int k = 0; k < free_cols; ++k) lp.free_mask[static_cast<std::size_t>(n + k)] = true;

        const LpSolution bland = solve(lp);
        LpOptions o;
        o.pivot_rule = PivotRule::DantzigBlandFallback;
        const LpSolution dantzig = solve(lp, o);
        ASSERT_TRUE(bland.optimal()) << "trial " << trial << " " << to_string(bland.status);
        ASSERT_TRUE(dantzig.optimal()) << "trial " << trial;
        EXPECT_NEAR(bland.objective_value, dantzig.objective_value, 1e-7 * (1.0 + std::abs(bland.objective_value)));
        EXPECT_LE((lp.eq_matrix * bland.primal - lp.eq_rhs).cwiseAbs().maxCoeff(), 1e-7);
    }
}
