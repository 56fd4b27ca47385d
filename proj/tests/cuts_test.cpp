#include "ddsddp/cuts.hpp"
#include "ddsddp/errors.hpp"
#include "ddsddp/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace ddsddp;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Cut cut1(double g, double v, double anchor) { return {v1(g), v, v1(anchor), 0}; }

// min over the spliced terms with the state pinned to x.
double pinned(const Vector& x, const std::vector<Cut>* cuts, const std::vector<EnvelopePoint>* pts, double m) {
    LpBuilder b;
    std::vector<int> state;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        state.push_back(b.add_free_variable(0.0));
        b.add_row({{state.back(), 1.0}}, x[k]);
    }
    if (cuts) splice_lower(b, state, *cuts);
    if (pts) splice_upper(b, state, *pts, m);
    const LpSolution s = solve(b.build());
    EXPECT_TRUE(s.optimal());
    return s.objective_value;
}

}  // namespace

TEST(CutPool, ConstantCut) {
    CutPool pool;
    pool.add_cut(2, 0, cut1(0.0, 5.0, 0.0));
    for (double x : {-3.0, 0.0, 7.5}) EXPECT_EQ(pool.evaluate(2, 0, v1(x)), 5.0);
}

TEST(CutPool, AbsoluteValue) {
    CutPool pool;
    pool.add_cut(2, 0, cut1(1.0, 0.0, 0.0));
    pool.add_cut(2, 0, cut1(-1.0, 0.0, 0.0));
    for (double x : {-2.0, -0.5, 0.0, 1.25}) EXPECT_EQ(pool.evaluate(2, 0, v1(x)), std::abs(x));
    const auto cuts = pool.cuts(2, 0);
    EXPECT_NEAR(pinned(v1(-1.5), &cuts, nullptr, 0.0), 1.5, 1e-12);
}

TEST(CutPool, DuplicateIsIdempotent) {
    CutPool pool;
    EXPECT_TRUE(pool.add_cut(3, 1, cut1(2.0, 1.0, 0.5)));
    const double before = pool.evaluate(3, 1, v1(4.0));
    EXPECT_FALSE(pool.add_cut(3, 1, cut1(2.0, 1.0, 0.5)));
    EXPECT_EQ(pool.evaluate(3, 1, v1(4.0)), before);
    EXPECT_EQ(pool.cuts(3, 1).size(), 1u);
}

TEST(CutPool, DimensionChecks) {
    CutPool pool;
    pool.add_cut(2, 0, cut1(1.0, 0.0, 0.0));
    EXPECT_THROW(pool.add_cut(2, 1, Cut{Vector::Zero(2), 0.0, Vector::Zero(2), 0}), DimensionError);
    EXPECT_THROW(pool.add_cut(2, 0, Cut{Vector::Zero(2), 0.0, Vector::Zero(1), 0}), DimensionError);
}

TEST(CutPool, EmptyIsMinusInfinity) {
    CutPool pool;
    EXPECT_EQ(pool.evaluate(2, 0, v1(0.0)), -kInf);
}

TEST(Aggregate, IdenticalItems) {
    const Cut c = aggregate_backward(Vector::Constant(3, 7.0), {v1(2), v1(2), v1(2)}, ConditionalWeights::uniform(3), v1(0));
    EXPECT_NEAR(c.gradient[0], 2.0, 1e-15);
    EXPECT_NEAR(c.intercept, 7.0, 1e-15);
}

TEST(Aggregate, ConvexCombination) {
    Vector w(2), v(2);
    w << 0.25, 0.75;
    v << 4, 8;
    const Cut c = aggregate_backward(v, {v1(1), v1(2)}, {w}, v1(0));
    EXPECT_DOUBLE_EQ(c.gradient[0], 1.75);
    EXPECT_DOUBLE_EQ(c.intercept, 7.0);
}

TEST(Aggregate, DegenerateWeights) {
    Vector w(2), v(2);
    w << 1, 0;
    v << 3, 99;
    const Cut c = aggregate_backward(v, {v1(5), v1(-5)}, {w}, v1(0));
    EXPECT_EQ(c.gradient[0], 5.0);
    EXPECT_EQ(c.intercept, 3.0);
}

TEST(Aggregate, LengthMismatch) {
    EXPECT_THROW(aggregate_backward(Vector::Ones(2), {v1(1)}, ConditionalWeights::uniform(2), v1(0)), DimensionError);
}

TEST(Envelope, EmptyIsInfinite) {
    EnvelopeStore store;
    EXPECT_EQ(store.evaluate(2, 0, v1(1.0)), kInf);
}

TEST(Envelope, SinglePointPenalty) {
    EnvelopeStore store;
    store.envelope_update(2, 0, v1(0.0), 2.0);
    store.set_penalty(2, 10.0);
    EXPECT_NEAR(store.evaluate(2, 0, v1(1.0)), 12.0, 1e-12);
}

TEST(Envelope, ConvexCombinationOfTwoPoints) {
    EnvelopeStore store;
    store.envelope_update(2, 0, v1(0.0), 0.0);
    store.envelope_update(2, 0, v1(2.0), 2.0);
    store.set_penalty(2, 1e6);
    EXPECT_NEAR(store.evaluate(2, 0, v1(1.0)), 1.0, 1e-9);
}

TEST(Envelope, NeverAboveStoredValue) {
    Rng r(4);
    EnvelopeStore store;
    store.set_penalty(2, 3.0);
    for (int k = 0; k < 8; ++k) {
        Vector a(2);
        a << r.uniform(), r.uniform();
        store.envelope_update(2, 0, a, 5.0 * r.uniform());
    }
    for (const auto& p : store.points(2, 0)) EXPECT_LE(store.evaluate(2, 0, p.anchor), p.value + 1e-12);
}

TEST(Splice, EmptyPoolUsesLowerBox) {
    const std::vector<Cut> none;
    EXPECT_NEAR(pinned(v1(0.3), &none, nullptr, 0.0), -1e9, 1e-3);
}

TEST(Splice, EmptyStoreUsesUpperBox) {
    const std::vector<EnvelopePoint> none;
    EXPECT_NEAR(pinned(v1(0.3), nullptr, &none, 1.0), 1e9, 1e-3);
}

TEST(Splice, BoundsAgreeAtVisitedAnchor) {
    // Stage value min{x : x + z = 2, z = xbar} at xbar = 1 gives V = 1, pi = -1.
    const std::vector<Cut> cuts{cut1(-1.0, 1.0, 1.0)};
    const std::vector<EnvelopePoint> pts{{v1(1.0), 1.0}};
    EXPECT_NEAR(pinned(v1(1.0), &cuts, nullptr, 0.0), pinned(v1(1.0), nullptr, &pts, 10.0), 1e-8);
}

TEST(Property, MonotoneInIterations) {
    Rng r(21);
    CutPool pool;
    EnvelopeStore store;
    store.set_penalty(2, 4.0);
    auto f = [](double x) { return (x - 1.0) * (x - 1.0); };
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(-1.0 + 0.15 * k);
    std::vector<double> lo(grid.size(), -kInf), hi(grid.size(), kInf);
    for (int it = 0; it < 15; ++it) {
        const double a = -1.0 + 3.0 * r.uniform();
        pool.add_cut(2, 0, cut1(2.0 * (a - 1.0), f(a), a));
        store.envelope_update(2, 0, v1(a), f(a));
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double l = pool.evaluate(2, 0, v1(grid[g]));
            const double u = store.evaluate(2, 0, v1(grid[g]));
            EXPECT_GE(l, lo[g] - 1e-12);
            EXPECT_LE(u, hi[g] + 1e-12);
            EXPECT_LE(l, f(grid[g]) + 1e-12);
            lo[g] = l;
            hi[g] = u;
        }
    }
}

TEST(Property, MidpointConvexity) {
    Rng r(22);
    CutPool pool;
    EnvelopeStore store;
    store.set_penalty(2, 5.0);
    for (int k = 0; k < 10; ++k) {
        Vector a(2), g(2);
        a << r.uniform(), r.uniform();
        g << 2.0 * r.uniform() - 1.0, 2.0 * r.uniform() - 1.0;
        pool.add_cut(2, 0, {g, r.uniform(), a, k});
        store.envelope_update(2, 0, a, r.uniform());
    }
    for (int trial = 0; trial < 100; ++trial) {
        Vector x(2), y(2);
        x << r.uniform(), r.uniform();
        y << r.uniform(), r.uniform();
        const Vector m = 0.5 * (x + y);
        EXPECT_LE(pool.evaluate(2, 0, m), 0.5 * (pool.evaluate(2, 0, x) + pool.evaluate(2, 0, y)) + 1e-8);
        EXPECT_LE(store.evaluate(2, 0, m), 0.5 * (store.evaluate(2, 0, x) + store.evaluate(2, 0, y)) + 1e-8);
    }
}

TEST(CutPool, DumpFormat) {
    CutPool pool;
    pool.add_cut(2, 0, {v1(-1.5), 2.25, v1(0.0), 3});
    std::ostringstream out;
    pool.dump(out);
    EXPECT_EQ(out.str(), "2,0,3,2.25,-1.5\n");
}
