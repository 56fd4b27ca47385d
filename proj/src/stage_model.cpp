#include "ddsddp/stage_model.hpp"

#include "ddsddp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddsddp {

double StageLp::stage_cost(const LpSolution& sol, const Vector& c) const { return c.dot(sol.primal.head(c.size())); }

Vector StageLp::copy_duals(const LpSolution& sol) const {
    Vector g(static_cast<Eigen::Index>(copy_rows.size()));
    for (std::size_t k = 0; k < copy_rows.size(); ++k) g[static_cast<Eigen::Index>(k)] = sol.duals[copy_rows[k]];
    return g;
}

Vector StageLp::state(const LpSolution& sol) const {
    Vector x(static_cast<Eigen::Index>(state_cols.size()));
    for (std::size_t k = 0; k < state_cols.size(); ++k) x[static_cast<Eigen::Index>(k)] = sol.primal[state_cols[k]];
    return x;
}

StageLp assemble_stage_lp(const StageProblem& problem, const Vector& incoming_state) {
    const StageDims& d = problem.dims;
    const StageDatum& s = problem.datum;
    s.check(d, static_cast<int>(s.feature.size()), "stage " + std::to_string(problem.stage_t));
    if (incoming_state.size() != d.state_in)
        throw DimensionError("incoming state has length " + std::to_string(incoming_state.size()) + ", stage " +
                             std::to_string(problem.stage_t) + " expects " + std::to_string(d.state_in));
    StageLp lp;
    for (int j = 0; j < d.vars; ++j) lp.builder.add_variable(s.c[j]);
    for (int k = 0; k < d.state_in; ++k) lp.z_cols.push_back(lp.builder.add_free_variable(0.0));
    for (int k = 0; k < d.state_out; ++k) lp.state_cols.push_back(k);
    for (int r = 0; r < d.rows; ++r) {
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < d.vars; ++j)
            if (s.A(r, j) != 0.0) row.emplace_back(j, s.A(r, j));
        for (int k = 0; k < d.state_in; ++k)
            if (s.B(r, k) != 0.0) row.emplace_back(lp.z_cols[static_cast<std::size_t>(k)], s.B(r, k));
        lp.builder.add_row(row, s.b[r]);
    }
    for (int k = 0; k < d.state_in; ++k)
        lp.copy_rows.push_back(lp.builder.add_row({{lp.z_cols[static_cast<std::size_t>(k)], 1.0}}, incoming_state[k]));
    return lp;
}

LpSolution solve_stage(const StageLp& lp, const std::string& context, const LpOptions& options) {
    LpSolution sol = solve(lp.builder.build(), options);
    if (sol.status == LpStatus::Infeasible)
        throw ModelError("stage problem infeasible (relatively complete recourse violated) at " + context);
    if (sol.status == LpStatus::Unbounded) throw ModelError("stage problem unbounded at " + context);
    return sol;
}

void PiecewiseUtility::validate() const {
    if (slopes.empty() || slopes.size() != intercepts.size())
        throw std::invalid_argument("utility needs matching, nonempty intercepts and slopes");
    for (std::size_t k = 0; k < slopes.size(); ++k) {
        if (slopes[k] < 0.0) throw std::invalid_argument("utility slopes must be nonnegative");
        if (k > 0 && slopes[k] > slopes[k - 1]) throw std::invalid_argument("utility slopes must be nonincreasing");
    }
}

double PiecewiseUtility::operator()(double w) const {
    double u = kInf;
    for (std::size_t k = 0; k < slopes.size(); ++k) u = std::min(u, intercepts[k] + slopes[k] * w);
    return u;
}

PiecewiseUtility PiecewiseUtility::exponential_chords(int segments, double lo, double hi) {
    if (segments < 1 || !(hi > lo)) throw std::invalid_argument("exponential_chords: bad segment spec");
    PiecewiseUtility u;
    auto f = [](double w) { return 1.0 - std::exp(-w); };
    const double step = (hi - lo) / segments;
    for (int k = 0; k < segments; ++k) {
        const double w0 = lo + k * step;
        const double w1 = w0 + step;
        const double slope = (f(w1) - f(w0)) / step;
        u.slopes.push_back(slope);
        u.intercepts.push_back(f(w0) - slope * w0);
    }
    return u;
}

PiecewiseUtility PiecewiseUtility::linear() { return {{0.0}, {1.0}}; }

InstanceTemplate build_portfolio_instance(const PortfolioConfig& cfg) {
    const int K = cfg.assets_K;
    if (K < 1 || cfg.horizon_T < 2) throw std::invalid_argument("portfolio needs K >= 1 and T >= 2");
    if (cfg.fee_buy < 0.0 || cfg.fee_sell < 0.0) throw std::invalid_argument("portfolio fees must be nonnegative");
    cfg.utility.validate();
    const int T = cfg.horizon_T;
    const int segs = static_cast<int>(cfg.utility.slopes.size());
    const int trade_vars = 3 * K + 1;  // x (K), cash, buys (K), sells (K)

    InstanceTemplate inst;
    inst.horizon_T = T;
    inst.feature_dim = K;
    for (int t = 1; t <= T; ++t) {
        StageDims d;
        d.state_in = t == 1 ? 0 : K + 1;
        if (t < T) {
            d.vars = trade_vars;
            d.rows = K + 1;
            d.state_out = K + 1;
        } else {
            d.vars = K + 1 + 2 + segs;  // x, v+, v-, segment slacks
            d.rows = K + 1 + segs;
            d.state_out = 0;
        }
        inst.dims.push_back(d);
    }

    inst.make = [cfg, K, T, segs, dims = inst.dims](int t, const Vector& xi) {
        if (xi.size() != K) throw DimensionError("portfolio feature must have K entries");
        const StageDims& d = dims[static_cast<std::size_t>(t - 1)];
        StageDatum s;
        s.feature = xi;
        s.c = Vector::Zero(d.vars);
        s.A = Matrix::Zero(d.rows, d.vars);
        s.B = Matrix::Zero(d.rows, d.state_in);
        s.b = Vector::Zero(d.rows);
        if (t < T) {
            for (int i = 0; i < K; ++i) {
                s.A(i, i) = 1.0;
                s.A(i, K + 1 + i) = -1.0;
                s.A(i, 2 * K + 1 + i) = 1.0;
            }
            s.A(K, K) = 1.0;
            for (int i = 0; i < K; ++i) {
                s.A(K, K + 1 + i) = 1.0 + cfg.fee_buy;
                s.A(K, 2 * K + 1 + i) = -(1.0 - cfg.fee_sell);
            }
            if (t == 1) {
                s.b[K] = cfg.initial_wealth;
            } else {
                for (int i = 0; i < K; ++i) s.B(i, i) = -xi[i];
                s.B(K, K) = -cfg.risk_free;
            }
        } else {
            for (int i = 0; i < K; ++i) {
                s.A(i, i) = 1.0;
                s.B(i, i) = -xi[i];
            }
            s.A(K, K) = 1.0;
            s.B(K, K) = -cfg.risk_free;
            const int vp = K + 1;
            const int vm = K + 2;
            s.c[vp] = -1.0;
            s.c[vm] = 1.0;
            for (int k = 0; k < segs; ++k) {
                const int r = K + 1 + k;
                s.A(r, vp) = 1.0;
                s.A(r, vm) = -1.0;
                for (int i = 0; i <= K; ++i) s.A(r, i) = -cfg.utility.slopes[static_cast<std::size_t>(k)];
                s.A(r, K + 3 + k) = 1.0;
                s.b[r] = cfg.utility.intercepts[static_cast<std::size_t>(k)];
            }
        }
        return s;
    };
    return inst;
}

InstanceTemplate build_inventory_instance(const InventoryConfig& cfg) {
    if (cfg.horizon_T < 1 || !(cfg.capacity > 0.0)) throw std::invalid_argument("inventory needs T >= 1, capacity > 0");
    const int T = cfg.horizon_T;
    InstanceTemplate inst;
    inst.horizon_T = T;
    inst.feature_dim = 2;
    // x (level, state), u (order), q (emergency), r (disposal), s (capacity slack)
    for (int t = 1; t <= T; ++t) inst.dims.push_back({5, 2, t == 1 ? 0 : 1, t == T ? 0 : 1});
    inst.make = [cfg, T](int t, const Vector& xi) {
        if (xi.size() != 2) throw DimensionError("inventory feature is (demand, order cost)");
        StageDatum s;
        s.feature = xi;
        const double hold = t == T ? cfg.holding - cfg.terminal_salvage : cfg.holding;
        s.c = Vector(5);
        s.c << hold, xi[1], cfg.emergency, cfg.disposal, 0.0;
        s.A = Matrix::Zero(2, 5);
        s.A.row(0) << 1.0, -1.0, -1.0, 1.0, 0.0;
        s.A.row(1) << 1.0, 0.0, 0.0, 0.0, 1.0;
        s.B = Matrix::Zero(2, t == 1 ? 0 : 1);
        if (t > 1) s.B(0, 0) = -1.0;
        s.b = Vector(2);
        s.b << -xi[0], cfg.capacity;
        return s;
    };
    return inst;
}

}  // namespace ddsddp
