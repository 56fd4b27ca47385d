#pragma once

#include "ddsddp/lp.hpp"
#include "ddsddp/scenarios.hpp"

#include <vector>

namespace ddsddp {

struct StageProblem {
    int stage_t = 1;
    StageDatum datum;
    StageDims dims;
};

/// Stage LP under construction: columns [0, vars) are x, followed by the
/// free copy variables z. Splices append further columns and rows.
struct StageLp {
    LpBuilder builder;
    std::vector<int> state_cols;  // first state_out columns of x
    std::vector<int> z_cols;
    std::vector<int> copy_rows;   // rows z = incoming state

    /// c'x for the x block of a solved LP.
    double stage_cost(const LpSolution& sol, const Vector& c) const;
    /// Duals of the copy rows: the subgradient in the incoming state.
    Vector copy_duals(const LpSolution& sol) const;
    Vector state(const LpSolution& sol) const;
};

/// min c'x  s.t.  A x + B z = b,  z = incoming_state,  x >= 0.
StageLp assemble_stage_lp(const StageProblem& problem, const Vector& incoming_state);

/// Solves and maps Infeasible/Unbounded to ModelError with `context`.
LpSolution solve_stage(const StageLp& lp, const std::string& context, const LpOptions& options = {});

/// u(w) = min_k (intercepts[k] + slopes[k] w); slopes >= 0 and nonincreasing.
struct PiecewiseUtility {
    std::vector<double> intercepts;
    std::vector<double> slopes;

    void validate() const;
    double operator()(double w) const;

    /// Chords of 1 - exp(-w) on [lo, hi] with `segments` equal pieces.
    static PiecewiseUtility exponential_chords(int segments = 5, double lo = 0.0, double hi = 3.0);
    static PiecewiseUtility linear();
};

struct PortfolioConfig {
    int assets_K = 3;
    int horizon_T = 4;
    double fee_buy = 0.0;
    double fee_sell = 0.0;
    double risk_free = 1.0;  // gross rate per stage
    double initial_wealth = 1.0;
    PiecewiseUtility utility = PiecewiseUtility::exponential_chords();
};

/// Features are the K gross asset returns. State is (positions, cash).
InstanceTemplate build_portfolio_instance(const PortfolioConfig& config);

/// Single-item inventory with random demand and order cost (feature =
/// (demand, order cost)). Emergency purchases and disposal keep every stage
/// feasible; capacity keeps the state bounded.
struct InventoryConfig {
    int horizon_T = 3;
    double capacity = 10.0;
    double holding = 0.2;
    double emergency = 6.0;
    double disposal = 0.5;
    double terminal_salvage = 0.0;
};

InstanceTemplate build_inventory_instance(const InventoryConfig& config);

}  // namespace ddsddp
