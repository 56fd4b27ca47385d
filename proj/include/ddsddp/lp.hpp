#pragma once

#include <Eigen/Dense>

#include <limits>
#include <utility>
#include <vector>

namespace ddsddp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min objective'x + offset  s.t.  eq_matrix x = eq_rhs,  var_lower <= x <= var_upper.
///
/// Variables flagged in `free_mask` ignore their bounds. Finite upper bounds
/// are turned into explicit rows by the solver; there is no bound flipping.
struct LinearProgram {
    Vector objective;
    Matrix eq_matrix;
    Vector eq_rhs;
    Vector var_lower;
    Vector var_upper;
    std::vector<bool> free_mask;
    double offset = 0.0;

    LinearProgram() = default;
    /// Standard form: bounds default to [0, +inf).
    LinearProgram(Vector c, Matrix a, Vector b);

    Eigen::Index num_vars() const { return objective.size(); }
    Eigen::Index num_rows() const { return eq_rhs.size(); }

    /// Throws DimensionError when the fields disagree.
    void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Vector primal;
    /// One multiplier per equality row; d(objective)/d(eq_rhs) at the optimum.
    Vector duals;
    double objective_value = 0.0;
    /// Basic columns of the internal standard form, in row order.
    std::vector<int> basis;
    int iterations = 0;

    bool optimal() const { return status == LpStatus::Optimal; }
};

enum class PivotRule {
    /// Smallest-index entering and leaving variable. Never cycles.
    Bland,
    /// Most negative reduced cost, switching to Bland after a run of
    /// degenerate pivots.
    DantzigBlandFallback,
};

struct LpOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    double pivot_tol = 1e-10;
    double dual_gap_tol = 1e-8;
    int max_iterations = 200000;
    int refactor_every = 64;
    PivotRule pivot_rule = PivotRule::Bland;
};

/// Two-phase revised simplex on a dense explicit basis inverse.
LpSolution solve(const LinearProgram& lp, const LpOptions& options = {});

/// Every basic feasible solution of `lp` (deduplicated by primal point) with
/// its objective value. Oracle for tests; limited to 12 variables and 8 rows
/// after conversion to standard form.
std::vector<std::pair<Vector, double>> enumerate_vertices(const LinearProgram& lp,
                                                          double tol = 1e-9);

/// Incremental construction of a LinearProgram from sparse row entries.
class LpBuilder {
public:
    int add_variable(double cost, double lower = 0.0, double upper = kInf);
    int add_free_variable(double cost);
    /// Appends `sum coef*x = rhs` and returns the row index.
    int add_row(const std::vector<std::pair<int, double>>& entries, double rhs);
    void add_to_row(int row, int col, double coef);
    void set_rhs(int row, double rhs);
    void add_objective(int col, double cost);
    void add_offset(double value) { offset_ += value; }

    int num_vars() const { return static_cast<int>(cost_.size()); }
    int num_rows() const { return static_cast<int>(rhs_.size()); }

    LinearProgram build() const;

private:
    std::vector<double> cost_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<bool> free_;
    std::vector<double> rhs_;
    std::vector<std::vector<std::pair<int, double>>> rows_;
    double offset_ = 0.0;
};

}  // namespace ddsddp
