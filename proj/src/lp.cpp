#include "ddsddp/lp.hpp"

#include "ddsddp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ddsddp {

LinearProgram::LinearProgram(Vector c, Matrix a, Vector b)
    : objective(std::move(c)), eq_matrix(std::move(a)), eq_rhs(std::move(b)) {
    var_lower = Vector::Zero(objective.size());
    var_upper = Vector::Constant(objective.size(), kInf);
    free_mask.assign(static_cast<std::size_t>(objective.size()), false);
}

void LinearProgram::validate() const {
    const auto n = objective.size();
    if (eq_matrix.rows() != eq_rhs.size())
        throw DimensionError("eq_matrix has " + std::to_string(eq_matrix.rows()) +
                             " rows but eq_rhs has " + std::to_string(eq_rhs.size()) + " entries");
    if (eq_matrix.cols() != n && !(eq_matrix.rows() == 0 && eq_matrix.cols() == 0))
        throw DimensionError("eq_matrix has " + std::to_string(eq_matrix.cols()) +
                             " columns but objective has " + std::to_string(n) + " entries");
    if (var_lower.size() != n || var_upper.size() != n ||
        free_mask.size() != static_cast<std::size_t>(n))
        throw DimensionError("bound vectors must match the objective length");
    for (Eigen::Index j = 0; j < n; ++j) {
        if (free_mask[static_cast<std::size_t>(j)]) continue;
        if (var_lower[j] > var_upper[j])
            throw DimensionError("variable " + std::to_string(j) + " has lower bound above upper bound");
        if (var_lower[j] == kInf || var_upper[j] == -kInf)
            throw DimensionError("variable " + std::to_string(j) + " has an empty domain");
    }
}

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

namespace {

// x_original[j] = base + pos_sign * x'[pos] - x'[neg]   (neg < 0 when unused)
struct VarMap {
    int pos = -1;
    int neg = -1;
    double base = 0.0;
    double pos_sign = 1.0;
};

struct StandardForm {
    Matrix a;
    Vector b;
    Vector c;
    double offset = 0.0;
    Eigen::Index original_rows = 0;
    std::vector<VarMap> vars;

    Vector recover(const Vector& xs) const {
        Vector x(static_cast<Eigen::Index>(vars.size()));
        for (std::size_t j = 0; j < vars.size(); ++j) {
            const auto& v = vars[j];
            double value = v.base + v.pos_sign * xs[v.pos];
            if (v.neg >= 0) value -= xs[v.neg];
            x[static_cast<Eigen::Index>(j)] = value;
        }
        return x;
    }
};

StandardForm to_standard_form(const LinearProgram& lp) {
    lp.validate();
    const Eigen::Index m = lp.num_rows();
    const Eigen::Index n = lp.num_vars();

    struct Column {
        Eigen::Index source;  // original column, -1 for an upper-bound slack
        double sign;
        double cost;
    };
    std::vector<Column> cols;
    std::vector<std::pair<int, double>> upper_rows;  // (standard column, u - l)

    StandardForm sf;
    sf.original_rows = m;
    sf.vars.resize(static_cast<std::size_t>(n));
    Vector b = lp.eq_rhs;
    double offset = lp.offset;

    for (Eigen::Index j = 0; j < n; ++j) {
        VarMap& v = sf.vars[static_cast<std::size_t>(j)];
        const double c = lp.objective[j];
        const double lo = lp.var_lower[j];
        const double up = lp.var_upper[j];
        const bool is_free = lp.free_mask[static_cast<std::size_t>(j)] ||
                             (std::isinf(lo) && std::isinf(up));
        if (is_free) {
            v.pos = static_cast<int>(cols.size());
            cols.push_back({j, 1.0, c});
            v.neg = static_cast<int>(cols.size());
            cols.push_back({j, -1.0, -c});
        } else if (std::isfinite(lo)) {
            v.pos = static_cast<int>(cols.size());
            v.base = lo;
            cols.push_back({j, 1.0, c});
            if (lo != 0.0) {
                if (m > 0) b -= lp.eq_matrix.col(j) * lo;
                offset += c * lo;
            }
            if (std::isfinite(up)) upper_rows.emplace_back(v.pos, up - lo);
        } else {
            v.pos = static_cast<int>(cols.size());
            v.base = up;
            v.pos_sign = -1.0;
            cols.push_back({j, -1.0, -c});
            if (m > 0) b -= lp.eq_matrix.col(j) * up;
            offset += c * up;
        }
    }
    const auto first_slack = static_cast<Eigen::Index>(cols.size());
    for (std::size_t k = 0; k < upper_rows.size(); ++k) cols.push_back({-1, 1.0, 0.0});

    const Eigen::Index rows = m + static_cast<Eigen::Index>(upper_rows.size());
    const auto ncols = static_cast<Eigen::Index>(cols.size());
    sf.a = Matrix::Zero(rows, ncols);
    sf.b = Vector::Zero(rows);
    sf.c = Vector::Zero(ncols);
    if (m > 0) sf.b.head(m) = b;
    for (Eigen::Index k = 0; k < ncols; ++k) {
        const auto& col = cols[static_cast<std::size_t>(k)];
        sf.c[k] = col.cost;
        if (col.source >= 0 && m > 0) sf.a.block(0, k, m, 1) = col.sign * lp.eq_matrix.col(col.source);
    }
    for (std::size_t k = 0; k < upper_rows.size(); ++k) {
        const auto r = m + static_cast<Eigen::Index>(k);
        sf.a(r, upper_rows[k].first) = 1.0;
        sf.a(r, first_slack + static_cast<Eigen::Index>(k)) = 1.0;
        sf.b[r] = upper_rows[k].second;
    }
    sf.offset = offset;
    return sf;
}

class RevisedSimplex {
public:
    static constexpr int kStallLimit = 50;

    RevisedSimplex(const Matrix& a, const Vector& b, const LpOptions& opt, std::vector<int> twin)
        : a_(a), b_(b), opt_(opt), m_(a.rows()), n_(a.cols()), twin_(std::move(twin)) {}

    LpStatus run(const Vector& c, LpSolution& out) {
        // Phase 1 on artificials e_r, one per row, with b >= 0.
        basis_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index r = 0; r < m_; ++r) basis_[static_cast<std::size_t>(r)] = static_cast<int>(n_ + r);
        binv_ = Matrix::Identity(m_, m_);
        xb_ = b_;
        is_basic_.assign(static_cast<std::size_t>(n_), false);

        Vector phase1_cost = Vector::Zero(n_);
        if (iterate(phase1_cost, 1.0) != LpStatus::Optimal)
            throw SolverError("phase 1 reported unbounded");
        double infeasibility = 0.0;
        for (Eigen::Index r = 0; r < m_; ++r)
            if (basis_[static_cast<std::size_t>(r)] >= n_) infeasibility += std::abs(xb_[r]);
        const double scale = 1.0 + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
        if (infeasibility > opt_.feas_tol * scale) {
            out.iterations = iterations_;
            return LpStatus::Infeasible;
        }
        drive_out_artificials();

        const LpStatus status = iterate(c, 0.0);
        out.iterations = iterations_;
        if (status != LpStatus::Optimal) return status;

        refactor();
        out.primal = Vector::Zero(n_);
        for (Eigen::Index r = 0; r < m_; ++r) {
            const int j = basis_[static_cast<std::size_t>(r)];
            if (j < n_) out.primal[j] = std::max(0.0, xb_[r]);
        }
        out.duals = binv_.transpose() * basic_costs(c, 0.0);
        out.basis = basis_;
        return LpStatus::Optimal;
    }

private:
    auto column(int j) const { return a_.col(j); }

    // Nonbasic, and not the split twin of a basic column.
    bool blocked(Eigen::Index j) const {
        if (is_basic_[static_cast<std::size_t>(j)]) return true;
        const int t = twin_[static_cast<std::size_t>(j)];
        return t >= 0 && is_basic_[static_cast<std::size_t>(t)];
    }

    Vector basic_costs(const Vector& c, double artificial_cost) const {
        Vector cb(m_);
        for (Eigen::Index r = 0; r < m_; ++r) {
            const int j = basis_[static_cast<std::size_t>(r)];
            cb[r] = j < n_ ? c[j] : artificial_cost;
        }
        return cb;
    }

    void refactor() {
        if (m_ == 0) return;
        Matrix bmat(m_, m_);
        for (Eigen::Index r = 0; r < m_; ++r) {
            const int j = basis_[static_cast<std::size_t>(r)];
            if (j < n_)
                bmat.col(r) = a_.col(j);
            else
                bmat.col(r) = Vector::Unit(m_, j - n_);
        }
        Eigen::PartialPivLU<Matrix> lu(bmat);
        binv_ = lu.inverse();
        if (!binv_.allFinite()) throw SolverError("singular basis during refactorization");
        xb_ = binv_ * b_;
        since_refactor_ = 0;
    }

    void pivot(Eigen::Index r, int entering, const Vector& u) {
        const double theta = std::max(0.0, xb_[r]) / u[r];
        xb_ -= theta * u;
        xb_[r] = theta;
        const Eigen::RowVectorXd pivot_row = binv_.row(r) / u[r];
        binv_.noalias() -= u * pivot_row;
        binv_.row(r) = pivot_row;
        const int leaving = basis_[static_cast<std::size_t>(r)];
        if (leaving < n_) is_basic_[static_cast<std::size_t>(leaving)] = false;
        basis_[static_cast<std::size_t>(r)] = entering;
        is_basic_[static_cast<std::size_t>(entering)] = true;
        ++iterations_;
        if (++since_refactor_ >= opt_.refactor_every) refactor();
        if (iterations_ > opt_.max_iterations) throw SolverError("simplex iteration limit reached");
    }

    LpStatus iterate(const Vector& c, double artificial_cost) {
        int degenerate_run = 0;
        for (;;) {
            const Vector y = binv_.transpose() * basic_costs(c, artificial_cost);
            const Vector reduced = c - a_.transpose() * y;

            const bool use_bland = opt_.pivot_rule == PivotRule::Bland || degenerate_run > kStallLimit;
            int entering = -1;
            double best = -opt_.opt_tol;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (blocked(j)) continue;
                if (reduced[j] < best) {
                    entering = static_cast<int>(j);
                    if (use_bland) break;
                    best = reduced[j];
                }
            }
            if (entering < 0) return LpStatus::Optimal;

            const Vector u = binv_ * column(entering);
            const double pivot_floor = opt_.pivot_tol * std::max(1.0, m_ > 0 ? u.cwiseAbs().maxCoeff() : 0.0);
            Eigen::Index leave = -1;
            double best_ratio = kInf;
            if (degenerate_run > kStallLimit) {
                // Stalled: plain Bland leaving rule.
                for (Eigen::Index r = 0; r < m_; ++r) {
                    if (u[r] <= pivot_floor) continue;
                    const double ratio = std::max(0.0, xb_[r]) / u[r];
                    const double tie = 1e-12 * (1.0 + best_ratio);
                    if (leave < 0 || ratio < best_ratio - tie ||
                        (ratio <= best_ratio + tie &&
                         basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
                        if (leave < 0 || ratio < best_ratio - tie) best_ratio = ratio;
                        leave = r;
                    }
                }
            } else {
                // Harris: bound with relaxed rows, then the largest pivot under the bound.
                double bound = kInf;
                for (Eigen::Index r = 0; r < m_; ++r)
                    if (u[r] > pivot_floor) bound = std::min(bound, (std::max(0.0, xb_[r]) + opt_.feas_tol) / u[r]);
                double best_u = 0.0;
                for (Eigen::Index r = 0; r < m_; ++r) {
                    if (u[r] <= pivot_floor) continue;
                    const double ratio = std::max(0.0, xb_[r]) / u[r];
                    if (ratio > bound) continue;
                    if (leave < 0 || u[r] > best_u ||
                        (u[r] == best_u &&
                         basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
                        best_u = u[r];
                        leave = r;
                    }
                }
                if (leave >= 0) best_ratio = std::max(0.0, xb_[leave]) / u[leave];
            }
            if (leave < 0) return LpStatus::Unbounded;
            degenerate_run = best_ratio <= opt_.feas_tol ? degenerate_run + 1 : 0;
            pivot(leave, entering, u);
        }
    }

    void drive_out_artificials() {
        for (Eigen::Index r = 0; r < m_; ++r) {
            if (basis_[static_cast<std::size_t>(r)] < n_) continue;
            const Eigen::RowVectorXd row = binv_.row(r) * a_;
            int best = -1;
            double best_abs = 1e-9;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (blocked(j)) continue;
                if (std::abs(row[j]) > best_abs) {
                    best_abs = std::abs(row[j]);
                    best = static_cast<int>(j);
                }
            }
            // A row with no candidate is redundant; its artificial stays basic at zero.
            if (best < 0) continue;
            const Vector u = binv_ * column(best);
            const double keep = xb_[r];
            xb_[r] = 0.0;
            pivot(r, best, u);
            (void)keep;
        }
    }

    const Matrix& a_;
    const Vector& b_;
    const LpOptions& opt_;
    Eigen::Index m_;
    Eigen::Index n_;
    std::vector<int> basis_;
    std::vector<bool> is_basic_;
    Matrix binv_;
    Vector xb_;
    std::vector<int> twin_;
    int iterations_ = 0;
    int since_refactor_ = 0;
};

}  // namespace

LpSolution solve(const LinearProgram& lp, const LpOptions& options) {
    StandardForm sf = to_standard_form(lp);
    const Eigen::Index m = sf.a.rows();

    Vector row_sign = Vector::Ones(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        if (sf.b[r] < 0.0) {
            row_sign[r] = -1.0;
            sf.b[r] = -sf.b[r];
            sf.a.row(r) *= -1.0;
        }
    }

    LpSolution out;
    std::vector<int> twin(static_cast<std::size_t>(sf.a.cols()), -1);
    for (const auto& v : sf.vars)
        if (v.neg >= 0) {
            twin[static_cast<std::size_t>(v.pos)] = v.neg;
            twin[static_cast<std::size_t>(v.neg)] = v.pos;
        }
    RevisedSimplex simplex(sf.a, sf.b, options, std::move(twin));
    out.status = simplex.run(sf.c, out);
    if (out.status != LpStatus::Optimal) {
        out.primal.resize(0);
        out.duals.resize(0);
        return out;
    }
    out.objective_value = sf.c.dot(out.primal) + sf.offset;
    out.duals = out.duals.cwiseProduct(row_sign).head(sf.original_rows).eval();
    out.primal = sf.recover(out.primal);
    return out;
}

std::vector<std::pair<Vector, double>> enumerate_vertices(const LinearProgram& lp, double tol) {
    const StandardForm sf = to_standard_form(lp);
    const Eigen::Index m = sf.a.rows();
    const Eigen::Index n = sf.a.cols();
    if (n > 12 || m > 8)
        throw ScaleError("enumerate_vertices is limited to 12 variables and 8 rows, got " +
                         std::to_string(n) + " and " + std::to_string(m));

    std::vector<std::pair<Vector, double>> out;
    auto consider = [&](const Vector& xs) {
        if (m > 0 && (sf.a * xs - sf.b).cwiseAbs().maxCoeff() > tol * (1.0 + sf.b.cwiseAbs().maxCoeff()))
            return;
        for (const auto& [seen, value] : out) {
            (void)value;
            if ((seen - xs).cwiseAbs().maxCoeff() <= tol * (1.0 + seen.cwiseAbs().maxCoeff())) return;
        }
        out.emplace_back(xs, sf.c.dot(xs) + sf.offset);
    };

    // Work on an independent subset of rows; dependent rows are rechecked in `consider`.
    std::vector<Eigen::Index> rows;
    {
        Matrix picked(0, n);
        for (Eigen::Index r = 0; r < m; ++r) {
            Matrix trial(picked.rows() + 1, n);
            trial << picked, sf.a.row(r);
            Eigen::FullPivLU<Matrix> lu(trial);
            lu.setThreshold(1e-10);
            if (lu.rank() == trial.rows()) {
                picked = trial;
                rows.push_back(r);
            }
        }
    }
    const auto k = static_cast<Eigen::Index>(rows.size());
    if (k == 0) {
        consider(Vector::Zero(n));
    } else {
        Matrix sub_a(k, n);
        Vector sub_b(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            sub_a.row(i) = sf.a.row(rows[static_cast<std::size_t>(i)]);
            sub_b[i] = sf.b[rows[static_cast<std::size_t>(i)]];
        }
        std::vector<bool> mask(static_cast<std::size_t>(n), false);
        std::fill(mask.end() - k, mask.end(), true);
        do {
            std::vector<Eigen::Index> cols;
            for (Eigen::Index j = 0; j < n; ++j)
                if (mask[static_cast<std::size_t>(j)]) cols.push_back(j);
            Matrix basis(k, k);
            for (Eigen::Index i = 0; i < k; ++i) basis.col(i) = sub_a.col(cols[static_cast<std::size_t>(i)]);
            Eigen::FullPivLU<Matrix> lu(basis);
            lu.setThreshold(1e-10);
            if (lu.rank() < k) continue;
            const Vector xb = lu.solve(sub_b);
            if (xb.minCoeff() < -tol) continue;
            Vector xs = Vector::Zero(n);
            for (Eigen::Index i = 0; i < k; ++i) xs[cols[static_cast<std::size_t>(i)]] = std::max(0.0, xb[i]);
            consider(xs);
        } while (std::next_permutation(mask.begin(), mask.end()));
    }

    for (auto& [x, value] : out) x = sf.recover(x);
    return out;
}

int LpBuilder::add_variable(double cost, double lower, double upper) {
    cost_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    free_.push_back(false);
    return num_vars() - 1;
}

int LpBuilder::add_free_variable(double cost) {
    cost_.push_back(cost);
    lower_.push_back(-kInf);
    upper_.push_back(kInf);
    free_.push_back(true);
    return num_vars() - 1;
}

int LpBuilder::add_row(const std::vector<std::pair<int, double>>& entries, double rhs) {
    rows_.push_back(entries);
    rhs_.push_back(rhs);
    return num_rows() - 1;
}

void LpBuilder::add_to_row(int row, int col, double coef) {
    rows_.at(static_cast<std::size_t>(row)).emplace_back(col, coef);
}

void LpBuilder::set_rhs(int row, double rhs) { rhs_.at(static_cast<std::size_t>(row)) = rhs; }

void LpBuilder::add_objective(int col, double cost) { cost_.at(static_cast<std::size_t>(col)) += cost; }

LinearProgram LpBuilder::build() const {
    const auto n = static_cast<Eigen::Index>(cost_.size());
    const auto m = static_cast<Eigen::Index>(rhs_.size());
    LinearProgram lp;
    lp.objective = Eigen::Map<const Vector>(cost_.data(), n);
    lp.var_lower = Eigen::Map<const Vector>(lower_.data(), n);
    lp.var_upper = Eigen::Map<const Vector>(upper_.data(), n);
    lp.free_mask = free_;
    lp.eq_rhs = Eigen::Map<const Vector>(rhs_.data(), m);
    lp.eq_matrix = Matrix::Zero(m, n);
    for (Eigen::Index r = 0; r < m; ++r)
        for (const auto& [col, coef] : rows_[static_cast<std::size_t>(r)]) {
            if (col < 0 || col >= n) throw DimensionError("row entry refers to unknown column " + std::to_string(col));
            lp.eq_matrix(r, col) += coef;
        }
    lp.offset = offset_;
    return lp;
}

}  // namespace ddsddp
