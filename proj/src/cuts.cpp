#include "ddsddp/cuts.hpp"

#include "ddsddp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace ddsddp {

namespace {

const std::vector<Cut> kNoCuts;
const std::vector<EnvelopePoint> kNoPoints;

void check_dim(std::map<int, Eigen::Index>& dims, int t, Eigen::Index n, const char* what) {
    auto [it, fresh] = dims.emplace(t, n);
    if (!fresh && it->second != n)
        throw DimensionError(std::string(what) + " at stage " + std::to_string(t) + " has dimension " +
                             std::to_string(n) + ", expected " + std::to_string(it->second));
}

}  // namespace

bool CutPool::add_cut(int t, int j, Cut cut) {
    if (cut.gradient.size() != cut.anchor.size()) throw DimensionError("cut gradient and anchor lengths differ");
    check_dim(dims_, t, cut.gradient.size(), "cut");
    auto& pool = pools_[{t, j}];
    for (const auto& c : pool)
        if (c.intercept == cut.intercept && c.gradient == cut.gradient && c.anchor == cut.anchor) return false;
    pool.push_back(std::move(cut));
    return true;
}

const std::vector<Cut>& CutPool::cuts(int t, int j) const {
    auto it = pools_.find({t, j});
    return it == pools_.end() ? kNoCuts : it->second;
}

double CutPool::evaluate(int t, int j, const Vector& x) const {
    double v = -kInf;
    for (const auto& c : cuts(t, j)) v = std::max(v, c.value_at(x));
    return v;
}

double CutPool::max_gradient_norm(int t) const {
    double m = 0.0;
    for (const auto& [key, pool] : pools_)
        if (key.first == t)
            for (const auto& c : pool)
                if (c.gradient.size() > 0) m = std::max(m, c.gradient.cwiseAbs().maxCoeff());
    return m;
}

std::size_t CutPool::size() const {
    std::size_t n = 0;
    for (const auto& [key, pool] : pools_) n += pool.size();
    return n;
}

void CutPool::dump(std::ostream& out) const {
    char buf[40];
    for (const auto& [key, pool] : pools_)
        for (const auto& c : pool) {
            std::snprintf(buf, sizeof buf, "%.17g", c.intercept);
            out << key.first << ',' << key.second << ',' << c.iteration_k << ',' << buf;
            for (Eigen::Index i = 0; i < c.gradient.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", c.gradient[i]);
                out << ',' << buf;
            }
            out << '\n';
        }
}

Cut aggregate_backward(const Vector& values, const std::vector<Vector>& duals, const ConditionalWeights& weights,
                       const Vector& anchor, int iteration_k) {
    const auto n = values.size();
    if (static_cast<Eigen::Index>(duals.size()) != n || weights.size() != n)
        throw DimensionError("aggregate_backward: values, duals and weights must have the same length");
    Cut cut;
    cut.anchor = anchor;
    cut.iteration_k = iteration_k;
    cut.gradient = Vector::Zero(anchor.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (duals[static_cast<std::size_t>(i)].size() != anchor.size())
            throw DimensionError("aggregate_backward: dual length differs from anchor length");
        cut.gradient += weights[i] * duals[static_cast<std::size_t>(i)];
        cut.intercept += weights[i] * values[i];
    }
    return cut;
}

void EnvelopeStore::envelope_update(int t, int j, const Vector& anchor, double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("envelope value must be finite");
    check_dim(dims_, t, anchor.size(), "envelope point");
    stores_[{t, j}].push_back({anchor, value});
}

const std::vector<EnvelopePoint>& EnvelopeStore::points(int t, int j) const {
    auto it = stores_.find({t, j});
    return it == stores_.end() ? kNoPoints : it->second;
}

double EnvelopeStore::penalty(int t) const {
    auto it = penalty_.find(t);
    return it == penalty_.end() ? 0.0 : it->second;
}

double EnvelopeStore::evaluate(int t, int j, const Vector& x) const {
    const auto& pts = points(t, j);
    if (pts.empty()) return kInf;
    LpBuilder b;
    std::vector<int> state;
    for (Eigen::Index k = 0; k < x.size(); ++k) state.push_back(b.add_free_variable(0.0));
    for (Eigen::Index k = 0; k < x.size(); ++k) b.add_row({{state[static_cast<std::size_t>(k)], 1.0}}, x[k]);
    splice_upper(b, state, pts, penalty(t));
    const LpSolution sol = solve(b.build());
    if (!sol.optimal()) throw SolverError("envelope evaluation failed");
    return sol.objective_value;
}

std::size_t EnvelopeStore::size() const {
    std::size_t n = 0;
    for (const auto& [key, pts] : stores_) n += pts.size();
    return n;
}

int splice_lower(LpBuilder& lp, const std::vector<int>& state_cols, const std::vector<Cut>& cuts,
                 double lower_box, double cost) {
    // lower_box only stands in for an empty pool; l is free once cuts exist.
    const int ell = cuts.empty() ? lp.add_variable(cost, lower_box) : lp.add_free_variable(cost);
    for (const auto& c : cuts) {
        if (c.gradient.size() != static_cast<Eigen::Index>(state_cols.size()))
            throw DimensionError("cut dimension differs from the stage state");
        std::vector<std::pair<int, double>> row{{ell, 1.0}};
        for (std::size_t k = 0; k < state_cols.size(); ++k) {
            const double g = c.gradient[static_cast<Eigen::Index>(k)];
            if (g != 0.0) row.emplace_back(state_cols[k], -g);
        }
        row.emplace_back(lp.add_variable(0.0), -1.0);
        lp.add_row(row, c.intercept - c.gradient.dot(c.anchor));
    }
    return ell;
}

void splice_upper(LpBuilder& lp, const std::vector<int>& state_cols, const std::vector<EnvelopePoint>& points,
                  double penalty_M, double upper_box) {
    if (points.empty()) {
        lp.add_offset(upper_box);
        return;
    }
    const auto d = state_cols.size();
    std::vector<int> coupling(d);
    for (std::size_t k = 0; k < d; ++k) coupling[k] = lp.add_row({{state_cols[k], -1.0}}, 0.0);
    const int convexity = lp.add_row({}, 1.0);
    for (const auto& p : points) {
        if (p.anchor.size() != static_cast<Eigen::Index>(d))
            throw DimensionError("envelope point dimension differs from the stage state");
        const int theta = lp.add_variable(p.value);
        for (std::size_t k = 0; k < d; ++k) {
            const double a = p.anchor[static_cast<Eigen::Index>(k)];
            if (a != 0.0) lp.add_to_row(coupling[k], theta, a);
        }
        lp.add_to_row(convexity, theta, 1.0);
    }
    for (std::size_t k = 0; k < d; ++k) {
        lp.add_to_row(coupling[k], lp.add_variable(penalty_M), 1.0);
        lp.add_to_row(coupling[k], lp.add_variable(penalty_M), -1.0);
    }
}

}  // namespace ddsddp
