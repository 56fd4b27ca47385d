#pragma once

#include "ddsddp/kernel.hpp"
#include "ddsddp/lp.hpp"

#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

namespace ddsddp {

/// l >= intercept + gradient'(x - anchor)
struct Cut {
    Vector gradient;
    double intercept = 0.0;
    Vector anchor;
    int iteration_k = 0;

    double value_at(const Vector& x) const { return intercept + gradient.dot(x - anchor); }
};

/// Cuts keyed by (stage t of the approximated cost-to-go, conditioning node j).
/// The root node of stage 2 uses j = 0.
class CutPool {
public:
    /// Returns false when an identical cut is already stored.
    bool add_cut(int t, int j, Cut cut);
    const std::vector<Cut>& cuts(int t, int j) const;
    /// max over cuts, -inf when empty.
    double evaluate(int t, int j, const Vector& x) const;
    /// Largest |gradient|_inf over every cut of stage t.
    double max_gradient_norm(int t) const;
    std::size_t size() const;
    /// One line per cut: t,j,k,intercept,gradient...
    void dump(std::ostream& out) const;

private:
    std::map<std::pair<int, int>, std::vector<Cut>> pools_;
    std::map<int, Eigen::Index> dims_;
};

/// Weighted combination of per-scenario values and duals at `anchor`.
Cut aggregate_backward(const Vector& values, const std::vector<Vector>& duals, const ConditionalWeights& weights,
                       const Vector& anchor, int iteration_k = 0);

struct EnvelopePoint {
    Vector anchor;
    double value = 0.0;
};

/// Evaluated points of the upper approximation, keyed like CutPool, plus the
/// per-stage penalty M_t.
class EnvelopeStore {
public:
    void envelope_update(int t, int j, const Vector& anchor, double value);
    const std::vector<EnvelopePoint>& points(int t, int j) const;
    void set_penalty(int t, double m) { penalty_[t] = m; }
    double penalty(int t) const;
    /// min sum theta_k V_k + M |y|_1 over the convex hull; +inf when empty.
    double evaluate(int t, int j, const Vector& x) const;
    std::size_t size() const;

private:
    std::map<std::pair<int, int>, std::vector<EnvelopePoint>> stores_;
    std::map<int, Eigen::Index> dims_;
    std::map<int, double> penalty_;
};

/// Adds l with `cost` and one row per cut over the state columns. With no
/// cuts, l >= lower_box. Returns the column of l.
int splice_lower(LpBuilder& lp, const std::vector<int>& state_cols, const std::vector<Cut>& cuts,
                 double lower_box = -1e9, double cost = 1.0);

/// Adds theta, y+, y- and the coupling rows for the envelope points. With no
/// points the objective gains the constant upper_box.
void splice_upper(LpBuilder& lp, const std::vector<int>& state_cols, const std::vector<EnvelopePoint>& points,
                  double penalty_M, double upper_box = 1e9);

}  // namespace ddsddp
