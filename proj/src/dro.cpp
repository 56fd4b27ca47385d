#include "ddsddp/dro.hpp"

#include "ddsddp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddsddp {

void AmbiguityParams::validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("ambiguity radius must be finite and >= 0");
    if (nominal.size() == 0) throw std::invalid_argument("ambiguity set needs nominal weights");
    if ((nominal.weights.array() < 0.0).any() || std::abs(nominal.weights.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("nominal weights must be a probability vector");
}

double rate_scaled_rho(double c, int n, double h, int p) {
    if (!(c >= 0.0) || n < 1 || !(h > 0.0)) throw std::invalid_argument("rate_scaled_rho: bad arguments");
    return c / std::sqrt(n * std::pow(h, p));
}

Vector floored_nominal(const ConditionalWeights& nominal) {
    Vector w = nominal.weights.cwiseMax(1e-300);
    return w / w.sum();
}

InnerMaxResult inner_max_primal(const Vector& z, const AmbiguityParams& params) {
    params.validate();
    const auto n = params.nominal.size();
    if (z.size() != n) throw DimensionError("inner_max_primal: z and nominal lengths differ");
    if (params.rho == 0.0 || n == 1) return {params.nominal.weights.dot(z), params.nominal};

    // w = w^ + sqrt(w^)(p - q), p, q >= 0.
    const Vector w = floored_nominal(params.nominal);
    const Vector sw = w.cwiseSqrt();
    const double rho = params.rho;
    LpBuilder b;
    std::vector<int> p(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        p[static_cast<std::size_t>(i)] = b.add_variable(-sw[i] * z[i]);
        q[static_cast<std::size_t>(i)] = b.add_variable(sw[i] * z[i]);
    }
    std::vector<std::pair<int, double>> balance, total;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int pi = p[static_cast<std::size_t>(i)];
        const int qi = q[static_cast<std::size_t>(i)];
        balance.emplace_back(pi, sw[i]);
        balance.emplace_back(qi, -sw[i]);
        total.emplace_back(pi, 1.0);
        total.emplace_back(qi, 1.0);
        b.add_row({{pi, 1.0}, {qi, 1.0}, {b.add_variable(0.0), 1.0}}, rho);
        b.add_row({{qi, 1.0}, {pi, -1.0}, {b.add_variable(0.0), 1.0}}, sw[i]);
    }
    b.add_row(balance, 0.0);
    total.emplace_back(b.add_variable(0.0), 1.0);
    b.add_row(total, std::sqrt(static_cast<double>(n)) * rho);

    const LpSolution sol = solve(b.build());
    if (!sol.optimal()) throw SolverError("inner maximization LP failed");
    Vector worst(n);
    for (Eigen::Index i = 0; i < n; ++i)
        worst[i] = std::max(0.0, w[i] + sw[i] * (sol.primal[p[static_cast<std::size_t>(i)]] -
                                                 sol.primal[q[static_cast<std::size_t>(i)]]));
    worst /= worst.sum();
    return {worst.dot(z), {worst}};
}

DroBlock splice_dro(LpBuilder& lp, const std::vector<int>& ell_cols, const AmbiguityParams& params) {
    params.validate();
    const auto n = params.nominal.size();
    if (static_cast<Eigen::Index>(ell_cols.size()) != n)
        throw DimensionError("splice_dro: one epigraph column per nominal weight required");
    const Vector w = floored_nominal(params.nominal);
    const double rho = params.rho;
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

    DroBlock blk;
    blk.gamma = lp.add_free_variable(1.0);
    blk.beta = lp.add_variable(rho);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int mu = lp.add_variable(w[i]);
        const int zeta = lp.add_variable(-w[i]);
        const int psi = lp.add_variable(rho);
        blk.mu.push_back(mu);
        blk.zeta.push_back(zeta);
        blk.psi.push_back(psi);
        // gamma + mu - zeta >= ell_i
        lp.add_row({{blk.gamma, 1.0}, {mu, 1.0}, {zeta, -1.0}, {ell_cols[static_cast<std::size_t>(i)], -1.0},
                    {lp.add_variable(0.0), -1.0}},
                   0.0);
        const double s = std::sqrt(w[i]);
        lp.add_row({{mu, s}, {zeta, s}, {psi, -1.0}, {blk.beta, -inv_sqrt_n}}, 0.0);
    }
    return blk;
}

DualResult dualize_inner(const Vector& z, const AmbiguityParams& params) {
    params.validate();
    const auto n = params.nominal.size();
    if (z.size() != n) throw DimensionError("dualize_inner: z and nominal lengths differ");
    LpBuilder b;
    std::vector<int> ell;
    for (Eigen::Index i = 0; i < n; ++i) {
        ell.push_back(b.add_free_variable(0.0));
        b.add_row({{ell.back(), 1.0}}, z[i]);
    }
    const DroBlock blk = splice_dro(b, ell, params);
    const LpSolution sol = solve(b.build());
    if (!sol.optimal()) throw SolverError("dual of the inner maximization failed");

    const Vector sw = floored_nominal(params.nominal).cwiseSqrt();
    DualResult out;
    out.value = sol.objective_value;
    out.vars.gamma = sol.primal[blk.gamma];
    out.vars.beta = sol.primal[blk.beta];
    out.vars.mu.resize(n);
    out.vars.zeta.resize(n);
    out.vars.psi.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out.vars.mu[i] = sw[i] * sol.primal[blk.mu[k]];
        out.vars.zeta[i] = sw[i] * sol.primal[blk.zeta[k]];
        out.vars.psi[i] = sol.primal[blk.psi[k]];
    }
    return out;
}

double empirical_conditional_variance(const Vector& z, const ConditionalWeights& w) {
    if (z.size() != w.size()) throw DimensionError("variance: values and weights lengths differ");
    const double mean = w.weights.dot(z);
    return std::max(0.0, w.weights.dot(z.cwiseAbs2()) - mean * mean);
}

SandwichReport check_vr_sandwich(const Vector& z, const ConditionalWeights& w, double rho, double u_bar) {
    if (z.size() != w.size()) throw DimensionError("sandwich: values and weights lengths differ");
    if (z.size() > 0 && (z.minCoeff() < 0.0 || z.maxCoeff() > u_bar))
        throw std::invalid_argument("sandwich check requires 0 <= z <= u_bar");
    SandwichReport r;
    r.lhs = w.weights.dot(z) + rho * std::sqrt(empirical_conditional_variance(z, w));
    r.rhs = inner_max_primal(z, {rho, w}).value + rho * rho * u_bar;
    r.holds = r.lhs <= r.rhs + 1e-12 * (1.0 + std::abs(r.rhs));
    return r;
}

}  // namespace ddsddp
