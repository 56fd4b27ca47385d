#pragma once

#include "ddsddp/kernel.hpp"
#include "ddsddp/lp.hpp"

#include <vector>

namespace ddsddp {

enum class RhoRule { Manual, RateScaled };

/// Polyhedral modified chi-square set around `nominal`:
///   sum_i |w_i - w^_i| / sqrt(w^_i) <= sqrt(N) rho,
///   max_i |w_i - w^_i| / sqrt(w^_i) <= rho,   e'w = 1,  w >= 0.
struct AmbiguityParams {
    double rho = 0.0;
    ConditionalWeights nominal;
    RhoRule rho_rule = RhoRule::Manual;

    void validate() const;
};

/// C / sqrt(N h^p)
double rate_scaled_rho(double c, int n, double h, int p);

/// Nominal weights floored at 1e-300 and renormalized.
Vector floored_nominal(const ConditionalWeights& nominal);

struct InnerMaxResult {
    double value = 0.0;
    ConditionalWeights worst;
};

/// max w'z over the ambiguity set.
InnerMaxResult inner_max_primal(const Vector& z, const AmbiguityParams& params);

/// Satisfy mu_i + zeta_i = psi_i + beta / sqrt(N).
struct DroDualVars {
    double gamma = 0.0;
    double beta = 0.0;
    Vector mu;
    Vector zeta;
    Vector psi;
};

struct DualResult {
    double value = 0.0;
    DroDualVars vars;
};

/// min gamma + rho (beta + sum psi) + sum sqrt(w^_i)(mu_i - zeta_i)
///   s.t. z_i <= gamma + (mu_i - zeta_i) / sqrt(w^_i),  mu + zeta = psi + beta/sqrt(N).
DualResult dualize_inner(const Vector& z, const AmbiguityParams& params);

/// Column indices of the block added by splice_dro.
struct DroBlock {
    int gamma = -1;
    int beta = -1;
    std::vector<int> mu;    // scaled: mu_i / sqrt(w^_i)
    std::vector<int> zeta;  // scaled: zeta_i / sqrt(w^_i)
    std::vector<int> psi;
};

/// Adds the dual block so that the objective gains the worst-case expectation
/// of the epigraph columns `ell_cols`.
DroBlock splice_dro(LpBuilder& lp, const std::vector<int>& ell_cols, const AmbiguityParams& params);

/// sum w z^2 - (sum w z)^2, clamped at 0.
double empirical_conditional_variance(const Vector& z, const ConditionalWeights& w);

struct SandwichReport {
    double lhs = 0.0;  // mean + rho sqrt(V)
    double rhs = 0.0;  // DRO value + rho^2 u_bar
    bool holds = false;
};

/// Requires 0 <= z <= u_bar.
SandwichReport check_vr_sandwich(const Vector& z, const ConditionalWeights& w, double rho, double u_bar);

}  // namespace ddsddp
