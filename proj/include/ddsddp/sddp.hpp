#pragma once

#include "ddsddp/cuts.hpp"
#include "ddsddp/dro.hpp"
#include "ddsddp/kernel.hpp"
#include "ddsddp/lp.hpp"
#include "ddsddp/scenarios.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ddsddp {

enum class Algorithm { DD, RDD };
enum class GapMode { Absolute, Relative };

struct SolveConfig {
    Algorithm algorithm = Algorithm::DD;
    double epsilon = 1e-6;
    GapMode gap_mode = GapMode::Relative;
    int max_iterations = 100;
    int forward_paths_per_iter = 1;
    std::uint64_t seed = 1;
    KernelConfig kernel;
    /// Radius used by RDD.
    double rho = 0.0;
    /// Uniform 1/N transitions everywhere (stagewise-independent baseline).
    bool stagewise_independent = false;
    /// M_t by stage t; stages not listed use the cut-gradient rule.
    std::map<int, double> M_override;
    double penalty_safety = 10.0;
    double lower_box = -1e9;
    double upper_box = 1e9;
    bool compute_upper_bound = true;
    LpOptions lp;

    void validate() const;
};

struct IterationRecord {
    int k = 0;
    double lb = 0.0;
    double ub = 0.0;
    double gap = 0.0;
    double wall_time = 0.0;
    int cuts_added = 0;
    int envelope_points_added = 0;
    std::vector<ForwardScenario> scenarios;
};

/// Per-stage transition weights. node(t, j) is the distribution of the
/// stage-t index given index j at stage t-1 (j ignored at t = 2).
class TransitionWeights {
public:
    TransitionWeights() = default;
    TransitionWeights(const TrajectorySet& traj, const KernelConfig& kernel, bool stagewise_independent);

    const ConditionalWeights& node(int t, int j) const;
    /// Weights over the stage-(t+1) scenarios given a stage-t feature.
    ConditionalWeights at_feature(int t, const Vector& feature) const;
    double bandwidth() const { return h_; }

private:
    int n_ = 0;
    double h_ = 1.0;
    bool uniform_ = false;
    KernelConfig kernel_;
    ConditionalWeights root_;
    std::vector<std::vector<Vector>> anchors_;             // anchors_[t-1][i], stage-t features
    std::vector<std::vector<ConditionalWeights>> table_;   // table_[t-2][j]
};

/// Per-scenario cuts of one backward step: scenario i of stage t at a common anchor.
struct ScenarioCutBatch {
    Vector anchor;
    Vector intercepts;  // N
    Matrix gradients;   // N x state dimension
    int iteration_k = 0;

    Cut scenario_cut(int i) const;
};

struct Policy {
    TrajectorySet train;
    SolveConfig config;
    TransitionWeights weights;
    /// Aggregated cuts per (t, node of stage t-1).
    CutPool node_cuts;
    /// Per-scenario cuts by stage t.
    std::map<int, std::vector<ScenarioCutBatch>> scenario_cuts;
    EnvelopeStore envelopes;
    Vector first_stage;
    double lb = 0.0;
    double ub = kInf;
};

struct RunResult {
    Policy policy;
    std::vector<IterationRecord> records;
    Vector first_stage_solution;
    bool converged = false;
};

bool gap_closed(double lb, double ub, double epsilon, GapMode mode);
double gap_value(double lb, double ub, GapMode mode);

RunResult run(const TrajectorySet& traj, const SolveConfig& config);

/// Root lower bound of the stored approximation, re-solved.
double root_lower_bound(const Policy& policy);

/// Root value with one epigraph column per stage-2 scenario (multi-cut).
/// `robust` adds the DRO block with the policy's radius, otherwise the
/// columns are averaged with weights 1/N.
double root_value_scenario_models(const Policy& policy, bool robust);

/// Cuts for the stage-(t+1) cost-to-go at a stage-t node whose transition
/// weights are `nominal`: one per stored batch, combined with `nominal` (DD)
/// or with the worst-case weights of the batch intercepts (RDD).
std::vector<Cut> node_cuts_for(const Policy& policy, int t_next, const ConditionalWeights& nominal);

enum class EvaluationModel {
    /// One combined cut per stored batch (see node_cuts_for).
    AggregatedCuts,
    /// Epigraph column per training scenario; DRO block for RDD.
    ScenarioModels,
};

struct EvaluationReport {
    std::vector<double> path_objectives;  // NaN for failed paths
    std::vector<int> failed_paths;
    int evaluated = 0;
    double mean = 0.0;
    double variance = 0.0;
    double stddev = 0.0;
    double mean_utility = 0.0;  // utility = -objective
    double sharpe = 0.0;        // mean_utility / stddev, 0 when stddev = 0
};

EvaluationReport evaluate_policy_out_of_sample(const Policy& policy, const TrajectorySet& test,
                                               EvaluationModel model = EvaluationModel::AggregatedCuts);

/// Monolithic LP over the recombining tree. N^(T-1) <= 256.
double extensive_form_oracle(const TrajectorySet& traj, const KernelConfig& kernel,
                             bool stagewise_independent = false);

/// Constants of the out-of-sample bound. Vectors indexed by stage:
/// sigma, L, delta for t = 2..T (entry t-2); D, d for s = 1..T-1 (entry s-1).
struct BoundInputs {
    std::vector<double> sigma;
    std::vector<double> L;
    std::vector<double> D;
    std::vector<int> d;
    double g_min = 1.0;
    std::vector<double> delta;
    double eta = 0.01;
    double N = 100;
    double h = 1.0;
    int p = 1;
    int T = 2;
};

double generalization_bound(const BoundInputs& in);

}  // namespace ddsddp
