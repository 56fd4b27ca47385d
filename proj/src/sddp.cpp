#include "ddsddp/sddp.hpp"

#include "ddsddp/errors.hpp"
#include "ddsddp/stage_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddsddp {

void SolveConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
    if (forward_paths_per_iter < 1) throw std::invalid_argument("forward_paths_per_iter must be at least 1");
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
    if (!(penalty_safety > 0.0)) throw std::invalid_argument("penalty_safety must be positive");
}

bool gap_closed(double lb, double ub, double epsilon, GapMode mode) {
    const double gap = std::abs(ub - lb);
    if (mode == GapMode::Absolute) return gap <= epsilon;
    return gap <= std::max(epsilon * std::min(std::abs(ub), std::abs(lb)), 1e-9);
}

double gap_value(double lb, double ub, GapMode mode) {
    if (mode == GapMode::Absolute) return ub - lb;
    const double scale = std::min(std::abs(ub), std::abs(lb));
    return scale > 0.0 ? (ub - lb) / scale : ub - lb;
}

TransitionWeights::TransitionWeights(const TrajectorySet& traj, const KernelConfig& kernel, bool stagewise_independent)
    : n_(traj.n_paths), uniform_(stagewise_independent), kernel_(kernel), root_(ConditionalWeights::uniform(traj.n_paths)) {
    h_ = kernel.bandwidth(n_, std::max(1, traj.feature_dim));
    kernel_.bandwidth_rule = BandwidthRule::Manual;
    kernel_.bandwidth_h = h_;
    anchors_.resize(static_cast<std::size_t>(traj.horizon_T));
    for (int t = 2; t <= traj.horizon_T; ++t) anchors_[static_cast<std::size_t>(t - 1)] = traj.features(t);
    for (int t = 3; t <= traj.horizon_T; ++t) {
        std::vector<ConditionalWeights> row;
        for (int j = 0; j < n_; ++j) row.push_back(at_feature(t - 1, traj.at(t - 1, j).feature));
        table_.push_back(std::move(row));
    }
}

const ConditionalWeights& TransitionWeights::node(int t, int j) const {
    if (t <= 2) return root_;
    return table_.at(static_cast<std::size_t>(t - 3)).at(static_cast<std::size_t>(j));
}

ConditionalWeights TransitionWeights::at_feature(int t, const Vector& feature) const {
    if (uniform_ || t <= 1) return root_;
    return nw_weights(feature, anchors_.at(static_cast<std::size_t>(t - 1)), kernel_);
}

Cut ScenarioCutBatch::scenario_cut(int i) const {
    return {gradients.row(i).transpose(), intercepts[i], anchor, iteration_k};
}

namespace {

using Clock = std::chrono::steady_clock;

std::string ctx(int k, int t, int i) {
    return "k=" + std::to_string(k) + ", t=" + std::to_string(t) + ", i=" + std::to_string(i);
}

StageLp stage_lp(const TrajectorySet& traj, int t, const StageDatum& datum, const Vector& incoming) {
    return assemble_stage_lp({t, datum, traj.stage_dims(t)}, incoming);
}

const StageDatum& datum_of(const TrajectorySet& traj, int t, int i) { return t == 1 ? traj.stage1 : traj.at(t, i); }

struct Solved {
    double value = 0.0;
    Vector state;
    Vector duals;
    Vector x;
};

Solved solve_lp(const StageLp& lp, const std::string& where, const LpOptions& options) {
    const LpSolution sol = solve_stage(lp, where, options);
    return {sol.objective_value, lp.state(sol), lp.copy_duals(sol), sol.primal};
}

/// Weights for aggregating per-scenario values at a node.
ConditionalWeights combine_weights(const Vector& values, const ConditionalWeights& nominal, const SolveConfig& cfg) {
    if (cfg.algorithm == Algorithm::DD) return nominal;
    return inner_max_primal(values, {cfg.rho, nominal}).worst;
}

double combine_values(const Vector& values, const ConditionalWeights& nominal, const SolveConfig& cfg) {
    if (cfg.algorithm == Algorithm::DD) return nominal.weights.dot(values);
    return inner_max_primal(values, {cfg.rho, nominal}).value;
}

class Driver {
public:
    Driver(const TrajectorySet& traj, const SolveConfig& cfg) : traj_(traj), cfg_(cfg), T_(traj.horizon_T), N_(traj.n_paths) {
        policy_.train = traj;
        policy_.config = cfg;
        policy_.weights = TransitionWeights(traj, cfg.kernel, cfg.stagewise_independent);
    }

    RunResult run() {
        const auto start = Clock::now();
        Rng master(cfg_.seed);
        RunResult result;
        double best_ub = kInf;
        for (int k = 1; k <= cfg_.max_iterations; ++k) {
            k_ = k;
            IterationRecord rec;
            rec.k = k;
            const std::size_t cuts_before = policy_.node_cuts.size();
            const std::size_t points_before = policy_.envelopes.size();

            std::vector<std::vector<Vector>> states;
            for (int path = 0; path < cfg_.forward_paths_per_iter; ++path) {
                const ForwardScenario sc = sample_forward(
                    [&](int t, int prev) { return policy_.weights.node(t, prev); }, T_, master.next());
                states.push_back(forward(sc));
                rec.scenarios.push_back(sc);
            }
            for (int t = T_; t >= 2; --t)
                for (const auto& path_states : states) backward(t, path_states[static_cast<std::size_t>(t - 2)]);

            const Solved root = lower_solve(1, 0, Vector::Zero(0));
            policy_.lb = root.value;
            policy_.first_stage = root.x.head(traj_.stage_dims(1).vars);
            rec.lb = root.value;
            if (cfg_.compute_upper_bound) {
                update_penalty(2);
                best_ub = std::min(best_ub, upper_solve(1, 0, Vector::Zero(0)));
            }
            policy_.ub = best_ub;
            rec.ub = best_ub;
            rec.gap = rec.ub - rec.lb;
            rec.cuts_added = static_cast<int>(policy_.node_cuts.size() - cuts_before);
            rec.envelope_points_added = static_cast<int>(policy_.envelopes.size() - points_before);
            rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
            result.records.push_back(std::move(rec));
            if (cfg_.compute_upper_bound && gap_closed(policy_.lb, best_ub, cfg_.epsilon, cfg_.gap_mode)) {
                result.converged = true;
                break;
            }
        }
        result.first_stage_solution = policy_.first_stage;
        result.policy = std::move(policy_);
        return result;
    }

private:
    // Incoming states x_1 .. x_{T-1} along the sampled path.
    std::vector<Vector> forward(const ForwardScenario& sc) {
        std::vector<Vector> states;
        Vector x = lower_solve(1, 0, Vector::Zero(0)).state;
        states.push_back(x);
        for (int t = 2; t < T_; ++t) {
            x = lower_solve(t, sc.indices[static_cast<std::size_t>(t - 2)], x).state;
            states.push_back(x);
        }
        return states;
    }

    Solved lower_solve(int t, int i, const Vector& incoming) {
        StageLp lp = stage_lp(traj_, t, datum_of(traj_, t, i), incoming);
        if (t < T_) splice_lower(lp.builder, lp.state_cols, policy_.node_cuts.cuts(t + 1, i), cfg_.lower_box);
        return solve_lp(lp, ctx(k_, t, i), cfg_.lp);
    }

    double upper_solve(int t, int i, const Vector& incoming) {
        StageLp lp = stage_lp(traj_, t, datum_of(traj_, t, i), incoming);
        if (t < T_)
            splice_upper(lp.builder, lp.state_cols, policy_.envelopes.points(t + 1, i),
                         policy_.envelopes.penalty(t + 1), cfg_.upper_box);
        return solve_lp(lp, ctx(k_, t, i) + " (upper bound)", cfg_.lp).value;
    }

    void update_penalty(int t) {
        auto it = cfg_.M_override.find(t);
        const double m = it != cfg_.M_override.end()
                             ? it->second
                             : std::max(policy_.envelopes.penalty(t),
                                        cfg_.penalty_safety * policy_.node_cuts.max_gradient_norm(t));
        policy_.envelopes.set_penalty(t, m);
    }

    void backward(int t, const Vector& xbar) {
        if (cfg_.compute_upper_bound && t < T_) update_penalty(t + 1);
        Vector lower(N_), upper(N_);
        std::vector<Vector> duals(static_cast<std::size_t>(N_));
        ScenarioCutBatch batch;
        batch.anchor = xbar;
        batch.iteration_k = k_;
        batch.gradients.resize(N_, xbar.size());
        for (int i = 0; i < N_; ++i) {
            const Solved s = lower_solve(t, i, xbar);
            lower[i] = s.value;
            duals[static_cast<std::size_t>(i)] = s.duals;
            batch.gradients.row(i) = s.duals.transpose();
            if (cfg_.compute_upper_bound) upper[i] = upper_solve(t, i, xbar);
        }
        batch.intercepts = lower;
        policy_.scenario_cuts[t].push_back(std::move(batch));

        const int nodes = t == 2 ? 1 : N_;
        for (int j = 0; j < nodes; ++j) {
            const ConditionalWeights& nominal = policy_.weights.node(t, j);
            const ConditionalWeights w = combine_weights(lower, nominal, cfg_);
            policy_.node_cuts.add_cut(t, j, aggregate_backward(lower, duals, w, xbar, k_));
            if (cfg_.compute_upper_bound)
                policy_.envelopes.envelope_update(t, j, xbar, combine_values(upper, nominal, cfg_));
        }
    }

    const TrajectorySet& traj_;
    const SolveConfig& cfg_;
    int T_;
    int N_;
    int k_ = 0;
    Policy policy_;
};

}  // namespace

RunResult run(const TrajectorySet& traj, const SolveConfig& config) {
    traj.validate();
    config.validate();
    return Driver(traj, config).run();
}

double root_lower_bound(const Policy& policy) {
    const TrajectorySet& traj = policy.train;
    StageLp lp = stage_lp(traj, 1, traj.stage1, Vector::Zero(0));
    if (traj.horizon_T > 1)
        splice_lower(lp.builder, lp.state_cols, policy.node_cuts.cuts(2, 0), policy.config.lower_box);
    return solve_lp(lp, "root", policy.config.lp).value;
}

std::vector<Cut> node_cuts_for(const Policy& policy, int t_next, const ConditionalWeights& nominal) {
    std::vector<Cut> cuts;
    auto it = policy.scenario_cuts.find(t_next);
    if (it == policy.scenario_cuts.end()) return cuts;
    for (const auto& batch : it->second) {
        const ConditionalWeights w = combine_weights(batch.intercepts, nominal, policy.config);
        Cut c;
        c.anchor = batch.anchor;
        c.iteration_k = batch.iteration_k;
        c.gradient = batch.gradients.transpose() * w.weights;
        c.intercept = w.weights.dot(batch.intercepts);
        cuts.push_back(std::move(c));
    }
    return cuts;
}

namespace {

/// Adds the cost-to-go model for stage t+1 to a stage-t LP.
void splice_future(const Policy& policy, StageLp& lp, int t, const ConditionalWeights& nominal, EvaluationModel model,
                   bool robust) {
    const double lower_box = policy.config.lower_box;
    if (model == EvaluationModel::AggregatedCuts) {
        splice_lower(lp.builder, lp.state_cols, node_cuts_for(policy, t + 1, nominal), lower_box);
        return;
    }
    const int n = policy.train.n_paths;
    std::vector<std::vector<Cut>> per(static_cast<std::size_t>(n));
    auto it = policy.scenario_cuts.find(t + 1);
    if (it != policy.scenario_cuts.end())
        for (const auto& batch : it->second)
            for (int i = 0; i < n; ++i) per[static_cast<std::size_t>(i)].push_back(batch.scenario_cut(i));
    std::vector<int> ells;
    for (int i = 0; i < n; ++i)
        ells.push_back(splice_lower(lp.builder, lp.state_cols, per[static_cast<std::size_t>(i)], lower_box,
                                    robust ? 0.0 : nominal[i]));
    if (robust) splice_dro(lp.builder, ells, {policy.config.rho, nominal});
}

}  // namespace

double root_value_scenario_models(const Policy& policy, bool robust) {
    const TrajectorySet& traj = policy.train;
    StageLp lp = stage_lp(traj, 1, traj.stage1, Vector::Zero(0));
    if (traj.horizon_T > 1)
        splice_future(policy, lp, 1, ConditionalWeights::uniform(traj.n_paths), EvaluationModel::ScenarioModels,
                      robust);
    return solve_lp(lp, "root", policy.config.lp).value;
}

EvaluationReport evaluate_policy_out_of_sample(const Policy& policy, const TrajectorySet& test, EvaluationModel model) {
    const TrajectorySet& train = policy.train;
    test.validate();
    if (test.horizon_T != train.horizon_T || test.dims != train.dims || test.feature_dim != train.feature_dim)
        throw DimensionError("test trajectories do not match the training dimensions");
    const int T = train.horizon_T;
    const bool robust = policy.config.algorithm == Algorithm::RDD;

    StageLp root = stage_lp(train, 1, train.stage1, Vector::Zero(0));
    if (T > 1) splice_future(policy, root, 1, ConditionalWeights::uniform(train.n_paths), model, robust);
    const LpSolution root_sol = solve_stage(root, "evaluation root", policy.config.lp);
    const double root_cost = root.stage_cost(root_sol, train.stage1.c);
    const Vector x1 = root.state(root_sol);

    EvaluationReport rep;
    for (int q = 0; q < test.n_paths; ++q) {
        double total = root_cost;
        Vector x = x1;
        bool ok = true;
        for (int t = 2; t <= T && ok; ++t) {
            const StageDatum& d = test.at(t, q);
            StageLp lp = stage_lp(train, t, d, x);
            if (t < T) splice_future(policy, lp, t, policy.weights.at_feature(t, d.feature), model, robust);
            const LpSolution sol = solve(lp.builder.build(), policy.config.lp);
            if (!sol.optimal()) {
                ok = false;
                break;
            }
            total += lp.stage_cost(sol, d.c);
            x = lp.state(sol);
        }
        if (!ok) {
            rep.failed_paths.push_back(q);
            rep.path_objectives.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        rep.path_objectives.push_back(total);
    }
    double sum = 0.0, sq = 0.0;
    for (double v : rep.path_objectives)
        if (!std::isnan(v)) {
            sum += v;
            ++rep.evaluated;
        }
    if (rep.evaluated > 0) {
        rep.mean = sum / rep.evaluated;
        for (double v : rep.path_objectives)
            if (!std::isnan(v)) sq += (v - rep.mean) * (v - rep.mean);
        rep.variance = sq / rep.evaluated;
        rep.stddev = std::sqrt(rep.variance);
        rep.mean_utility = -rep.mean;
        rep.sharpe = rep.stddev > 0.0 ? rep.mean_utility / rep.stddev : 0.0;
    }
    return rep;
}

double extensive_form_oracle(const TrajectorySet& traj, const KernelConfig& kernel, bool stagewise_independent) {
    traj.validate();
    const int T = traj.horizon_T;
    const int N = traj.n_paths;
    const double leaves = std::pow(static_cast<double>(N), T - 1);
    if (leaves > 256.0)
        throw ScaleError("extensive form limited to N^(T-1) <= 256, got " + std::to_string(static_cast<long long>(leaves)));
    const TransitionWeights W(traj, kernel, stagewise_independent);

    struct Node {
        int scenario;
        double prob;
        int first_col;
    };
    LpBuilder b;
    auto add_node = [&](int t, int scenario, double prob, const Node* parent) {
        const StageDatum& d = t == 1 ? traj.stage1 : traj.at(t, scenario);
        const StageDims& dims = traj.stage_dims(t);
        Node node{scenario, prob, b.num_vars()};
        for (int j = 0; j < dims.vars; ++j) b.add_variable(prob * d.c[j]);
        for (int r = 0; r < dims.rows; ++r) {
            std::vector<std::pair<int, double>> row;
            for (int j = 0; j < dims.vars; ++j)
                if (d.A(r, j) != 0.0) row.emplace_back(node.first_col + j, d.A(r, j));
            for (int k = 0; k < dims.state_in; ++k)
                if (d.B(r, k) != 0.0) row.emplace_back(parent->first_col + k, d.B(r, k));
            b.add_row(row, d.b[r]);
        }
        return node;
    };

    std::vector<Node> level{add_node(1, 0, 1.0, nullptr)};
    for (int t = 2; t <= T; ++t) {
        std::vector<Node> next;
        for (const Node& parent : level) {
            const ConditionalWeights& w = W.node(t, parent.scenario);
            for (int i = 0; i < N; ++i) next.push_back(add_node(t, i, parent.prob * w[i], &parent));
        }
        level = std::move(next);
    }
    const LpSolution sol = solve(b.build());
    if (sol.status != LpStatus::Optimal)
        throw ModelError(std::string("extensive form is ") + to_string(sol.status));
    return sol.objective_value;
}

}  // namespace ddsddp
