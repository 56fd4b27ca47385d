#include "ddsddp/cli.hpp"

#include "ddsddp/crossval.hpp"
#include "ddsddp/errors.hpp"
#include "ddsddp/scenarios.hpp"
#include "ddsddp/sddp.hpp"
#include "ddsddp/stage_model.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace ddsddp {

using nlohmann::json;

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

namespace {

struct Options {
    std::string config;
    std::string data;
    std::string test_data;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> algorithm;
    std::optional<double> rho;
    std::optional<double> epsilon;
    std::optional<int> max_iters;
    std::optional<int> paths;
    bool dump_cuts = false;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json read_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config " + path + ": " + e.what());
    }
}

Vector to_vector(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix to_matrix(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = n == 0 ? 0 : static_cast<Eigen::Index>(rows[0].size());
    Matrix a(n, m);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != m)
            throw DimensionError("ragged matrix in config");
        for (Eigen::Index c = 0; c < m; ++c) a(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    return a;
}

/// Fills config sections from CLI overrides so the manifest snapshot is complete.
void apply_overrides(json& cfg, const Options& o) {
    json& s = cfg["solver"];
    if (!s.is_object()) s = json::object();
    if (o.seed) s["seed"] = *o.seed;
    if (o.algorithm) s["algorithm"] = *o.algorithm;
    if (o.rho) {
        s["rho"] = *o.rho;
        s["rho_rule"] = "manual";
    }
    if (o.epsilon) s["epsilon"] = *o.epsilon;
    if (o.max_iters) s["max_iterations"] = *o.max_iters;
}

KernelConfig kernel_config(const json& cfg) {
    KernelConfig k;
    const json kj = cfg.value("kernel", json::object());
    const std::string rule = kj.value("rule", "manual");
    if (rule == "auto") k.bandwidth_rule = BandwidthRule::AutoRate;
    else if (rule != "manual") throw std::invalid_argument("kernel.rule must be 'manual' or 'auto'");
    k.bandwidth_h = kj.value("h", 1.0);
    k.c_h = kj.value("c_h", 1.0);
    return k;
}

SolveConfig solve_config(const json& cfg, const TrajectorySet& traj) {
    SolveConfig c;
    c.kernel = kernel_config(cfg);
    const json s = cfg.value("solver", json::object());
    const std::string alg = s.value("algorithm", "dd");
    if (alg == "rdd") c.algorithm = Algorithm::RDD;
    else if (alg != "dd") throw std::invalid_argument("algorithm must be 'dd' or 'rdd'");
    c.epsilon = s.value("epsilon", c.epsilon);
    const std::string gap = s.value("gap_mode", "relative");
    if (gap == "absolute") c.gap_mode = GapMode::Absolute;
    else if (gap != "relative") throw std::invalid_argument("gap_mode must be 'relative' or 'absolute'");
    c.max_iterations = s.value("max_iterations", c.max_iterations);
    c.forward_paths_per_iter = s.value("forward_paths_per_iter", c.forward_paths_per_iter);
    c.seed = s.value("seed", c.seed);
    c.stagewise_independent = s.value("stagewise_independent", false);
    c.penalty_safety = s.value("penalty_safety", c.penalty_safety);
    c.lower_box = s.value("lower_box", c.lower_box);
    c.upper_box = s.value("upper_box", c.upper_box);
    if (s.contains("M_override"))
        for (const auto& [key, value] : s["M_override"].items()) c.M_override[std::stoi(key)] = value.get<double>();
    const std::string rule = s.value("rho_rule", "manual");
    if (rule == "rate_scaled") {
        const int p = std::max(1, traj.feature_dim);
        c.rho = rate_scaled_rho(s.value("rho_C", 1.0), traj.n_paths, c.kernel.bandwidth(traj.n_paths, p), p);
    } else if (rule == "manual") {
        c.rho = s.value("rho", 0.0);
    } else {
        throw std::invalid_argument("rho_rule must be 'manual' or 'rate_scaled'");
    }
    c.validate();
    return c;
}

InstanceTemplate instance_template(const json& cfg) {
    if (!cfg.contains("instance")) throw std::invalid_argument("config needs an 'instance' section");
    const json& in = cfg["instance"];
    const std::string kind = in.value("kind", "");
    if (kind == "portfolio") {
        PortfolioConfig p;
        p.assets_K = in.value("K", p.assets_K);
        p.horizon_T = in.value("T", p.horizon_T);
        p.fee_buy = in.value("fee_buy", p.fee_buy);
        p.fee_sell = in.value("fee_sell", p.fee_sell);
        p.risk_free = in.value("risk_free", p.risk_free);
        p.initial_wealth = in.value("initial_wealth", p.initial_wealth);
        if (in.contains("utility")) {
            p.utility.intercepts = in["utility"].at("intercepts").get<std::vector<double>>();
            p.utility.slopes = in["utility"].at("slopes").get<std::vector<double>>();
        }
        return build_portfolio_instance(p);
    }
    if (kind == "inventory") {
        InventoryConfig v;
        v.horizon_T = in.value("T", v.horizon_T);
        v.capacity = in.value("capacity", v.capacity);
        v.holding = in.value("holding", v.holding);
        v.emergency = in.value("emergency", v.emergency);
        v.disposal = in.value("disposal", v.disposal);
        v.terminal_salvage = in.value("terminal_salvage", v.terminal_salvage);
        return build_inventory_instance(v);
    }
    throw std::invalid_argument("instance.kind must be 'portfolio' or 'inventory'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::filesystem::path out_dir(const Options& o) {
    std::filesystem::path dir(o.out);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_run_reports(const std::filesystem::path& dir, const RunResult& r, const SolveConfig& c, const Options& o) {
    std::ostringstream it, tm;
    it << "k,LB,UB,gap,cuts_added,envelope_points_added\n";
    tm << "k,time\n";
    for (const auto& rec : r.records) {
        it << rec.k << ',' << fmt(rec.lb) << ',' << fmt(rec.ub) << ',' << fmt(rec.gap) << ',' << rec.cuts_added << ','
           << rec.envelope_points_added << '\n';
        tm << rec.k << ',' << fmt(rec.wall_time) << '\n';
    }
    write_text(dir / "iterations.csv", it.str());
    write_text(dir / "timing.csv", tm.str());

    const auto& last = r.records.back();
    json summary = {
        {"algorithm", c.algorithm == Algorithm::RDD ? "rdd" : "dd"},
        {"status", r.converged ? "converged" : "max_iterations"},
        {"iterations", last.k},
        {"lower_bound", last.lb},
        {"upper_bound", last.ub},
        {"gap", last.gap},
        {"rho", c.rho},
        {"bandwidth", r.policy.weights.bandwidth()},
        {"first_stage", std::vector<double>(r.first_stage_solution.data(),
                                            r.first_stage_solution.data() + r.first_stage_solution.size())},
    };
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    if (o.dump_cuts) {
        std::ostringstream cuts;
        r.policy.node_cuts.dump(cuts);
        write_text(dir / "cuts.txt", cuts.str());
    }
}

void write_manifest(const std::filesystem::path& dir, const json& cfg, const Options& o, const std::string& command,
                    const std::string& started) {
    json files = json::object();
    if (!o.data.empty()) files["data"] = {{"path", o.data}, {"sha256", sha256_file(o.data)}};
    if (!o.test_data.empty()) files["test_data"] = {{"path", o.test_data}, {"sha256", sha256_file(o.test_data)}};
    json manifest = {
        {"command", command},
        {"version", kVersion},
        {"config", cfg},
        {"data", files},
        {"seed", cfg["solver"].value("seed", std::uint64_t{1})},
        {"started_at", started},
        {"finished_at", utc_now()},
    };
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

json report_json(const EvaluationReport& rep) {
    json paths = json::array();
    for (double v : rep.path_objectives) paths.push_back(std::isnan(v) ? json(nullptr) : json(v));
    return {{"evaluated", rep.evaluated}, {"failed_paths", rep.failed_paths}, {"mean_objective", rep.mean},
            {"variance", rep.variance},   {"stddev", rep.stddev},             {"mean_utility", rep.mean_utility},
            {"sharpe", rep.sharpe},       {"path_objectives", paths}};
}

int cmd_solve(const Options& o, std::ostream& out, bool evaluate) {
    const std::string started = utc_now();
    json cfg = read_config(o.config);
    apply_overrides(cfg, o);
    if (o.data.empty()) throw std::invalid_argument("--data is required");
    const TrajectorySet train = load_trajectories_file(o.data);
    const SolveConfig c = solve_config(cfg, train);
    std::optional<TrajectorySet> test;
    if (evaluate) {
        if (o.test_data.empty()) throw std::invalid_argument("--test-data is required");
        test = load_trajectories_file(o.test_data);
    }
    const RunResult r = run(train, c);
    const auto dir = out_dir(o);
    write_run_reports(dir, r, c, o);
    const auto& last = r.records.back();
    out << (r.converged ? "converged" : "max_iterations") << " after " << last.k << " iterations: LB=" << fmt(last.lb)
        << " UB=" << fmt(last.ub) << " gap=" << fmt(last.gap) << '\n';
    if (evaluate) {
        const EvaluationReport rep = evaluate_policy_out_of_sample(r.policy, *test);
        write_text(dir / "evaluation.json", report_json(rep).dump(2) + "\n");
        out << "out-of-sample mean objective " << fmt(rep.mean) << ", variance " << fmt(rep.variance) << " over "
            << rep.evaluated << " paths\n";
    }
    write_manifest(dir, cfg, o, evaluate ? "evaluate" : "solve", started);
    return r.converged ? 0 : 2;
}

int cmd_crossval(const Options& o, std::ostream& out) {
    const std::string started = utc_now();
    json cfg = read_config(o.config);
    apply_overrides(cfg, o);
    if (o.data.empty()) throw std::invalid_argument("--data is required");
    const TrajectorySet traj = load_trajectories_file(o.data);
    const SolveConfig c = solve_config(cfg, traj);
    CrossValConfig cv;
    const json cj = cfg.value("crossval", json::object());
    cv.grid = cj.contains("grid") ? cj["grid"].get<std::vector<double>>() : default_cv_grid();
    cv.folds = cj.value("folds", 5);
    const CrossValResult res = cross_validate_rho(traj, c, cv);
    const auto dir = out_dir(o);
    json j = {{"grid", res.grid},     {"scores", res.scores},        {"best_index", res.best_index},
              {"best_C", res.best_c}, {"best_rho", res.best_rho}, {"folds", cv.folds}};
    write_text(dir / "crossval.json", j.dump(2) + "\n");
    write_manifest(dir, cfg, o, "crossval", started);
    out << "best C=" << fmt(res.best_c) << " rho=" << fmt(res.best_rho) << '\n';
    return 0;
}

int cmd_bound(const Options& o, std::ostream& out) {
    const json cfg = read_config(o.config);
    if (!cfg.contains("bound")) throw std::invalid_argument("config needs a 'bound' section");
    const json& b = cfg["bound"];
    BoundInputs in;
    in.T = b.at("T").get<int>();
    const auto n = static_cast<std::size_t>(std::max(0, in.T - 1));
    auto per_stage = [&](const char* key) {
        const json& v = b.at(key);
        return v.is_array() ? v.get<std::vector<double>>() : std::vector<double>(n, v.get<double>());
    };
    in.sigma = per_stage("sigma");
    in.L = per_stage("L");
    in.D = per_stage("D");
    in.delta = per_stage("delta");
    for (double d : per_stage("d")) in.d.push_back(static_cast<int>(d));
    in.g_min = b.at("g_min").get<double>();
    in.eta = b.at("eta").get<double>();
    in.N = b.at("N").get<double>();
    in.h = b.at("h").get<double>();
    in.p = b.at("p").get<int>();
    out << fmt(generalization_bound(in)) << '\n';
    return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
    const json cfg = read_config(o.config);
    const InstanceTemplate inst = instance_template(cfg);
    if (!cfg.contains("synthetic")) throw std::invalid_argument("config needs a 'synthetic' section");
    const json& s = cfg["synthetic"];
    SyntheticSpec spec;
    spec.mu = to_vector(s.at("mu"));
    spec.phi = to_matrix(s.at("phi"));
    spec.noise_chol = to_matrix(s.at("noise_chol"));
    spec.box_lo = to_vector(s.at("box_lo"));
    spec.box_hi = to_vector(s.at("box_hi"));
    spec.xi1 = to_vector(s.at("xi1"));
    const int paths = o.paths ? *o.paths : s.value("paths", 10);
    const std::uint64_t seed = o.seed ? *o.seed : s.value("seed", std::uint64_t{1});
    const TrajectorySet ts = generate_synthetic_markov(spec, inst, paths, seed);
    if (o.out.empty() || o.out == ".") throw std::invalid_argument("synth needs --out <file.csv>");
    save_trajectories_file(ts, o.out);
    out << "wrote " << paths << " trajectories to " << o.out << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Data-driven SDDP and its distributionally robust variant"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub, bool solver_flags) {
        sub->add_option("--config", o.config, "JSON config file");
        sub->add_option("--out", o.out, "output directory (synth: output file)");
        sub->add_option("--seed", o.seed, "random seed");
        if (!solver_flags) return;
        sub->add_option("--data", o.data, "training trajectory CSV");
        sub->add_option("--algorithm", o.algorithm, "dd or rdd")->check(CLI::IsMember({"dd", "rdd"}));
        sub->add_option("--rho", o.rho, "ambiguity radius");
        sub->add_option("--epsilon", o.epsilon, "gap tolerance");
        sub->add_option("--max-iters", o.max_iters, "iteration limit");
    };
    auto* solve = app.add_subcommand("solve", "run DD-SDDP or RDD-SDDP");
    common(solve, true);
    solve->add_flag("--dump-cuts", o.dump_cuts, "write cuts.txt");
    auto* evaluate = app.add_subcommand("evaluate", "solve, then simulate the policy on test trajectories");
    common(evaluate, true);
    evaluate->add_option("--test-data", o.test_data, "test trajectory CSV");
    evaluate->add_flag("--dump-cuts", o.dump_cuts, "write cuts.txt");
    auto* crossval = app.add_subcommand("crossval", "select the radius constant by k-fold cross-validation");
    common(crossval, true);
    auto* bound = app.add_subcommand("bound", "evaluate the out-of-sample generalization bound");
    common(bound, false);
    auto* synth = app.add_subcommand("synth", "generate synthetic Markov trajectories");
    common(synth, false);
    synth->add_option("--paths", o.paths, "number of trajectories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    try {
        if (*solve) return cmd_solve(o, out, false);
        if (*evaluate) return cmd_solve(o, out, true);
        if (*crossval) return cmd_crossval(o, out);
        if (*bound) return cmd_bound(o, out);
        if (*synth) return cmd_synth(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace ddsddp
