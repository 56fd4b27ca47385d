#include "ddsddp/scenarios.hpp"

#include "ddsddp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ddsddp {

namespace {

std::string where(int t, int i) { return "(t=" + std::to_string(t) + ", i=" + std::to_string(i) + ")"; }

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, std::size_t line) {
    if (s.empty()) throw ParseError("empty numeric field", line);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ParseError("not a number: '" + s + "'", line);
    return v;
}

int to_int(const std::string& s, std::size_t line) {
    const double v = to_double(s, line);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ParseError("not an integer: '" + s + "'", line);
    return static_cast<int>(v);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void StageDatum::check(const StageDims& d, int p, const std::string& at) const {
    auto fail = [&](const std::string& what) { throw DimensionError(what + " at " + at); };
    if (c.size() != d.vars) fail("cost length " + std::to_string(c.size()) + " != " + std::to_string(d.vars));
    if (A.rows() != d.rows || A.cols() != d.vars) fail("A has wrong shape");
    if (B.rows() != d.rows || B.cols() != d.state_in) fail("B has wrong shape");
    if (b.size() != d.rows) fail("b has wrong length");
    if (feature.size() != p) fail("feature has wrong length");
}

std::vector<Vector> TrajectorySet::features(int t) const {
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(n_paths));
    for (int i = 0; i < n_paths; ++i) out.push_back(at(t, i).feature);
    return out;
}

TrajectorySet TrajectorySet::subset(const std::vector<int>& paths) const {
    TrajectorySet out = *this;
    out.n_paths = static_cast<int>(paths.size());
    for (auto& stage : out.data) stage.clear();
    for (int t = 2; t <= horizon_T; ++t)
        for (int i : paths) {
            if (i < 0 || i >= n_paths) throw std::out_of_range("subset: path index out of range");
            out.data[static_cast<std::size_t>(t - 2)].push_back(at(t, i));
        }
    return out;
}

void TrajectorySet::validate() const {
    if (horizon_T < 1) throw DimensionError("horizon must be at least 1");
    if (n_paths < 1) throw DimensionError("need at least one trajectory");
    if (static_cast<int>(dims.size()) != horizon_T) throw DimensionError("one StageDims per stage required");
    if (dims[0].state_in != 0) throw DimensionError("stage 1 has no incoming state");
    for (int t = 1; t <= horizon_T; ++t) {
        const auto& d = stage_dims(t);
        if (d.state_out > d.vars || d.state_out < 0) throw DimensionError("state_out exceeds vars at stage " + std::to_string(t));
        if (t > 1 && d.state_in != stage_dims(t - 1).state_out)
            throw DimensionError("state_in at stage " + std::to_string(t) + " differs from previous state_out");
    }
    stage1.check(dims[0], feature_dim, where(1, 0));
    if (static_cast<int>(data.size()) != horizon_T - 1) throw DimensionError("missing stage data");
    for (int t = 2; t <= horizon_T; ++t) {
        if (static_cast<int>(data[static_cast<std::size_t>(t - 2)].size()) != n_paths)
            throw DimensionError("stage " + std::to_string(t) + " does not have N entries");
        for (int i = 0; i < n_paths; ++i) at(t, i).check(stage_dims(t), feature_dim, where(t, i + 1));
    }
}

TrajectorySet load_trajectories(std::istream& in) {
    std::string raw;
    std::size_t lineno = 0;
    TrajectorySet ts;
    bool header = false;
    std::map<std::pair<int, int>, StageDatum> rows;
    std::vector<bool> have_dims;

    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto cells = split(line);
        if (!header) {
            if (cells.size() != 7 || cells[0] != "#ddsddp trajectories" || cells[1] != "T" || cells[3] != "N" ||
                cells[5] != "p")
                throw ParseError("expected header '#ddsddp trajectories,T,<T>,N,<N>,p,<p>'", lineno);
            ts.horizon_T = to_int(cells[2], lineno);
            ts.n_paths = to_int(cells[4], lineno);
            ts.feature_dim = to_int(cells[6], lineno);
            if (ts.horizon_T < 1 || ts.n_paths < 1 || ts.feature_dim < 0)
                throw ParseError("header values out of range", lineno);
            ts.dims.resize(static_cast<std::size_t>(ts.horizon_T));
            have_dims.assign(static_cast<std::size_t>(ts.horizon_T), false);
            header = true;
            continue;
        }
        if (cells[0] == "#stage") {
            if (cells.size() != 6) throw ParseError("stage line needs t,vars,rows,state_in,state_out", lineno);
            const int t = to_int(cells[1], lineno);
            if (t < 1 || t > ts.horizon_T) throw ParseError("stage index out of range", lineno);
            StageDims d{to_int(cells[2], lineno), to_int(cells[3], lineno), to_int(cells[4], lineno),
                        to_int(cells[5], lineno)};
            if (d.vars < 0 || d.rows < 0 || d.state_in < 0 || d.state_out < 0)
                throw ParseError("negative stage dimension", lineno);
            ts.dims[static_cast<std::size_t>(t - 1)] = d;
            have_dims[static_cast<std::size_t>(t - 1)] = true;
            continue;
        }
        if (cells[0].starts_with("#")) continue;
        if (cells.size() < 2) throw ParseError("data row needs path and stage", lineno);
        const int path = to_int(cells[0], lineno);
        const int t = to_int(cells[1], lineno);
        if (t < 1 || t > ts.horizon_T) throw ParseError("stage index out of range", lineno);
        if ((t == 1) != (path == 0) || path < 0 || path > ts.n_paths)
            throw ParseError("path index out of range for stage " + std::to_string(t), lineno);
        if (!have_dims[static_cast<std::size_t>(t - 1)])
            throw ParseError("data row before its #stage line", lineno);
        const StageDims& d = ts.dims[static_cast<std::size_t>(t - 1)];
        const std::size_t expected = 2 + static_cast<std::size_t>(d.vars + d.rows * d.vars + d.rows * d.state_in +
                                                                  d.rows + ts.feature_dim);
        if (cells.size() != expected)
            throw DimensionError("row has " + std::to_string(cells.size()) + " fields, expected " +
                                 std::to_string(expected) + " at " + where(t, path) + " (line " +
                                 std::to_string(lineno) + ")");
        std::size_t k = 2;
        auto next = [&] { return to_double(cells[k++], lineno); };
        StageDatum s;
        s.c.resize(d.vars);
        for (int j = 0; j < d.vars; ++j) s.c[j] = next();
        s.A.resize(d.rows, d.vars);
        for (int r = 0; r < d.rows; ++r)
            for (int j = 0; j < d.vars; ++j) s.A(r, j) = next();
        s.B.resize(d.rows, d.state_in);
        for (int r = 0; r < d.rows; ++r)
            for (int j = 0; j < d.state_in; ++j) s.B(r, j) = next();
        s.b.resize(d.rows);
        for (int r = 0; r < d.rows; ++r) s.b[r] = next();
        s.feature.resize(ts.feature_dim);
        for (int j = 0; j < ts.feature_dim; ++j) s.feature[j] = next();
        if (!rows.emplace(std::make_pair(t, path), std::move(s)).second)
            throw ParseError("duplicate row for " + where(t, path), lineno);
    }
    if (!header) throw ParseError("empty trajectory file", lineno == 0 ? 1 : lineno);
    for (int t = 1; t <= ts.horizon_T; ++t)
        if (!have_dims[static_cast<std::size_t>(t - 1)])
            throw ParseError("missing #stage line for stage " + std::to_string(t), lineno);

    auto take = [&](int t, int i) {
        auto it = rows.find({t, i});
        if (it == rows.end()) throw DimensionError("missing data row at " + where(t, i));
        return std::move(it->second);
    };
    ts.stage1 = take(1, 0);
    ts.data.resize(static_cast<std::size_t>(ts.horizon_T - 1));
    for (int t = 2; t <= ts.horizon_T; ++t)
        for (int i = 1; i <= ts.n_paths; ++i) ts.data[static_cast<std::size_t>(t - 2)].push_back(take(t, i));
    ts.validate();
    return ts;
}

TrajectorySet load_trajectories_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
    return load_trajectories(in);
}

void save_trajectories(const TrajectorySet& ts, std::ostream& out) {
    ts.validate();
    out << "#ddsddp trajectories,T," << ts.horizon_T << ",N," << ts.n_paths << ",p," << ts.feature_dim << '\n';
    for (int t = 1; t <= ts.horizon_T; ++t) {
        const auto& d = ts.stage_dims(t);
        out << "#stage," << t << ',' << d.vars << ',' << d.rows << ',' << d.state_in << ',' << d.state_out << '\n';
    }
    auto row = [&](int path, int t, const StageDatum& s) {
        out << path << ',' << t;
        for (Eigen::Index j = 0; j < s.c.size(); ++j) out << ',' << fmt(s.c[j]);
        for (Eigen::Index r = 0; r < s.A.rows(); ++r)
            for (Eigen::Index j = 0; j < s.A.cols(); ++j) out << ',' << fmt(s.A(r, j));
        for (Eigen::Index r = 0; r < s.B.rows(); ++r)
            for (Eigen::Index j = 0; j < s.B.cols(); ++j) out << ',' << fmt(s.B(r, j));
        for (Eigen::Index r = 0; r < s.b.size(); ++r) out << ',' << fmt(s.b[r]);
        for (Eigen::Index j = 0; j < s.feature.size(); ++j) out << ',' << fmt(s.feature[j]);
        out << '\n';
    };
    row(0, 1, ts.stage1);
    for (int i = 0; i < ts.n_paths; ++i)
        for (int t = 2; t <= ts.horizon_T; ++t) row(i + 1, t, ts.at(t, i));
}

void save_trajectories_file(const TrajectorySet& ts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
    save_trajectories(ts, out);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

int sample_index(const ConditionalWeights& w, double u) {
    const auto n = w.size();
    if (n == 0) throw std::invalid_argument("sample_index: empty weights");
    double cum = 0.0;
    int last_positive = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (w[i] > 0.0) last_positive = static_cast<int>(i);
        cum += w[i];
        if (u < cum && w[i] > 0.0) return static_cast<int>(i);
    }
    if (last_positive < 0) throw std::invalid_argument("sample_index: all weights are zero");
    return last_positive;
}

ForwardScenario sample_forward(const WeightsFn& weights_fn, int horizon_T, std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    ForwardScenario sc;
    sc.rng_seed = rng_seed;
    int prev = -1;
    for (int t = 2; t <= horizon_T; ++t) {
        const int i = sample_index(weights_fn(t, prev), rng.uniform());
        sc.indices.push_back(i);
        prev = i;
    }
    return sc;
}

void SyntheticSpec::validate() const {
    const auto p = mu.size();
    if (phi.rows() != p || phi.cols() != p || noise_chol.rows() != p || noise_chol.cols() != p ||
        box_lo.size() != p || box_hi.size() != p || xi1.size() != p)
        throw DimensionError("synthetic spec: all blocks must have dimension " + std::to_string(p));
    if ((box_lo.array() > box_hi.array()).any()) throw std::invalid_argument("synthetic spec: box_lo > box_hi");
    if (p > 0) {
        const double radius = Eigen::EigenSolver<Matrix>(phi, false).eigenvalues().cwiseAbs().maxCoeff();
        if (radius >= 1.0)
            throw std::invalid_argument("synthetic spec: unstable process, spectral radius " + std::to_string(radius));
    }
}

std::vector<std::vector<Vector>> generate_feature_paths(const SyntheticSpec& spec, int horizon_T, int n_paths,
                                                        std::uint64_t rng_seed) {
    spec.validate();
    if (horizon_T < 1 || n_paths < 1) throw std::invalid_argument("synthetic generator needs T >= 1, N >= 1");
    Rng rng(rng_seed);
    const auto p = spec.mu.size();
    std::vector<std::vector<Vector>> paths(static_cast<std::size_t>(n_paths));
    for (auto& path : paths) {
        Vector xi = spec.xi1;
        path.push_back(xi);
        for (int t = 2; t <= horizon_T; ++t) {
            Vector eps(p);
            for (Eigen::Index k = 0; k < p; ++k) eps[k] = rng.normal();
            xi = (spec.mu + spec.phi * xi + spec.noise_chol * eps).cwiseMax(spec.box_lo).cwiseMin(spec.box_hi);
            path.push_back(xi);
        }
    }
    return paths;
}

TrajectorySet materialize(const InstanceTemplate& inst, const std::vector<std::vector<Vector>>& paths) {
    if (paths.empty()) throw std::invalid_argument("materialize: no paths");
    TrajectorySet ts;
    ts.horizon_T = inst.horizon_T;
    ts.n_paths = static_cast<int>(paths.size());
    ts.feature_dim = inst.feature_dim;
    ts.dims = inst.dims;
    ts.stage1 = inst.make(1, paths[0][0]);
    ts.data.resize(static_cast<std::size_t>(inst.horizon_T - 1));
    for (int t = 2; t <= inst.horizon_T; ++t)
        for (const auto& path : paths) {
            if (static_cast<int>(path.size()) != inst.horizon_T) throw DimensionError("path length differs from T");
            ts.data[static_cast<std::size_t>(t - 2)].push_back(inst.make(t, path[static_cast<std::size_t>(t - 1)]));
        }
    ts.validate();
    return ts;
}

TrajectorySet generate_synthetic_markov(const SyntheticSpec& spec, const InstanceTemplate& inst, int n_paths,
                                        std::uint64_t rng_seed) {
    return materialize(inst, generate_feature_paths(spec, inst.horizon_T, n_paths, rng_seed));
}

}  // namespace ddsddp
