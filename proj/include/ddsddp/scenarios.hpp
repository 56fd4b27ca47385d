#pragma once

#include "ddsddp/kernel.hpp"
#include "ddsddp/lp.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace ddsddp {

/// Widths of one stage. The first `state_out` columns of x are the state
/// passed to the next stage; `state_in` equals the previous stage's state_out.
struct StageDims {
    int vars = 0;
    int rows = 0;
    int state_in = 0;
    int state_out = 0;

    bool operator==(const StageDims&) const = default;
};

/// One realization (c, A, B, b) of a stage plus the kernel covariate.
struct StageDatum {
    Vector c;
    Matrix A;  // rows x vars
    Matrix B;  // rows x state_in
    Vector b;
    Vector feature;

    /// Throws DimensionError naming `where` on mismatch.
    void check(const StageDims& dims, int p, const std::string& where) const;
};

struct TrajectorySet {
    int horizon_T = 0;
    int n_paths = 0;
    int feature_dim = 0;
    std::vector<StageDims> dims;  // dims[t-1], t = 1..T
    StageDatum stage1;
    std::vector<std::vector<StageDatum>> data;  // data[t-2][i], t = 2..T

    const StageDatum& at(int t, int i) const { return data[static_cast<std::size_t>(t - 2)][static_cast<std::size_t>(i)]; }
    const StageDims& stage_dims(int t) const { return dims[static_cast<std::size_t>(t - 1)]; }
    std::vector<Vector> features(int t) const;

    /// Trajectories restricted to `paths` (0-based), in that order.
    TrajectorySet subset(const std::vector<int>& paths) const;
    void validate() const;
};

TrajectorySet load_trajectories(std::istream& in);
TrajectorySet load_trajectories_file(const std::string& path);
void save_trajectories(const TrajectorySet& traj, std::ostream& out);
void save_trajectories_file(const TrajectorySet& traj, const std::string& path);

/// Portable seeded generator. Uniforms and normals are built from raw 64-bit
/// output so streams agree across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t next() { return gen_(); }
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double normal();

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct ForwardScenario {
    std::vector<int> indices;  // indices[t-2] in [0, N), t = 2..T
    std::uint64_t rng_seed = 0;

    bool operator==(const ForwardScenario&) const = default;
};

/// weights_fn(t, previous index) gives the distribution of the stage-t index;
/// previous index is -1 at t = 2.
using WeightsFn = std::function<ConditionalWeights(int t, int previous)>;

/// Inverse-CDF draw.
int sample_index(const ConditionalWeights& w, double u);

ForwardScenario sample_forward(const WeightsFn& weights_fn, int horizon_T, std::uint64_t rng_seed);

/// xi_{t+1} = mu + Phi xi_t + L eps, clamped to [box_lo, box_hi].
struct SyntheticSpec {
    Vector mu;
    Matrix phi;
    Matrix noise_chol;
    Vector box_lo;
    Vector box_hi;
    Vector xi1;

    void validate() const;
};

/// paths[i][t-1] for t = 1..T; every path starts at xi1.
std::vector<std::vector<Vector>> generate_feature_paths(const SyntheticSpec& spec, int horizon_T,
                                                        int n_paths, std::uint64_t rng_seed);

/// Maps a feature realization to the stage data.
struct InstanceTemplate {
    int horizon_T = 0;
    int feature_dim = 0;
    std::vector<StageDims> dims;
    std::function<StageDatum(int t, const Vector& feature)> make;
};

TrajectorySet materialize(const InstanceTemplate& inst, const std::vector<std::vector<Vector>>& paths);

TrajectorySet generate_synthetic_markov(const SyntheticSpec& spec, const InstanceTemplate& inst,
                                        int n_paths, std::uint64_t rng_seed);

}  // namespace ddsddp
