#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "rto/model.hpp"

namespace rto {

/// Weights of the linear value approximation: theta[0] scales g(x),
/// theta[i] scales x_i / b.
using ThetaVector = std::vector<double>;
using BasisVector = std::vector<double>;

/// Raised when the LSTD system cannot be factored.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// How the policy-evaluation loop draws its sample states.
///
/// Uniform picks a uniform index over the whole feasible space. LevelMixture
/// draws, with probability `level_weight`, a total inventory level uniformly
/// from {0..b} and then a uniform state on that level; otherwise it falls back
/// to the uniform draw.
struct StateSampler {
    enum class Kind { Uniform, LevelMixture };
    Kind kind = Kind::LevelMixture;
    double level_weight = 0.45;
};

struct AdpConfig {
    int N = 10;
    int Z = 1000;
    double beta = 10.0;
    double delta = 0.5;
    double epsilon = 0.05;
    std::uint64_t seed = 1;
    /// Empty means the default initializer [1, h_1, ..., h_K].
    ThetaVector theta_init;
    StateSampler sampler;

    void validate(int K) const;
};

/// Row-major Z x (K+1) basis rows before and after each simulated event,
/// plus the recorded immediate costs.
struct SampleBatch {
    int cols = 0;
    std::vector<double> omega;
    std::vector<double> omega_next;
    std::vector<double> costs;

    std::size_t rows() const { return costs.size(); }
    void add(const BasisVector& phi, const BasisVector& phi_next, double cost);
};

struct TraceEntry {
    int n = 0;
    ThetaVector theta;
    std::uint64_t batch_seed = 0;
};

struct ApiResult {
    ThetaVector theta;
    std::vector<TraceEntry> trace;
};

/// g(x) = (lambda / (lambda + mu))^{sum x}.
double g_basis(const ModelParams& params, const State& x);

BasisVector basis(const ModelParams& params, const State& x);

double approx_value(const ThetaVector& theta, const BasisVector& phi);

/// x -> theta . phi(x), usable with the model's operators.
ValueFunction approx_value_function(const ModelParams& params, ThetaVector theta);

ThetaVector default_theta_init(const ModelParams& params);

/// epsilon-greedy decision. Each component flips its own exploration coin;
/// exploring components are drawn uniformly from their admissible choices.
Action greedy_action(const ModelParams& params, const ThetaVector& theta, const State& x,
                     double epsilon, Rng& rng);

State sample_state(const StateSpace& space, const StateSampler& sampler, Rng& rng);

SampleBatch policy_evaluation(const ModelParams& params, const StateSpace& space,
                              const ThetaVector& theta, const AdpConfig& config, Rng& rng);

/// Solves [Omega^T (Omega - alpha Omega') + beta I] theta = Omega^T C by
/// accumulating the normal equations row by row. Throws NumericFailure on a
/// singular system.
ThetaVector lstd_solve(const SampleBatch& batch, double alpha, double beta);

/// Solves A x = rhs (n x n, row-major) by Gaussian elimination with partial
/// pivoting.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> rhs);

/// (1 - n^-delta) theta_prev + n^-delta theta_hat.
ThetaVector blend_theta(const ThetaVector& theta_prev, const ThetaVector& theta_hat, int n,
                        double delta);

/// Seed of the n-th policy-evaluation batch of a run.
std::uint64_t batch_seed(std::uint64_t run_seed, int n);

ApiResult run_api(const ModelParams& params, const StateSpace& space, const AdpConfig& config);

/// CSV: n,theta_0..theta_K,batch_seed
void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace);

}  // namespace rto
