#include "rto/adp.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace rto {

void AdpConfig::validate(int K) const {
    if (N < 1) throw std::invalid_argument("N must be at least 1");
    if (Z < K + 2) throw std::invalid_argument("Z must be at least K + 2");
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    // 0.5 itself is the baseline setting, so the lower end is closed.
    if (!(delta >= 0.5 && delta <= 1.0)) throw std::invalid_argument("delta must lie in [0.5, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (!theta_init.empty() && theta_init.size() != static_cast<std::size_t>(K + 1))
        throw std::invalid_argument("theta_init must have K + 1 entries");
    if (!(sampler.level_weight >= 0.0 && sampler.level_weight <= 1.0))
        throw std::invalid_argument("sampler level weight must lie in [0, 1]");
}

void SampleBatch::add(const BasisVector& phi, const BasisVector& phi_next, double cost) {
    omega.insert(omega.end(), phi.begin(), phi.end());
    omega_next.insert(omega_next.end(), phi_next.begin(), phi_next.end());
    costs.push_back(cost);
}

double g_basis(const ModelParams& params, const State& x) {
    return std::pow(params.lambda / (params.lambda + params.mu), total(x));
}

BasisVector basis(const ModelParams& params, const State& x) {
    BasisVector phi(params.K + 1);
    phi[0] = g_basis(params, x);
    // b = 0 admits only the empty state; its share terms are zero.
    const double scale = params.b > 0 ? 1.0 / params.b : 0.0;
    for (int i = 0; i < params.K; ++i) phi[i + 1] = x[i] * scale;
    return phi;
}

double approx_value(const ThetaVector& theta, const BasisVector& phi) {
    if (theta.size() != phi.size()) throw std::invalid_argument("theta and phi differ in length");
    double v = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) v += theta[i] * phi[i];
    return v;
}

ValueFunction approx_value_function(const ModelParams& params, ThetaVector theta) {
    return [&params, theta = std::move(theta)](const State& x) {
        return approx_value(theta, basis(params, x));
    };
}

ThetaVector default_theta_init(const ModelParams& params) {
    ThetaVector theta{1.0};
    theta.insert(theta.end(), params.h.begin(), params.h.end());
    return theta;
}

Action greedy_action(const ModelParams& params, const ThetaVector& theta, const State& x,
                     double epsilon, Rng& rng) {
    const auto V = approx_value_function(params, theta);
    Action a;

    const bool room = total(x) < params.b;
    if (rng.uniform() < epsilon)
        a.tau = room ? static_cast<int>(rng.index(2)) : 0;
    else
        a.tau = apply_t1(params, V, x).tau;

    if (rng.uniform() < epsilon) {
        std::vector<int> choices{0};
        for (int i = 0; i < params.K; ++i)
            if (x[i] >= 1) choices.push_back(i + 1);
        a.eta = choices[rng.index(choices.size())];
    } else {
        a.eta = apply_t2(params, V, x).eta;
    }
    return a;
}

State sample_state(const StateSpace& space, const StateSampler& sampler, Rng& rng) {
    if (sampler.kind == StateSampler::Kind::LevelMixture && rng.uniform() < sampler.level_weight) {
        const auto lvl = static_cast<int>(rng.index(static_cast<std::size_t>(space.capacity()) + 1));
        const auto& members = space.states_at_level(lvl);
        return space.unindex(members[rng.index(members.size())]);
    }
    return space.unindex(rng.index(space.size()));
}

SampleBatch policy_evaluation(const ModelParams& params, const StateSpace& space,
                              const ThetaVector& theta, const AdpConfig& config, Rng& rng) {
    SampleBatch batch;
    batch.cols = params.K + 1;
    batch.omega.reserve(static_cast<std::size_t>(config.Z) * batch.cols);
    batch.omega_next.reserve(static_cast<std::size_t>(config.Z) * batch.cols);
    batch.costs.reserve(config.Z);
    for (int z = 0; z < config.Z; ++z) {
        const State x = sample_state(space, config.sampler, rng);
        const Action a = greedy_action(params, theta, x, config.epsilon, rng);
        const Transition tr = sample_transition(params, x, a, rng);
        batch.add(basis(params, x), basis(params, tr.next),
                  immediate_cost(params, x, a, tr.event, tr.t_w));
    }
    return batch;
}

std::vector<double> solve_dense(std::vector<double> A, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    if (A.size() != n * n) throw std::invalid_argument("matrix and right-hand side disagree");
    double scale = 0.0;
    for (double v : A) scale = std::max(scale, std::abs(v));
    const double floor = scale * 1e-14;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(A[row * n + col]) > std::abs(A[pivot * n + col])) pivot = row;
        if (!(std::abs(A[pivot * n + col]) > floor))
            throw NumericFailure("singular LSTD system; use a positive ridge term beta");
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(A[col * n + k], A[pivot * n + k]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = A[row * n + col] / A[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) A[row * n + k] -= f * A[col * n + k];
            rhs[row] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) acc -= A[i * n + k] * x[k];
        x[i] = acc / A[i * n + i];
    }
    return x;
}

ThetaVector lstd_solve(const SampleBatch& batch, double alpha, double beta) {
    if (batch.rows() == 0) throw std::invalid_argument("LSTD needs at least one sample");
    const auto n = static_cast<std::size_t>(batch.cols);
    std::vector<double> A(n * n, 0.0);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t z = 0; z < batch.rows(); ++z) {
        const double* phi = &batch.omega[z * n];
        const double* nxt = &batch.omega_next[z * n];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) A[i * n + j] += phi[i] * (phi[j] - alpha * nxt[j]);
            rhs[i] += phi[i] * batch.costs[z];
        }
    }
    for (std::size_t i = 0; i < n; ++i) A[i * n + i] += beta;
    return solve_dense(std::move(A), std::move(rhs));
}

ThetaVector blend_theta(const ThetaVector& theta_prev, const ThetaVector& theta_hat, int n,
                        double delta) {
    if (n < 1) throw std::invalid_argument("step index must be at least 1");
    if (theta_prev.size() != theta_hat.size()) throw std::invalid_argument("theta lengths differ");
    const double gamma = std::pow(static_cast<double>(n), -delta);
    ThetaVector out(theta_prev.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - gamma) * theta_prev[i] + gamma * theta_hat[i];
    return out;
}

std::uint64_t batch_seed(std::uint64_t run_seed, int n) {
    return derive_seed(run_seed, 0xada5, static_cast<std::uint64_t>(n));
}

ApiResult run_api(const ModelParams& params, const StateSpace& space, const AdpConfig& config) {
    config.validate(params.K);
    ApiResult result;
    result.theta = config.theta_init.empty() ? default_theta_init(params) : config.theta_init;
    result.trace.reserve(config.N);
    for (int n = 1; n <= config.N; ++n) {
        const std::uint64_t seed = batch_seed(config.seed, n);
        Rng rng(seed);
        const SampleBatch batch = policy_evaluation(params, space, result.theta, config, rng);
        ThetaVector theta_hat;
        try {
            theta_hat = lstd_solve(batch, params.alpha, config.beta);
        } catch (const NumericFailure& e) {
            throw NumericFailure("outer iteration " + std::to_string(n) + ": " + e.what());
        }
        result.theta = blend_theta(result.theta, theta_hat, n, config.delta);
        result.trace.push_back({n, result.theta, seed});
    }
    return result;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace) {
    const std::size_t width = trace.empty() ? 0 : trace.front().theta.size();
    os << "n";
    for (std::size_t i = 0; i < width; ++i) os << ",theta_" << i;
    os << ",batch_seed\n";
    char buf[32];
    for (const auto& e : trace) {
        os << e.n;
        for (double v : e.theta) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << ',' << buf;
        }
        os << ',' << e.batch_seed << '\n';
    }
}

}  // namespace rto
