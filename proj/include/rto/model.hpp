#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rto {

/// Raised when parameters or states violate the model's invariants.
class ModelError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Parameters of the single-product remanufacture-to-order system.
///
/// Core types are 1-based in the model but stored 0-based here: `h[0]`
/// is the holding cost of the best quality type.
struct ModelParams {
    int K = 2;
    int b = 20;
    double lambda = 0.75;
    double mu = 0.24;
    double alpha = 0.99;
    double c_a = 5.0;
    double c_l = 100.0;
    std::vector<double> h;
    std::vector<double> r;
    std::vector<double> p;
    double p_bar = 0.0;

    /// Throws ModelError naming the first violated invariant.
    void validate() const;
};

/// On-hand core counts, one entry per quality type.
using State = std::vector<int>;

struct Action {
    int tau = 0;  // 1 = initiate acquisition
    int eta = 0;  // 0 = reject, j >= 1 = fulfill with a type-j core

    friend bool operator==(const Action&, const Action&) = default;
};

enum class EventKind { Acquisition, Demand };

/// Realized exogenous event. `quality` is set only for acquisitions that
/// were actually initiated: 1..K for an economical core, 0 for a discard.
struct Event {
    EventKind kind = EventKind::Demand;
    std::optional<int> quality;
};

struct Transition {
    State next;
    Event event;
    double t_w = 0.0;
};

int total(const State& x);

/// Dense lexicographic ranking of all x >= 0 with sum(x) <= b.
///
/// Component 1 is the most significant digit, so (0,...,0) has rank 0 and
/// (b,0,...,0) has the last rank. Ranking uses cumulative composition
/// counts; neighbor tables (x + e_i, x - e_i) are precomputed for the
/// sweeps in the exact solver.
class StateSpace {
public:
    explicit StateSpace(const ModelParams& params);

    int K() const { return K_; }
    int capacity() const { return b_; }
    std::size_t size() const { return size_; }

    std::size_t index(const State& x) const;
    State unindex(std::size_t idx) const;
    bool feasible(const State& x) const;

    /// Total inventory of the state at `idx`.
    int level(std::size_t idx) const { return levels_[idx]; }

    /// Indices of all states whose components sum to `lvl`, in rank order.
    const std::vector<std::size_t>& states_at_level(int lvl) const { return by_level_.at(lvl); }

    /// Index of x + e_i (i is 0-based), or npos at capacity.
    std::size_t up(std::size_t idx, int i) const { return up_[idx * K_ + i]; }
    /// Index of x - e_i (i is 0-based), or npos when x_i = 0.
    std::size_t down(std::size_t idx, int i) const { return down_[idx * K_ + i]; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    // Number of vectors of length `len` with nonnegative entries summing to <= cap.
    std::uint64_t count(int len, int cap) const { return table_[len * (b_ + 1) + cap]; }

    int K_;
    int b_;
    std::size_t size_;
    std::vector<std::uint64_t> table_;
    std::vector<int> levels_;
    std::vector<std::vector<std::size_t>> by_level_;
    std::vector<std::size_t> up_;
    std::vector<std::size_t> down_;
};

/// binomial(b + K, K); throws ModelError if it does not fit in 64 bits.
std::uint64_t state_space_size(const ModelParams& params);

double holding_rate(const ModelParams& params, const State& x);

/// Any state -> currency mapping: an exact table or a fitted approximation.
using ValueFunction = std::function<double(const State&)>;

struct T1Result {
    double cost;
    int tau;
};

struct T2Result {
    double cost;
    int eta;
};

/// Acquisition sub-operator. At full capacity only the keep branch is
/// admissible; ties resolve to tau = 0.
T1Result apply_t1(const ModelParams& params, const ValueFunction& V, const State& x);

/// Fulfillment sub-operator. Ties resolve to the reject branch first and
/// then to the smallest (highest quality) core index.
T2Result apply_t2(const ModelParams& params, const ValueFunction& V, const State& x);

/// mu * T1 V(x) + lambda * T2 V(x) + h(x).
double bellman_apply(const ModelParams& params, const ValueFunction& V, const State& x);

bool admissible(const ModelParams& params, const State& x, const Action& a);

/// SplitMix64-style mixing of a base seed with stream identifiers.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Seeded source of randomness used by every stochastic routine.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }
    double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
    bool bernoulli(double prob) { return uniform() < prob; }

private:
    std::mt19937_64 engine_;
};

/// Draws the next event, its sojourn time and the post-event state.
/// Throws std::invalid_argument when the action is not admissible in x.
Transition sample_transition(const ModelParams& params, const State& x, const Action& action,
                             Rng& rng);

/// Cost recorded for one simulated event: t_w * h(x) plus the decision cost.
double immediate_cost(const ModelParams& params, const State& x, const Action& action,
                      const Event& event, double t_w);

std::string to_string(const State& x);

}  // namespace rto
