#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "rto/adp.hpp"
#include "rto/exact.hpp"
#include "rto/model.hpp"

namespace rto {

enum class HeuristicRule {
    NeverAcquire,          // reject every demand, never acquire
    AcquireBelowCapacity,  // acquire while below b, fulfill with the best core
    MyopicOrderUpTo,       // fulfill with the cheapest core, acquire below a fixed level
};

struct Heuristic {
    HeuristicRule rule = HeuristicRule::NeverAcquire;
    int order_up_to = 5;
};

/// A stationary policy usable by the simulator.
class PolicySource {
public:
    static PolicySource exact(const StateSpace& space, const PolicyTable& table);
    /// Deterministic argmin of the operators under theta . phi(x).
    static PolicySource theta_greedy(ThetaVector theta);
    static PolicySource heuristic(Heuristic h);

    Action act(const ModelParams& params, const State& x) const;
    std::string name() const;

private:
    struct Exact {
        const StateSpace* space;
        const PolicyTable* table;
    };
    struct Greedy {
        ThetaVector theta;
    };
    std::variant<Exact, Greedy, Heuristic> impl_;

    explicit PolicySource(std::variant<Exact, Greedy, Heuristic> impl) : impl_(std::move(impl)) {}
};

struct RolloutConfig {
    State initial;
    int replications = 1000;
    /// Stop a replication once the next epoch's discount weight drops below this.
    double tail_tolerance = 1e-6;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct RolloutEstimate {
    double mean = 0.0;
    double half_width = 0.0;  // 95% normal approximation
    int replications = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo estimate of the discounted cost of `policy` from config.initial.
///
/// The cost recorded at epoch k (k = 0, 1, ...) is weighted by alpha^(k+1).
/// Since E[t_w] = 1/alpha, this makes each replication an unbiased sample of
/// the policy's value under the uniformized optimality equation.
RolloutEstimate rollout_cost(const ModelParams& params, const PolicySource& policy,
                             const RolloutConfig& config);

/// Discounted cost of one replication; exposed for tests.
double rollout_once(const ModelParams& params, const PolicySource& policy, const State& initial,
                    double tail_tolerance, Rng& rng);

struct RolloutRow {
    std::string policy;
    std::string instance;
    RolloutEstimate estimate;
};

/// CSV: policy,instance,mean,half_width,R,seed
void write_rollouts_csv(std::ostream& os, const std::vector<RolloutRow>& rows);

}  // namespace rto
