#include "rto/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace rto {

PolicySource PolicySource::exact(const StateSpace& space, const PolicyTable& table) {
    if (table.actions.size() != space.size())
        throw std::invalid_argument("policy table does not cover the state space");
    return PolicySource(Exact{&space, &table});
}

PolicySource PolicySource::theta_greedy(ThetaVector theta) {
    return PolicySource(Greedy{std::move(theta)});
}

PolicySource PolicySource::heuristic(Heuristic h) { return PolicySource(h); }

namespace {

int first_available(const State& x) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0) return static_cast<int>(i) + 1;
    return 0;
}

int cheapest_available(const ModelParams& params, const State& x) {
    int best = 0;
    for (int i = 0; i < params.K; ++i)
        if (x[i] > 0 && (best == 0 || params.r[i] < params.r[best - 1])) best = i + 1;
    return best;
}

Action heuristic_action(const ModelParams& params, const Heuristic& h, const State& x) {
    const int level = total(x);
    switch (h.rule) {
        case HeuristicRule::NeverAcquire:
            return {0, 0};
        case HeuristicRule::AcquireBelowCapacity:
            return {level < params.b ? 1 : 0, first_available(x)};
        case HeuristicRule::MyopicOrderUpTo:
            return {level < std::min(h.order_up_to, params.b) ? 1 : 0, cheapest_available(params, x)};
    }
    return {0, 0};
}

struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;

    // Neumaier compensated summation.
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace

Action PolicySource::act(const ModelParams& params, const State& x) const {
    return std::visit(
        [&](const auto& p) -> Action {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Exact>) {
                return p.table->actions[p.space->index(x)];
            } else if constexpr (std::is_same_v<T, Greedy>) {
                const auto V = approx_value_function(params, p.theta);
                return {apply_t1(params, V, x).tau, apply_t2(params, V, x).eta};
            } else {
                return heuristic_action(params, p, x);
            }
        },
        impl_);
}

std::string PolicySource::name() const {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Exact>) {
                return "exact";
            } else if constexpr (std::is_same_v<T, Greedy>) {
                return "adp_greedy";
            } else {
                switch (p.rule) {
                    case HeuristicRule::NeverAcquire: return "never_acquire";
                    case HeuristicRule::AcquireBelowCapacity: return "acquire_below_capacity";
                    case HeuristicRule::MyopicOrderUpTo:
                        return "myopic_order_up_to_" + std::to_string(p.order_up_to);
                }
                return "heuristic";
            }
        },
        impl_);
}

double rollout_once(const ModelParams& params, const PolicySource& policy, const State& initial,
                    double tail_tolerance, Rng& rng) {
    State x = initial;
    double weight = params.alpha;
    Accumulator cost;
    while (weight >= tail_tolerance) {
        const Action a = policy.act(params, x);
        Transition tr = sample_transition(params, x, a, rng);
        cost.add(weight * immediate_cost(params, x, a, tr.event, tr.t_w));
        weight *= params.alpha;
        x = std::move(tr.next);
    }
    return cost.value();
}

RolloutEstimate rollout_cost(const ModelParams& params, const PolicySource& policy,
                             const RolloutConfig& config) {
    if (config.replications < 1) throw std::invalid_argument("need at least one replication");
    if (!(config.tail_tolerance > 0.0 && config.tail_tolerance < 1.0))
        throw std::invalid_argument("tail tolerance must lie in (0, 1)");
    if (static_cast<int>(config.initial.size()) != params.K || total(config.initial) > params.b)
        throw ModelError("infeasible initial state " + to_string(config.initial));

    const auto R = static_cast<std::size_t>(config.replications);
    std::vector<double> samples(R);
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            Rng rng(derive_seed(config.seed, r));
            samples[r] = rollout_once(params, policy, config.initial, config.tail_tolerance, rng);
        }
    };
    const unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                                 : config.threads;
    if (threads <= 1) {
        work(0, R);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (R + threads - 1) / threads;
        for (std::size_t lo = 0; lo < R; lo += chunk) pool.emplace_back(work, lo, std::min(R, lo + chunk));
    }

    // Aggregation runs in replication order, so the worker count never matters.
    Accumulator sum;
    for (double v : samples) sum.add(v);
    const double mean = sum.value() / static_cast<double>(R);
    Accumulator sq;
    for (double v : samples) sq.add((v - mean) * (v - mean));
    const double var = R > 1 ? sq.value() / static_cast<double>(R - 1) : 0.0;

    RolloutEstimate est;
    est.mean = mean;
    est.half_width = 1.959963984540054 * std::sqrt(var / static_cast<double>(R));
    est.replications = config.replications;
    est.seed = config.seed;
    return est;
}

void write_rollouts_csv(std::ostream& os, const std::vector<RolloutRow>& rows) {
    os << "policy,instance,mean,half_width,R,seed\n";
    char buf[64];
    for (const auto& row : rows) {
        os << row.policy << ',' << row.instance << ',';
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", row.estimate.mean, row.estimate.half_width);
        os << buf << ',' << row.estimate.replications << ',' << row.estimate.seed << '\n';
    }
}

}  // namespace rto
