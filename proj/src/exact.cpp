#include "rto/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace rto {

NonConvergence::NonConvergence(int iters, double res)
    : std::runtime_error("value iteration did not converge after " + std::to_string(iters) +
                         " sweeps (residual " + std::to_string(res) + ")"),
      iterations(iters),
      residual(res) {}

ValueFunction ValueTable::as_function(const StateSpace& space) const {
    return [this, &space](const State& x) { return values[space.index(x)]; };
}

namespace {

std::vector<double> holding_table(const ModelParams& params, const StateSpace& space) {
    std::vector<double> out(space.size());
    for (std::size_t s = 0; s < space.size(); ++s) out[s] = holding_rate(params, space.unindex(s));
    return out;
}

// Mirrors apply_t1 / apply_t2 term by term so that the fast sweep and the
// generic operators agree bit for bit.
struct SweepKernel {
    const ModelParams& params;
    const StateSpace& space;
    const std::vector<double>& holding;

    T1Result t1(const std::vector<double>& V, std::size_t s) const {
        const double keep = V[s];
        if (space.level(s) >= params.b) return {keep, 0};
        double acquire = params.c_a;
        for (int i = 0; i < params.K; ++i) acquire += params.p[i] * V[space.up(s, i)];
        acquire += params.p_bar * keep;
        if (acquire < keep) return {acquire, 1};
        return {keep, 0};
    }

    T2Result t2(const std::vector<double>& V, std::size_t s) const {
        T2Result best{V[s] + params.c_l, 0};
        for (int i = 0; i < params.K; ++i) {
            const std::size_t d = space.down(s, i);
            if (d == StateSpace::npos) continue;
            const double v = V[d] + params.r[i];
            if (v < best.cost) best = {v, i + 1};
        }
        return best;
    }

    double apply(const std::vector<double>& V, std::size_t s) const {
        return params.mu * t1(V, s).cost + params.lambda * t2(V, s).cost + holding[s];
    }
};

void sweep_into(const SweepKernel& kernel, const std::vector<double>& V, std::vector<double>& out,
                unsigned threads) {
    const std::size_t n = V.size();
    if (threads <= 1 || n < 4096) {
        for (std::size_t s = 0; s < n; ++s) out[s] = kernel.apply(V, s);
        return;
    }
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi] {
            for (std::size_t s = lo; s < hi; ++s) out[s] = kernel.apply(V, s);
        });
    }
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::vector<double> bellman_sweep(const ModelParams& params, const StateSpace& space,
                                  const std::vector<double>& V, unsigned threads) {
    const auto holding = holding_table(params, space);
    SweepKernel kernel{params, space, holding};
    std::vector<double> out(V.size());
    sweep_into(kernel, V, out, resolve_threads(threads));
    return out;
}

ExactSolution value_iteration(const ModelParams& params, const StateSpace& space,
                              const ValueIterationOptions& options) {
    if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (options.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    const auto start = std::chrono::steady_clock::now();
    const auto holding = holding_table(params, space);
    const SweepKernel kernel{params, space, holding};
    const unsigned threads = resolve_threads(options.threads);

    ExactSolution sol;
    std::vector<double> V(space.size(), 0.0);
    std::vector<double> next(space.size(), 0.0);
    for (int it = 1; it <= options.max_iter; ++it) {
        sweep_into(kernel, V, next, threads);
        const double res = sup_diff(next, V);
        V.swap(next);
        sol.report.iterations = it;
        sol.report.residual = res;
        sol.report.residual_history.push_back(res);
        if (res <= options.tol) {
            sol.value.values = std::move(V);
            sol.report.elapsed = std::chrono::steady_clock::now() - start;
            return sol;
        }
    }
    throw NonConvergence(options.max_iter, sol.report.residual);
}

double bellman_residual(const ModelParams& params, const StateSpace& space, const ValueTable& V) {
    return sup_diff(bellman_sweep(params, space, V.values), V.values);
}

PolicyTable extract_policy(const ModelParams& params, const StateSpace& space, const ValueTable& V) {
    const auto holding = holding_table(params, space);
    const SweepKernel kernel{params, space, holding};
    PolicyTable policy;
    policy.actions.resize(space.size());
    for (std::size_t s = 0; s < space.size(); ++s)
        policy.actions[s] = {kernel.t1(V.values, s).tau, kernel.t2(V.values, s).eta};
    return policy;
}

const StructureFinding& StructureReport::get(const std::string& name) const {
    for (const auto& f : findings)
        if (f.name == name) return f;
    throw std::out_of_range("no structure finding named " + name);
}

bool StructureReport::all_hold() const {
    return std::all_of(findings.begin(), findings.end(), [](const auto& f) { return f.holds; });
}

StructureReport check_structure(const ModelParams& params, const StateSpace& space,
                                const ValueTable& V, const PolicyTable& policy) {
    (void)V;
    auto finding = [](const char* name) {
        StructureFinding f;
        f.name = name;
        return f;
    };
    StructureFinding fulfil = finding("fulfillment");
    StructureFinding priority = finding("quality_priority");
    StructureFinding closed = finding("acquire_downward_closed");

    auto fail = [](StructureFinding& f, const State& x, std::string detail) {
        if (!f.holds) return;
        f.holds = false;
        f.counterexample = x;
        f.detail = std::move(detail);
    };

    for (std::size_t s = 0; s < space.size(); ++s) {
        const State x = space.unindex(s);
        const Action& a = policy.actions[s];
        if (space.level(s) == 0) continue;
        if (a.eta == 0) fail(fulfil, x, "demand rejected although cores are on hand");
        const int first = static_cast<int>(std::find_if(x.begin(), x.end(), [](int v) { return v > 0; }) -
                                           x.begin()) + 1;
        if (a.eta != first)
            fail(priority, x, "fulfills with type " + std::to_string(a.eta) + " while type " +
                                  std::to_string(first) + " is available");
        if (a.tau == 1) {
            for (int i = 0; i < params.K; ++i) {
                const std::size_t d = space.down(s, i);
                if (d != StateSpace::npos && policy.actions[d].tau == 0) {
                    fail(closed, x, "acquires here but not at " + to_string(space.unindex(d)));
                    break;
                }
            }
        }
    }
    return {{fulfil, priority, closed}};
}

namespace {

void write_state_prefix(std::ostream& os, std::size_t s, const State& x) {
    os << s;
    for (int v : x) os << ',' << v;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_header(std::ostream& os, int K, const char* tail) {
    os << "index";
    for (int i = 1; i <= K; ++i) os << ",x" << i;
    os << tail << '\n';
}

}  // namespace

void write_value_csv(std::ostream& os, const StateSpace& space, const ValueTable& V) {
    write_header(os, space.K(), ",value");
    for (std::size_t s = 0; s < space.size(); ++s) {
        write_state_prefix(os, s, space.unindex(s));
        os << ',' << fmt_double(V.values[s]) << '\n';
    }
}

void write_policy_csv(std::ostream& os, const StateSpace& space, const ValueTable& V,
                      const PolicyTable& policy) {
    write_header(os, space.K(), ",value,tau,eta");
    for (std::size_t s = 0; s < space.size(); ++s) {
        write_state_prefix(os, s, space.unindex(s));
        os << ',' << fmt_double(V.values[s]) << ',' << policy.actions[s].tau << ','
           << policy.actions[s].eta << '\n';
    }
}

}  // namespace rto
