#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rto/model.hpp"

namespace rto {

/// Value function stored densely over StateSpace indices.
struct ValueTable {
    std::vector<double> values;

    ValueFunction as_function(const StateSpace& space) const;
};

struct PolicyTable {
    std::vector<Action> actions;
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
    std::chrono::duration<double> elapsed{};
    /// Sup-norm change of every sweep, in order.
    std::vector<double> residual_history;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(int iterations, double residual);
    int iterations;
    double residual;
};

struct ValueIterationOptions {
    double tol = 1e-8;
    int max_iter = 100'000;
    /// Worker threads per sweep; 0 picks hardware concurrency. Results are
    /// identical for every thread count.
    unsigned threads = 1;
};

struct ExactSolution {
    ValueTable value;
    SolveReport report;
};

/// Jacobi value iteration from V = 0 until the sweep-to-sweep sup-norm
/// change drops to `tol`. Throws NonConvergence on hitting max_iter.
ExactSolution value_iteration(const ModelParams& params, const StateSpace& space,
                              const ValueIterationOptions& options = {});

/// One synchronous Bellman sweep using precomputed neighbor indices.
std::vector<double> bellman_sweep(const ModelParams& params, const StateSpace& space,
                                  const std::vector<double>& V, unsigned threads = 1);

/// sup_x |V(x) - (mu T1 V + lambda T2 V + h)(x)|.
double bellman_residual(const ModelParams& params, const StateSpace& space, const ValueTable& V);

PolicyTable extract_policy(const ModelParams& params, const StateSpace& space, const ValueTable& V);

struct StructureFinding {
    std::string name;
    bool holds = true;
    std::optional<State> counterexample;
    std::string detail;
};

struct StructureReport {
    std::vector<StructureFinding> findings;

    const StructureFinding& get(const std::string& name) const;
    bool all_hold() const;
};

/// Exhaustive checks over every state:
///  - "fulfillment":      x != 0 implies eta != 0
///  - "quality_priority": eta is the smallest available core type
///  - "acquire_downward_closed": the acquire set is closed under decreasing any component
StructureReport check_structure(const ModelParams& params, const StateSpace& space,
                                const ValueTable& V, const PolicyTable& policy);

/// CSV: index,x1..xK,value
void write_value_csv(std::ostream& os, const StateSpace& space, const ValueTable& V);
/// CSV: index,x1..xK,value,tau,eta
void write_policy_csv(std::ostream& os, const StateSpace& space, const ValueTable& V,
                      const PolicyTable& policy);

}  // namespace rto
