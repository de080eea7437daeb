#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "rto/exact.hpp"

using namespace rto;

namespace {

// Independent scalar-chain iteration for K = 1, written from the recursion directly.
std::vector<double> reference_k1(const ModelParams& p, double tol) {
    const int b = p.b;
    std::vector<double> V(b + 1, 0.0), next(b + 1, 0.0);
    for (int it = 0; it < 200000; ++it) {
        double diff = 0.0;
        for (int x = 0; x <= b; ++x) {
            double t1 = V[x];
            if (x < b) t1 = std::min(t1, p.c_a + p.p[0] * V[x + 1] + p.p_bar * V[x]);
            double t2 = V[x] + p.c_l;
            if (x > 0) t2 = std::min(t2, V[x - 1] + p.r[0]);
            next[x] = p.mu * t1 + p.lambda * t2 + p.h[0] * x;
            diff = std::max(diff, std::abs(next[x] - V[x]));
        }
        V.swap(next);
        if (diff <= tol) break;
    }
    return V;
}

}  // namespace

TEST(ValueIteration, SingleStateChain) {
    auto p = fixtures::baseline(1, 0.75, 0);
    StateSpace space(p);
    ASSERT_EQ(space.size(), 1u);
    const auto sol = value_iteration(p, space);
    EXPECT_NEAR(sol.value.values[0], 7500.0, 1e-5);
}

TEST(ValueIteration, OneSweepFromZero) {
    const auto p = fixtures::baseline(5, 0.75);
    StateSpace space(p);
    const std::vector<double> zero(space.size(), 0.0);
    const auto next = bellman_sweep(p, space, zero);
    EXPECT_NEAR(next[0], 75.0, 1e-12);
}

TEST(ValueIteration, MatchesScalarReferenceForK1) {
    for (double lambda : {0.25, 0.5, 0.75}) {
        for (int b : {1, 5, 20}) {
            const auto p = fixtures::baseline(1, lambda, b);
            StateSpace space(p);
            const auto sol = value_iteration(p, space, {1e-10, 200000, 1});
            const auto ref = reference_k1(p, 1e-10);
            for (int x = 0; x <= b; ++x)
                EXPECT_NEAR(sol.value.values[space.index({x})], ref[x], 1e-6) << lambda << "," << b;
        }
    }
}

TEST(ValueIteration, ResidualBoundAndNonnegative) {
    const auto p = fixtures::baseline(2, 0.75);
    StateSpace space(p);
    const auto sol = value_iteration(p, space);
    EXPECT_LE(sol.report.residual, 1e-8);
    EXPECT_LE(bellman_residual(p, space, sol.value), 1e-8 * (1 + p.alpha) / (1 - p.alpha));
    for (double v : sol.value.values) EXPECT_GE(v, 0.0);
    EXPECT_GT(sol.report.iterations, 1000);
    EXPECT_EQ(sol.report.residual_history.size(), static_cast<std::size_t>(sol.report.iterations));
}

TEST(ValueIteration, NonConvergenceReported) {
    const auto p = fixtures::baseline(2, 0.75, 4);
    StateSpace space(p);
    try {
        value_iteration(p, space, {1e-8, 5, 1});
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_EQ(e.iterations, 5);
        EXPECT_GT(e.residual, 1e-8);
    }
}

TEST(ValueIterationProperty, ResidualsNonIncreasingAndIteratesRise) {
    for (int K = 1; K <= 3; ++K)
        for (double lambda : {0.25, 0.75}) {
            const auto p = fixtures::baseline(K, lambda, 8);
            StateSpace space(p);
            const auto sol = value_iteration(p, space);
            const auto& h = sol.report.residual_history;
            for (std::size_t i = 2; i < h.size(); ++i) ASSERT_LE(h[i], h[i - 1] * (1 + 1e-12)) << i;

            std::vector<double> V(space.size(), 0.0);
            for (int it = 0; it < 50; ++it) {
                const auto next = bellman_sweep(p, space, V);
                for (std::size_t s = 0; s < V.size(); ++s) ASSERT_GE(next[s], V[s] - 1e-12);
                V = next;
            }
        }
}

TEST(ValueIterationProperty, SweepMatchesOperatorComposition) {
    std::mt19937_64 gen(4);
    for (int K = 1; K <= 4; ++K) {
        const auto p = fixtures::baseline(K, 0.5, 6);
        StateSpace space(p);
        const auto v = fixtures::random_table(space.size(), gen, 0.0, 500.0);
        const auto fast = bellman_sweep(p, space, v);
        const ValueFunction V = [&](const State& x) { return v[space.index(x)]; };
        for (std::size_t s = 0; s < space.size(); ++s)
            EXPECT_DOUBLE_EQ(fast[s], bellman_apply(p, V, space.unindex(s)));
    }
}

TEST(ValueIterationProperty, ThreadCountDoesNotChangeBits) {
    const auto p = fixtures::baseline(3, 0.5);
    StateSpace space(p);
    const auto one = value_iteration(p, space, {1e-8, 100000, 1});
    const auto four = value_iteration(p, space, {1e-8, 100000, 4});
    EXPECT_EQ(one.value.values, four.value.values);
    EXPECT_EQ(one.report.iterations, four.report.iterations);
}

TEST(Policy, BoundaryRules) {
    const auto p = fixtures::baseline(2, 0.75);
    StateSpace space(p);
    const auto sol = value_iteration(p, space);
    const auto pol = extract_policy(p, space, sol.value);
    EXPECT_EQ(pol.actions[space.index({0, 0})].eta, 0);
    for (std::size_t s : space.states_at_level(p.b)) EXPECT_EQ(pol.actions[s].tau, 0);
    for (std::size_t s = 0; s < space.size(); ++s) {
        const State x = space.unindex(s);
        if (total(x) == 0) continue;
        const int best = x[0] > 0 ? 1 : 2;
        EXPECT_EQ(pol.actions[s].eta, best) << to_string(x);
    }
    const auto again = extract_policy(p, space, sol.value);
    EXPECT_TRUE(std::equal(pol.actions.begin(), pol.actions.end(), again.actions.begin()));
}

TEST(Structure, HoldsOnSmallBaselineInstances) {
    for (double lambda : {0.25, 0.5, 0.75}) {
        const auto p = fixtures::baseline(2, lambda);
        StateSpace space(p);
        const auto sol = value_iteration(p, space);
        const auto rep = check_structure(p, space, sol.value, extract_policy(p, space, sol.value));
        EXPECT_TRUE(rep.get("fulfillment").holds);
        EXPECT_TRUE(rep.get("quality_priority").holds);
        EXPECT_TRUE(rep.get("acquire_downward_closed").holds);
        EXPECT_TRUE(rep.all_hold());
    }
}

TEST(Structure, FreeRejectionYieldsCounterexample) {
    auto p = fixtures::baseline(2, 0.75, 6);
    p.c_l = 0.0;
    p.h = {0.01, 0.01};
    StateSpace space(p);
    const auto sol = value_iteration(p, space);
    const auto rep = check_structure(p, space, sol.value, extract_policy(p, space, sol.value));
    const auto& f = rep.get("fulfillment");
    EXPECT_FALSE(f.holds);
    ASSERT_TRUE(f.counterexample.has_value());
    EXPECT_GT(total(*f.counterexample), 0);
    EXPECT_THROW(rep.get("no_such_property"), std::out_of_range);
}

TEST(Csv, LayoutAndRoundTrip) {
    const auto p = fixtures::baseline(2, 0.5, 2);
    StateSpace space(p);
    const auto sol = value_iteration(p, space);
    const auto pol = extract_policy(p, space, sol.value);
    std::ostringstream v, a;
    write_value_csv(v, space, sol.value);
    write_policy_csv(a, space, sol.value, pol);
    std::istringstream vin(v.str());
    std::string line;
    std::getline(vin, line);
    EXPECT_EQ(line, "index,x1,x2,value");
    int rows = 0;
    while (std::getline(vin, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        ASSERT_EQ(cells.size(), 4u);
        EXPECT_EQ(std::stod(cells[3]), sol.value.values[rows]);
        ++rows;
    }
    EXPECT_EQ(rows, 6);
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "index,x1,x2,value,tau,eta");
}
