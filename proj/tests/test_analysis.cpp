#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "rto/analysis.hpp"
#include "rto/exact.hpp"

using namespace rto;

TEST(Levels, CountsMatchCompositions) {
    const auto p = fixtures::baseline(2, 0.5);
    StateSpace space(p);
    const auto rep = t1_cost_by_level(p, space, [](const State&) { return 0.0; });
    ASSERT_EQ(rep.levels.size(), 21u);
    std::size_t sum = 0;
    for (const auto& lc : rep.levels) {
        EXPECT_EQ(lc.n_states, static_cast<std::size_t>(lc.level + 1));
        sum += lc.n_states;
    }
    EXPECT_EQ(sum, space.size());
    EXPECT_FALSE(rep.levels.back().mean_acquire.has_value());
    EXPECT_TRUE(rep.levels.front().mean_acquire.has_value());
}

TEST(Levels, CountsMatchBruteForce) {
    for (int K = 1; K <= 4; ++K) {
        const auto p = fixtures::baseline(K, 0.5, 7);
        StateSpace space(p);
        const auto rep = t1_cost_by_level(p, space, [](const State&) { return 1.0; });
        std::vector<std::size_t> counts(8, 0);
        for (const auto& x : fixtures::enumerate(K, 7)) ++counts[total(x)];
        for (const auto& lc : rep.levels) EXPECT_EQ(lc.n_states, counts[lc.level]);
    }
}

TEST(Threshold, HandValues) {
    const auto p = fixtures::baseline(1, 0.5, 2);
    StateSpace space(p);
    const std::vector<double> table{20.0, 3.0, 8.0};
    const auto rep = t1_cost_by_level(p, space, [&](const State& x) { return table[x[0]]; });
    EXPECT_DOUBLE_EQ(rep.levels[0].mean_keep, 20.0);
    EXPECT_DOUBLE_EQ(*rep.levels[0].mean_acquire, 5.0 + 0.5 * 3.0 + 0.5 * 20.0);
    EXPECT_DOUBLE_EQ(*rep.levels[1].mean_acquire, 5.0 + 0.5 * 8.0 + 0.5 * 3.0);
    EXPECT_EQ(rep.threshold, 0);
    EXPECT_EQ(rep.all_states_acquire_up_to, 0);
    EXPECT_EQ(rep.some_state_acquires_up_to, 0);
}

TEST(Threshold, ConstantValueNeverAcquires) {
    const auto p = fixtures::baseline(3, 0.5, 5);
    StateSpace space(p);
    const auto rep = t1_cost_by_level(p, space, [](const State&) { return 42.0; });
    EXPECT_EQ(rep.threshold, -1);
    EXPECT_EQ(rep.all_states_acquire_up_to, -1);
    EXPECT_EQ(rep.some_state_acquires_up_to, -1);
}

TEST(ThresholdProperty, MeanCrossoverBracketedByPerStateView) {
    for (int K : {2, 3})
        for (double lambda : {0.25, 0.5, 0.75}) {
            const auto p = fixtures::baseline(K, lambda);
            StateSpace space(p);
            const auto sol = value_iteration(p, space);
            const auto structure = check_structure(p, space, sol.value, extract_policy(p, space, sol.value));
            if (!structure.get("acquire_downward_closed").holds) continue;
            const auto rep = t1_cost_by_level(p, space, sol.value.as_function(space));
            EXPECT_LE(rep.all_states_acquire_up_to, rep.threshold) << K << "," << lambda;
            EXPECT_LE(rep.threshold, rep.some_state_acquires_up_to) << K << "," << lambda;
        }
}

TEST(Trends, SingleRepetitionHasZeroSpread) {
    const auto table = theta_trends({{{2, 0.5}, 0, {10.0, 5.0, 4.0}}});
    ASSERT_EQ(table.rows.size(), 1u);
    EXPECT_EQ(table.rows[0].mean, (std::vector<double>{10.0, 5.0, 4.0}));
    EXPECT_EQ(table.rows[0].stddev, (std::vector<double>{0.0, 0.0, 0.0}));
    EXPECT_EQ(table.rows[0].repetitions, 1);
}

TEST(Trends, MeanAndSampleDeviation) {
    const auto table = theta_trends({{{2, 0.5}, 0, {1.0, 4.0, 2.0}}, {{2, 0.5}, 1, {3.0, 8.0, 2.0}}});
    EXPECT_EQ(table.rows[0].mean, (std::vector<double>{2.0, 6.0, 2.0}));
    EXPECT_DOUBLE_EQ(table.rows[0].stddev[0], std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(table.rows[0].stddev[2], 0.0);
}

TEST(Trends, Verdicts) {
    std::vector<ThetaRun> runs{
        {{2, 0.25}, 0, {100.0, 500.0, 400.0}},
        {{2, 0.5}, 0, {200.0, 480.0, 410.0}},
        {{2, 0.75}, 0, {400.0, 470.0, 380.0}},
    };
    const auto table = theta_trends(runs);
    auto find = [&](const std::string& name) {
        return *std::find_if(table.verdicts.begin(), table.verdicts.end(),
                             [&](const MonotoneVerdict& v) { return v.name == name; });
    };
    EXPECT_TRUE(find("theta0_increasing_in_lambda_K2").holds);
    EXPECT_TRUE(find("theta1_nonincreasing_in_lambda_K2").holds);
    const auto t2 = find("theta2_nonincreasing_in_lambda_K2");
    EXPECT_FALSE(t2.holds);
    EXPECT_EQ(t2.violations, 1);
    EXPECT_NEAR(t2.worst_relative, 10.0 / 405.0, 1e-12);
    EXPECT_TRUE(find("theta_ordered_by_quality_K2_L0.5").holds);
    ASSERT_NE(table.find({2, 0.75}), nullptr);
    EXPECT_EQ(table.find({3, 0.75}), nullptr);
}

TEST(TrendsProperty, PermutationInvariant) {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> d(0.0, 500.0);
    std::vector<ThetaRun> runs;
    for (int K : {2, 3})
        for (double lambda : {0.25, 0.5, 0.75})
            for (int rep = 0; rep < 10; ++rep) {
                ThetaVector t(K + 1);
                for (double& v : t) v = d(gen);
                runs.push_back({{K, lambda}, rep, t});
            }
    const auto base = theta_trends(runs);
    std::ostringstream a;
    write_theta_trends_csv(a, base);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(runs.begin(), runs.end(), gen);
        std::ostringstream b;
        write_theta_trends_csv(b, theta_trends(runs));
        EXPECT_EQ(a.str(), b.str());
    }
}

TEST(Csv, Layouts) {
    std::ostringstream t;
    write_theta_trends_csv(t, theta_trends({{{2, 0.5}, 0, {1.5, 2.0, 3.0}}}));
    EXPECT_EQ(t.str(),
              "instance,lambda,K,i,mean,std\nK2_L0.5,0.5,2,0,1.5,0\nK2_L0.5,0.5,2,1,2,0\nK2_L0.5,0.5,2,2,3,0\n");

    const auto p = fixtures::baseline(1, 0.5, 1);
    StateSpace space(p);
    std::ostringstream l;
    write_t1_levels_csv(l, "K1_L0.5", t1_cost_by_level(p, space, [](const State&) { return 2.0; }));
    EXPECT_EQ(l.str(), "instance,level,mean_keep,mean_acquire,n_states\nK1_L0.5,0,2,7,1\nK1_L0.5,1,2,,1\n");
}
