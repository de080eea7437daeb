#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rto/adp.hpp"
#include "rto/model.hpp"

namespace rto {

struct LevelCosts {
    int level = 0;
    double mean_keep = 0.0;
    /// Absent at full capacity, where acquiring is inadmissible.
    std::optional<double> mean_acquire;
    std::size_t n_states = 0;
    /// States at this level whose own acquire branch is strictly cheaper.
    std::size_t n_acquire_preferred = 0;
};

/// Average acquisition-operator branches per total inventory level.
struct ThresholdReport {
    std::vector<LevelCosts> levels;
    /// Largest level where the mean acquire cost is below the mean keep
    /// cost; -1 if there is none.
    int threshold = -1;
    /// Largest L such that every state on levels 0..L prefers to acquire (-1 if none).
    int all_states_acquire_up_to = -1;
    /// Largest level at which some state prefers to acquire (-1 if none).
    int some_state_acquires_up_to = -1;
};

ThresholdReport t1_cost_by_level(const ModelParams& params, const StateSpace& space,
                                 const ValueFunction& V);

struct InstanceKey {
    int K = 0;
    double lambda = 0.0;

    std::string label() const;
    friend bool operator==(const InstanceKey&, const InstanceKey&) = default;
};

struct ThetaRun {
    InstanceKey instance;
    int repetition = 0;
    ThetaVector theta;
};

struct ThetaTrendRow {
    InstanceKey instance;
    int repetitions = 0;
    std::vector<double> mean;
    std::vector<double> stddev;  // sample standard deviation; 0 for one repetition
};

/// Adjacent-pair check over an ordered sequence of means.
struct MonotoneVerdict {
    std::string name;
    bool holds = true;
    int violations = 0;
    /// Largest violating gap relative to the mean of the violating pair.
    double worst_relative = 0.0;
};

struct ThetaTrendTable {
    std::vector<ThetaTrendRow> rows;  // sorted by (K, lambda)
    std::vector<MonotoneVerdict> verdicts;

    const ThetaTrendRow* find(const InstanceKey& key) const;
};

/// Per-instance mean/std of theta across repetitions plus the trend
/// verdicts: theta_0 increasing in lambda, each theta_i non-increasing in
/// lambda, and theta_1 >= ... >= theta_K within each instance.
ThetaTrendTable theta_trends(std::vector<ThetaRun> runs);

/// CSV: instance,lambda,K,i,mean,std
void write_theta_trends_csv(std::ostream& os, const ThetaTrendTable& table, bool header = true);
/// CSV: instance,level,mean_keep,mean_acquire,n_states (mean_acquire empty at capacity)
void write_t1_levels_csv(std::ostream& os, const std::string& instance, const ThresholdReport& report,
                         bool header = true);

}  // namespace rto
