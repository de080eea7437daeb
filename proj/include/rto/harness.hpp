#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rto/adp.hpp"
#include "rto/analysis.hpp"
#include "rto/exact.hpp"
#include "rto/model.hpp"
#include "rto/sim.hpp"

namespace rto {

inline constexpr const char* kToolVersion = "1.0.0";

struct InstanceSpec {
    int K = 2;
    double lambda = 0.25;

    InstanceKey key() const { return {K, lambda}; }
    std::string dir_name() const;  // instance_K{K}_L{lambda}
};

/// Everything a run needs besides the instance itself. Model overrides are
/// applied on top of the baseline rules (h_i = K-i+1, r_i = 10i, b = 20,
/// mu = alpha - lambda, c_a = 5, c_l = 100, p_i = p_bar = 1/(K+1), alpha = 0.99).
struct HarnessConfig {
    std::map<std::string, double> model_overrides;
    AdpConfig adp;
    int repetitions = 10;
    int rollout_replications = 2000;
    double rollout_tail = 1e-6;
    int order_up_to = 5;
    ValueIterationOptions vi;
    unsigned threads = 0;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses `key = value` lines with `#` comments. Model keys: K, b, lambda,
/// mu, c_a, c_l, alpha. Algorithm keys: N, Z, beta, delta, epsilon, plus
/// repetitions, rollout_replications, rollout_tail, order_up_to,
/// level_weight and sampler (0 = uniform, 1 = level mixture).
HarnessConfig parse_config(std::istream& in, HarnessConfig base = {});
HarnessConfig load_config(const std::filesystem::path& path, HarnessConfig base = {});

/// Applies K and lambda overrides from the config to the instance.
InstanceSpec apply_instance_overrides(InstanceSpec spec, const HarnessConfig& config);

ModelParams make_params(const InstanceSpec& spec, const HarnessConfig& config = {});

/// The 12 baseline instances, K ascending then lambda ascending.
std::vector<InstanceSpec> build_testbed();

std::uint64_t adp_seed(std::uint64_t master_seed, int instance_index, int repetition);
std::uint64_t rollout_seed(std::uint64_t master_seed, int instance_index);

struct Stages {
    bool exact = true;
    bool adp = true;
    bool simulate = true;
    bool analyze = true;
};

struct AdpRunRecord {
    int repetition = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    ThetaVector theta;
};

struct InstanceResult {
    InstanceSpec spec;
    int index = 0;
    std::size_t states = 0;
    std::optional<SolveReport> exact_report;
    std::optional<double> bellman_residual;
    std::optional<StructureReport> structure;
    std::optional<double> exact_value_at_empty;
    std::vector<AdpRunRecord> adp_runs;
    std::optional<ThetaVector> mean_theta;
    std::optional<ThresholdReport> adp_threshold;
    std::optional<ThresholdReport> exact_threshold;
    std::vector<RolloutRow> rollouts;
    std::vector<std::string> failures;
};

/// Runs the requested stages for one instance and writes its files into
/// `dir`: exact_value.csv, exact_policy.csv, structure.json, adp_rep{r}.csv,
/// theta_trends.csv, t1_levels.csv, t1_levels_exact.csv, rollouts.csv.
/// Sub-task failures are recorded in the result rather than thrown.
InstanceResult run_instance(const InstanceSpec& spec, int index, std::uint64_t master_seed,
                            const HarnessConfig& config, const std::filesystem::path& dir,
                            const Stages& stages = {});

struct RunManifest {
    std::string tool_version;
    std::uint64_t master_seed = 0;
    std::vector<InstanceResult> instances;
    std::vector<std::string> failures;
    std::string started_at;
    std::string finished_at;

    std::size_t adp_run_count() const;
    bool ok() const { return failures.empty(); }
};

/// Full reproduction over the testbed. Writes every instance directory,
/// the aggregated theta_trends.csv, t1_levels.csv and rollouts.csv, and
/// finally manifest.json.
RunManifest run_all(std::uint64_t master_seed, const std::filesystem::path& out_dir,
                    const HarnessConfig& config = {});

/// Flattens per-instance repetitions into theta_trends input.
std::vector<ThetaRun> collect_theta_runs(const std::vector<InstanceResult>& results);

}  // namespace rto
