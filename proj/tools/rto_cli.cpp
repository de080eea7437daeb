// Command-line front end for the acquisition model pipeline.
#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "rto/harness.hpp"

namespace {

struct CommonArgs {
    std::optional<int> K;
    std::optional<double> lambda;
    std::uint64_t seed = 1;
    std::string out = "out";
    std::string config;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool instance_flags) {
    if (instance_flags) {
        cmd->add_option("--k", args.K, "number of quality classes");
        cmd->add_option("--lambda", args.lambda, "demand rate");
    }
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--config", args.config, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
}

rto::HarnessConfig load(const CommonArgs& args) {
    rto::HarnessConfig cfg;
    if (!args.config.empty()) cfg = rto::load_config(args.config, cfg);
    cfg.threads = args.threads;
    cfg.vi.threads = args.threads;
    return cfg;
}

int report(const std::vector<std::string>& failures) {
    for (const auto& f : failures) std::cerr << "failed: " << f << '\n';
    return failures.empty() ? 0 : 1;
}

int run_single(const CommonArgs& args, const rto::Stages& stages) {
    const rto::HarnessConfig cfg = load(args);
    rto::InstanceSpec spec = rto::apply_instance_overrides({}, cfg);
    if (args.K) spec.K = *args.K;
    if (args.lambda) spec.lambda = *args.lambda;

    // Reuse the testbed position when the instance belongs to it so seeds match a full run.
    int index = 100;
    const auto testbed = rto::build_testbed();
    for (std::size_t i = 0; i < testbed.size(); ++i)
        if (testbed[i].K == spec.K && std::abs(testbed[i].lambda - spec.lambda) < 1e-12)
            index = static_cast<int>(i);

    const auto dir = std::filesystem::path(args.out) / spec.dir_name();
    const auto res = rto::run_instance(spec, index, args.seed, cfg, dir, stages);
    std::cout << spec.key().label() << ": " << res.states << " states";
    if (res.exact_value_at_empty) std::cout << ", V*(0) = " << *res.exact_value_at_empty;
    if (res.mean_theta) {
        std::cout << ", mean theta =";
        for (double t : *res.mean_theta) std::cout << ' ' << t;
    }
    std::cout << '\n';
    for (const auto& row : res.rollouts)
        std::cout << "  " << row.policy << ": " << row.estimate.mean << " +/- " << row.estimate.half_width
                  << '\n';
    std::cout << "wrote " << dir.string() << '\n';
    return report(res.failures);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Remanufacturing core acquisition: exact and approximate solvers"};
    app.require_subcommand(1);

    CommonArgs tb, ex, adp, sim, an;
    auto* testbed = app.add_subcommand("testbed", "run all 12 instances and write the manifest");
    add_common(testbed, tb, false);
    auto* solve = app.add_subcommand("solve-exact", "value iteration and structure checks");
    add_common(solve, ex, true);
    auto* train = app.add_subcommand("train-adp", "approximate policy iteration repetitions");
    add_common(train, adp, true);
    auto* simulate = app.add_subcommand("simulate", "rollout costs for exact, ADP and heuristic policies");
    add_common(simulate, sim, true);
    auto* analyze = app.add_subcommand("analyze", "theta trends and per-level acquisition costs");
    add_common(analyze, an, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*testbed) {
            const auto cfg = load(tb);
            const auto manifest = rto::run_all(tb.seed, tb.out, cfg);
            std::cout << "instances: " << manifest.instances.size()
                      << ", adp runs: " << manifest.adp_run_count() << ", wrote " << tb.out << '\n';
            return report(manifest.failures);
        }
        if (*solve) return run_single(ex, {true, false, false, false});
        if (*train) return run_single(adp, {false, true, false, false});
        if (*simulate) return run_single(sim, {false, false, true, false});
        if (*analyze) return run_single(an, {false, false, false, true});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
