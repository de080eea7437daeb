#include "rto/harness.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace rto {

namespace fs = std::filesystem;
using nlohmann::json;

std::string InstanceSpec::dir_name() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "instance_K%d_L%g", K, lambda);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw ConfigError("line " + std::to_string(line) + ": '" + text + "' is not a number");
    return v;
}

int as_int(double v, const std::string& key, int line) {
    if (v != static_cast<double>(static_cast<int>(v)))
        throw ConfigError("line " + std::to_string(line) + ": " + key + " must be an integer");
    return static_cast<int>(v);
}

const char* kModelKeys[] = {"K", "b", "lambda", "mu", "c_a", "c_l", "alpha"};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

json state_json(const std::optional<State>& x) {
    if (!x) return nullptr;
    return json(*x);
}

json structure_json(const InstanceResult& res) {
    json j;
    j["instance"] = res.spec.key().label();
    j["K"] = res.spec.K;
    j["lambda"] = res.spec.lambda;
    j["states"] = res.states;
    if (res.exact_report) {
        j["iterations"] = res.exact_report->iterations;
        j["residual"] = res.exact_report->residual;
    }
    if (res.bellman_residual) j["bellman_residual"] = *res.bellman_residual;
    if (res.exact_value_at_empty) j["value_at_empty"] = *res.exact_value_at_empty;
    json findings = json::array();
    if (res.structure) {
        for (const auto& f : res.structure->findings) {
            findings.push_back({{"name", f.name},
                                {"holds", f.holds},
                                {"counterexample", state_json(f.counterexample)},
                                {"detail", f.detail}});
        }
    }
    j["findings"] = findings;
    return j;
}

json config_json(const HarnessConfig& c) {
    json j;
    j["model_overrides"] = c.model_overrides;
    j["N"] = c.adp.N;
    j["Z"] = c.adp.Z;
    j["beta"] = c.adp.beta;
    j["delta"] = c.adp.delta;
    j["epsilon"] = c.adp.epsilon;
    j["sampler"] = c.adp.sampler.kind == StateSampler::Kind::Uniform ? "uniform" : "level_mixture";
    j["level_weight"] = c.adp.sampler.level_weight;
    j["repetitions"] = c.repetitions;
    j["rollout_replications"] = c.rollout_replications;
    j["rollout_tail"] = c.rollout_tail;
    j["order_up_to"] = c.order_up_to;
    j["vi_tol"] = c.vi.tol;
    j["vi_max_iter"] = c.vi.max_iter;
    return j;
}

}  // namespace

HarnessConfig parse_config(std::istream& in, HarnessConfig cfg) {
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const double v = parse_number(trim(text.substr(eq + 1)), line);

        bool model_key = false;
        for (const char* k : kModelKeys) model_key |= key == k;
        if (model_key) {
            if (key == "K" || key == "b") as_int(v, key, line);
            cfg.model_overrides[key] = v;
        } else if (key == "N") {
            cfg.adp.N = as_int(v, key, line);
        } else if (key == "Z") {
            cfg.adp.Z = as_int(v, key, line);
        } else if (key == "beta") {
            cfg.adp.beta = v;
        } else if (key == "delta") {
            cfg.adp.delta = v;
        } else if (key == "epsilon") {
            cfg.adp.epsilon = v;
        } else if (key == "level_weight") {
            cfg.adp.sampler.level_weight = v;
        } else if (key == "sampler") {
            cfg.adp.sampler.kind = as_int(v, key, line) == 0 ? StateSampler::Kind::Uniform
                                                             : StateSampler::Kind::LevelMixture;
        } else if (key == "repetitions") {
            cfg.repetitions = as_int(v, key, line);
        } else if (key == "rollout_replications") {
            cfg.rollout_replications = as_int(v, key, line);
        } else if (key == "rollout_tail") {
            cfg.rollout_tail = v;
        } else if (key == "order_up_to") {
            cfg.order_up_to = as_int(v, key, line);
        } else {
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        }
    }
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be at least 1");
    return cfg;
}

HarnessConfig load_config(const fs::path& path, HarnessConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    return parse_config(in, std::move(base));
}

InstanceSpec apply_instance_overrides(InstanceSpec spec, const HarnessConfig& config) {
    if (auto it = config.model_overrides.find("K"); it != config.model_overrides.end())
        spec.K = static_cast<int>(it->second);
    if (auto it = config.model_overrides.find("lambda"); it != config.model_overrides.end())
        spec.lambda = it->second;
    return spec;
}

ModelParams make_params(const InstanceSpec& spec, const HarnessConfig& config) {
    const auto& ov = config.model_overrides;
    auto get = [&](const char* key, double fallback) {
        const auto it = ov.find(key);
        return it == ov.end() ? fallback : it->second;
    };
    ModelParams p;
    p.K = spec.K;
    p.lambda = spec.lambda;
    p.b = static_cast<int>(get("b", 20));
    p.alpha = get("alpha", 0.99);
    p.mu = get("mu", p.alpha - p.lambda);
    p.c_a = get("c_a", 5.0);
    p.c_l = get("c_l", 100.0);
    const double share = 1.0 / (p.K + 1);
    for (int i = 1; i <= p.K; ++i) {
        p.h.push_back(p.K - i + 1);
        p.r.push_back(10.0 * i);
        p.p.push_back(share);
    }
    p.p_bar = share;
    p.validate();
    return p;
}

std::vector<InstanceSpec> build_testbed() {
    std::vector<InstanceSpec> out;
    for (int K : {2, 3, 4, 5})
        for (double lambda : {0.25, 0.5, 0.75}) out.push_back({K, lambda});
    return out;
}

std::uint64_t adp_seed(std::uint64_t master_seed, int instance_index, int repetition) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(instance_index) + 1,
                       static_cast<std::uint64_t>(repetition) + 1);
}

std::uint64_t rollout_seed(std::uint64_t master_seed, int instance_index) {
    return derive_seed(master_seed ^ 0x5ca1ab1eULL, static_cast<std::uint64_t>(instance_index) + 1);
}

InstanceResult run_instance(const InstanceSpec& spec, int index, std::uint64_t master_seed,
                            const HarnessConfig& config, const fs::path& dir, const Stages& stages) {
    InstanceResult res;
    res.spec = spec;
    res.index = index;
    const std::string label = spec.key().label();
    auto record = [&](const std::string& task, const std::exception& e) {
        res.failures.push_back(label + " " + task + ": " + e.what());
    };

    ModelParams params;
    std::optional<StateSpace> space;
    try {
        params = make_params(spec, config);
        space.emplace(params);
        res.states = space->size();
        fs::create_directories(dir);
    } catch (const std::exception& e) {
        record("setup", e);
        return res;
    }

    std::optional<ExactSolution> exact;
    std::optional<PolicyTable> policy;
    if (stages.exact || stages.simulate || stages.analyze) {
        try {
            exact = value_iteration(params, *space, config.vi);
            policy = extract_policy(params, *space, exact->value);
            res.exact_report = exact->report;
            res.bellman_residual = bellman_residual(params, *space, exact->value);
            res.structure = check_structure(params, *space, exact->value, *policy);
            res.exact_value_at_empty = exact->value.values[0];
            if (stages.exact) {
                std::ostringstream v, pol;
                write_value_csv(v, *space, exact->value);
                write_policy_csv(pol, *space, exact->value, *policy);
                write_file(dir / "exact_value.csv", v.str());
                write_file(dir / "exact_policy.csv", pol.str());
                write_file(dir / "structure.json", structure_json(res).dump(2) + "\n");
            }
        } catch (const std::exception& e) {
            record("exact", e);
            exact.reset();
            policy.reset();
        }
    }

    if (stages.adp || stages.simulate || stages.analyze) {
        std::vector<ThetaRun> runs;
        for (int rep = 0; rep < config.repetitions; ++rep) {
            AdpRunRecord rec;
            rec.repetition = rep;
            rec.seed = adp_seed(master_seed, index, rep);
            try {
                AdpConfig cfg = config.adp;
                cfg.seed = rec.seed;
                const ApiResult api = run_api(params, *space, cfg);
                rec.theta = api.theta;
                rec.ok = true;
                runs.push_back({spec.key(), rep, api.theta});
                if (stages.adp) {
                    std::ostringstream os;
                    write_trace_csv(os, api.trace);
                    write_file(dir / ("adp_rep" + std::to_string(rep) + ".csv"), os.str());
                }
            } catch (const std::exception& e) {
                rec.error = e.what();
                record("adp rep " + std::to_string(rep), e);
            }
            res.adp_runs.push_back(std::move(rec));
        }
        if (!runs.empty()) {
            const ThetaTrendTable trends = theta_trends(runs);
            res.mean_theta = trends.rows.front().mean;
            try {
                std::ostringstream os;
                write_theta_trends_csv(os, trends);
                write_file(dir / "theta_trends.csv", os.str());
            } catch (const std::exception& e) {
                record("theta trends", e);
            }
        }
    }

    if (stages.analyze) {
        try {
            if (res.mean_theta) {
                res.adp_threshold =
                    t1_cost_by_level(params, *space, approx_value_function(params, *res.mean_theta));
                std::ostringstream os;
                write_t1_levels_csv(os, label, *res.adp_threshold);
                write_file(dir / "t1_levels.csv", os.str());
            }
            if (exact) {
                res.exact_threshold = t1_cost_by_level(params, *space, exact->value.as_function(*space));
                std::ostringstream os;
                write_t1_levels_csv(os, label, *res.exact_threshold);
                write_file(dir / "t1_levels_exact.csv", os.str());
            }
        } catch (const std::exception& e) {
            record("analysis", e);
        }
    }

    if (stages.simulate) {
        try {
            RolloutConfig rc;
            rc.initial = State(params.K, 0);
            rc.replications = config.rollout_replications;
            rc.tail_tolerance = config.rollout_tail;
            rc.seed = rollout_seed(master_seed, index);
            rc.threads = config.threads;
            std::vector<PolicySource> sources;
            if (policy) sources.push_back(PolicySource::exact(*space, *policy));
            if (res.mean_theta) sources.push_back(PolicySource::theta_greedy(*res.mean_theta));
            sources.push_back(PolicySource::heuristic({HeuristicRule::NeverAcquire}));
            sources.push_back(PolicySource::heuristic({HeuristicRule::AcquireBelowCapacity}));
            sources.push_back(
                PolicySource::heuristic({HeuristicRule::MyopicOrderUpTo, config.order_up_to}));
            for (const auto& src : sources)
                res.rollouts.push_back({src.name(), label, rollout_cost(params, src, rc)});
            std::ostringstream os;
            write_rollouts_csv(os, res.rollouts);
            write_file(dir / "rollouts.csv", os.str());
        } catch (const std::exception& e) {
            record("simulate", e);
        }
    }
    return res;
}

std::size_t RunManifest::adp_run_count() const {
    std::size_t n = 0;
    for (const auto& inst : instances) n += inst.adp_runs.size();
    return n;
}

std::vector<ThetaRun> collect_theta_runs(const std::vector<InstanceResult>& results) {
    std::vector<ThetaRun> runs;
    for (const auto& inst : results)
        for (const auto& rec : inst.adp_runs)
            if (rec.ok) runs.push_back({inst.spec.key(), rec.repetition, rec.theta});
    return runs;
}

RunManifest run_all(std::uint64_t master_seed, const fs::path& out_dir, const HarnessConfig& config) {
    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.master_seed = master_seed;
    manifest.started_at = utc_now();
    fs::create_directories(out_dir);

    const auto testbed = build_testbed();
    for (std::size_t i = 0; i < testbed.size(); ++i) {
        const auto& spec = testbed[i];
        manifest.instances.push_back(
            run_instance(spec, static_cast<int>(i), master_seed, config, out_dir / spec.dir_name()));
        const auto& res = manifest.instances.back();
        manifest.failures.insert(manifest.failures.end(), res.failures.begin(), res.failures.end());
    }

    auto guarded = [&](const char* task, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            manifest.failures.push_back(std::string("aggregate ") + task + ": " + e.what());
        }
    };
    guarded("theta_trends", [&] {
        std::ostringstream os;
        write_theta_trends_csv(os, theta_trends(collect_theta_runs(manifest.instances)));
        write_file(out_dir / "theta_trends.csv", os.str());
    });
    guarded("t1_levels", [&] {
        std::ostringstream os;
        bool header = true;
        for (const auto& inst : manifest.instances) {
            if (!inst.adp_threshold) continue;
            write_t1_levels_csv(os, inst.spec.key().label(), *inst.adp_threshold, header);
            header = false;
        }
        write_file(out_dir / "t1_levels.csv", os.str());
    });
    guarded("rollouts", [&] {
        std::vector<RolloutRow> rows;
        for (const auto& inst : manifest.instances)
            rows.insert(rows.end(), inst.rollouts.begin(), inst.rollouts.end());
        std::ostringstream os;
        write_rollouts_csv(os, rows);
        write_file(out_dir / "rollouts.csv", os.str());
    });

    manifest.finished_at = utc_now();

    json j;
    j["tool_version"] = manifest.tool_version;
    j["master_seed"] = manifest.master_seed;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["config"] = config_json(config);
    j["adp_run_count"] = manifest.adp_run_count();
    json instances = json::array();
    for (const auto& inst : manifest.instances) {
        json ji = structure_json(inst);
        ji["index"] = inst.index;
        ji["directory"] = inst.spec.dir_name();
        if (inst.exact_report) ji["exact_seconds"] = inst.exact_report->elapsed.count();
        json reps = json::array();
        for (const auto& rec : inst.adp_runs) {
            json jr{{"repetition", rec.repetition}, {"seed", rec.seed}, {"ok", rec.ok}};
            if (rec.ok) jr["theta"] = rec.theta;
            else jr["error"] = rec.error;
            reps.push_back(jr);
        }
        ji["adp_runs"] = reps;
        if (inst.mean_theta) ji["mean_theta"] = *inst.mean_theta;
        if (inst.adp_threshold) ji["adp_threshold"] = inst.adp_threshold->threshold;
        if (inst.exact_threshold) ji["exact_threshold"] = inst.exact_threshold->threshold;
        ji["rollout_seed"] = rollout_seed(master_seed, inst.index);
        instances.push_back(ji);
    }
    j["instances"] = instances;
    j["failures"] = manifest.failures;
    j["complete"] = true;
    write_file(out_dir / "manifest.json", j.dump(2) + "\n");
    return manifest;
}

}  // namespace rto
