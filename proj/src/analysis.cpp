#include "rto/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace rto {

ThresholdReport t1_cost_by_level(const ModelParams& params, const StateSpace& space,
                                 const ValueFunction& V) {
    ThresholdReport report;
    for (int lvl = 0; lvl <= space.capacity(); ++lvl) {
        LevelCosts lc;
        lc.level = lvl;
        const auto& members = space.states_at_level(lvl);
        lc.n_states = members.size();
        const bool room = lvl < params.b;
        double keep_sum = 0.0;
        double acquire_sum = 0.0;
        for (std::size_t s : members) {
            State x = space.unindex(s);
            const double keep = V(x);
            keep_sum += keep;
            if (!room) continue;
            double acquire = params.c_a;
            for (int i = 0; i < params.K; ++i) {
                ++x[i];
                acquire += params.p[i] * V(x);
                --x[i];
            }
            acquire += params.p_bar * keep;
            acquire_sum += acquire;
            if (acquire < keep) ++lc.n_acquire_preferred;
        }
        const auto n = static_cast<double>(lc.n_states);
        lc.mean_keep = keep_sum / n;
        if (room) {
            lc.mean_acquire = acquire_sum / n;
            if (*lc.mean_acquire < lc.mean_keep) report.threshold = lvl;
            if (lc.n_acquire_preferred == lc.n_states && report.all_states_acquire_up_to == lvl - 1)
                report.all_states_acquire_up_to = lvl;
            if (lc.n_acquire_preferred > 0) report.some_state_acquires_up_to = lvl;
        }
        report.levels.push_back(lc);
    }
    return report;
}

std::string InstanceKey::label() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "K%d_L%g", K, lambda);
    return buf;
}

const ThetaTrendRow* ThetaTrendTable::find(const InstanceKey& key) const {
    for (const auto& row : rows)
        if (row.instance == key) return &row;
    return nullptr;
}

namespace {

// Checks seq[j+1] > seq[j] (increasing) or seq[j+1] <= seq[j] (non-increasing).
MonotoneVerdict check_sequence(std::string name, const std::vector<double>& seq, bool increasing) {
    MonotoneVerdict v;
    v.name = std::move(name);
    for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
        const double a = seq[j];
        const double b = seq[j + 1];
        const bool ok = increasing ? b > a : b <= a;
        if (ok) continue;
        ++v.violations;
        const double pair_mean = 0.5 * (std::abs(a) + std::abs(b));
        const double rel = pair_mean > 0.0 ? std::abs(b - a) / pair_mean : 0.0;
        v.worst_relative = std::max(v.worst_relative, rel);
    }
    v.holds = v.violations == 0;
    return v;
}

}  // namespace

ThetaTrendTable theta_trends(std::vector<ThetaRun> runs) {
    // Sorting first makes the sums independent of the input order.
    std::sort(runs.begin(), runs.end(), [](const ThetaRun& a, const ThetaRun& b) {
        if (a.instance.K != b.instance.K) return a.instance.K < b.instance.K;
        if (a.instance.lambda != b.instance.lambda) return a.instance.lambda < b.instance.lambda;
        return a.repetition < b.repetition;
    });

    ThetaTrendTable table;
    for (std::size_t lo = 0; lo < runs.size();) {
        std::size_t hi = lo;
        while (hi < runs.size() && runs[hi].instance == runs[lo].instance) ++hi;
        const std::size_t width = runs[lo].theta.size();
        ThetaTrendRow row;
        row.instance = runs[lo].instance;
        row.repetitions = static_cast<int>(hi - lo);
        row.mean.assign(width, 0.0);
        row.stddev.assign(width, 0.0);
        for (std::size_t r = lo; r < hi; ++r) {
            if (runs[r].theta.size() != width) throw std::invalid_argument("theta widths differ");
            for (std::size_t i = 0; i < width; ++i) row.mean[i] += runs[r].theta[i];
        }
        for (double& m : row.mean) m /= static_cast<double>(row.repetitions);
        if (row.repetitions > 1) {
            for (std::size_t r = lo; r < hi; ++r)
                for (std::size_t i = 0; i < width; ++i) {
                    const double d = runs[r].theta[i] - row.mean[i];
                    row.stddev[i] += d * d;
                }
            for (double& s : row.stddev) s = std::sqrt(s / (row.repetitions - 1));
        }
        table.rows.push_back(std::move(row));
        lo = hi;
    }

    std::map<int, std::vector<const ThetaTrendRow*>> by_k;
    for (const auto& row : table.rows) by_k[row.instance.K].push_back(&row);
    for (const auto& [K, rows] : by_k) {
        if (rows.size() < 2) continue;
        std::vector<double> seq;
        for (const auto* row : rows) seq.push_back(row->mean[0]);
        table.verdicts.push_back(
            check_sequence("theta0_increasing_in_lambda_K" + std::to_string(K), seq, true));
        for (int i = 1; i <= K; ++i) {
            seq.clear();
            for (const auto* row : rows) seq.push_back(row->mean[i]);
            table.verdicts.push_back(check_sequence(
                "theta" + std::to_string(i) + "_nonincreasing_in_lambda_K" + std::to_string(K), seq,
                false));
        }
    }
    for (const auto& row : table.rows) {
        const std::vector<double> coeffs(row.mean.begin() + 1, row.mean.end());
        table.verdicts.push_back(
            check_sequence("theta_ordered_by_quality_" + row.instance.label(), coeffs, false));
    }
    return table;
}

void write_theta_trends_csv(std::ostream& os, const ThetaTrendTable& table, bool header) {
    if (header) os << "instance,lambda,K,i,mean,std\n";
    char buf[96];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.mean.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%g,%d,%zu,%.17g,%.17g", row.instance.lambda,
                          row.instance.K, i, row.mean[i], row.stddev[i]);
            os << row.instance.label() << ',' << buf << '\n';
        }
    }
}

void write_t1_levels_csv(std::ostream& os, const std::string& instance, const ThresholdReport& report,
                         bool header) {
    if (header) os << "instance,level,mean_keep,mean_acquire,n_states\n";
    char buf[48];
    for (const auto& lc : report.levels) {
        os << instance << ',' << lc.level << ',';
        std::snprintf(buf, sizeof buf, "%.17g", lc.mean_keep);
        os << buf << ',';
        if (lc.mean_acquire) {
            std::snprintf(buf, sizeof buf, "%.17g", *lc.mean_acquire);
            os << buf;
        }
        os << ',' << lc.n_states << '\n';
    }
}

}  // namespace rto
