#include "rto/model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rto {

namespace {

constexpr double kSumTol = 1e-12;

std::uint64_t checked_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n - k) k = n - k;
    unsigned __int128 acc = 1;
    for (std::uint64_t j = 1; j <= k; ++j) {
        acc = acc * (n - k + j) / j;
        if (acc > std::numeric_limits<std::uint64_t>::max())
            throw ModelError("state space size overflows a 64-bit integer");
    }
    return static_cast<std::uint64_t>(acc);
}

}  // namespace

void ModelParams::validate() const {
    if (K < 1) throw ModelError("K must be at least 1");
    if (b < 0) throw ModelError("b must be nonnegative");
    if (!(lambda > 0.0)) throw ModelError("lambda must be positive");
    if (!(mu > 0.0)) throw ModelError("mu must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ModelError("alpha must lie in (0,1)");
    if (std::abs(lambda + mu - alpha) > kSumTol)
        throw ModelError("time scale requires lambda + mu = alpha");
    if (c_a < 0.0) throw ModelError("c_a must be nonnegative");
    const auto k = static_cast<std::size_t>(K);
    if (h.size() != k || r.size() != k || p.size() != k)
        throw ModelError("h, r and p must each have K entries");
    for (std::size_t i = 0; i < k; ++i) {
        if (!(h[i] > 0.0)) throw ModelError("holding costs must be positive");
        if (i > 0 && h[i] > h[i - 1]) throw ModelError("holding costs must be non-increasing in i");
        if (i > 0 && r[i] < r[i - 1]) throw ModelError("remanufacturing costs must be non-decreasing in i");
        if (p[i] < 0.0) throw ModelError("quality probabilities must be nonnegative");
    }
    if (c_l < r.back()) throw ModelError("lost-sales cost must be at least r_K");
    if (p_bar < 0.0) throw ModelError("discard probability must be nonnegative");
    const double mass = std::accumulate(p.begin(), p.end(), p_bar);
    if (std::abs(mass - 1.0) > kSumTol)
        throw ModelError("p_bar + sum(p) must equal 1");
}

int total(const State& x) { return std::accumulate(x.begin(), x.end(), 0); }

std::uint64_t state_space_size(const ModelParams& params) {
    if (params.K < 0 || params.b < 0) throw ModelError("K and b must be nonnegative");
    return checked_binomial(static_cast<std::uint64_t>(params.b + params.K),
                            static_cast<std::uint64_t>(params.K));
}

StateSpace::StateSpace(const ModelParams& params) : K_(params.K), b_(params.b) {
    if (K_ < 1 || b_ < 0) throw ModelError("state space needs K >= 1 and b >= 0");
    const std::uint64_t n = state_space_size(params);
    constexpr std::uint64_t kMaxStates = 50'000'000;
    if (n > kMaxStates) throw ModelError("state space too large to enumerate");
    size_ = static_cast<std::size_t>(n);

    // count(len, cap) = binomial(len + cap, len), filled by the Pascal recurrence.
    table_.assign(static_cast<std::size_t>(K_ + 1) * (b_ + 1), 0);
    for (int cap = 0; cap <= b_; ++cap) table_[cap] = 1;
    for (int len = 1; len <= K_; ++len) {
        for (int cap = 0; cap <= b_; ++cap) {
            std::uint64_t v = table_[(len - 1) * (b_ + 1) + cap];
            if (cap > 0) v += table_[len * (b_ + 1) + cap - 1];
            table_[len * (b_ + 1) + cap] = v;
        }
    }

    levels_.resize(size_);
    by_level_.resize(b_ + 1);
    up_.assign(size_ * K_, npos);
    down_.assign(size_ * K_, npos);
    State x(K_, 0);
    for (std::size_t idx = 0; idx < size_; ++idx) {
        // Enumeration walks x in rank order, so unindex is avoided here.
        const int lvl = total(x);
        levels_[idx] = lvl;
        by_level_[lvl].push_back(idx);
        for (int i = 0; i < K_; ++i) {
            if (lvl < b_) {
                ++x[i];
                up_[idx * K_ + i] = index(x);
                --x[i];
            }
            if (x[i] > 0) {
                --x[i];
                down_[idx * K_ + i] = index(x);
                ++x[i];
            }
        }
        // Advance to the lexicographic successor.
        if (lvl < b_) {
            ++x[K_ - 1];
        } else {
            int j = K_ - 1;
            while (j >= 0 && x[j] == 0) --j;
            if (j <= 0) break;
            x[j] = 0;
            ++x[j - 1];
        }
    }
}

bool StateSpace::feasible(const State& x) const {
    if (static_cast<int>(x.size()) != K_) return false;
    long sum = 0;
    for (int v : x) {
        if (v < 0) return false;
        sum += v;
    }
    return sum <= b_;
}

std::size_t StateSpace::index(const State& x) const {
    if (!feasible(x)) throw ModelError("infeasible state " + to_string(x));
    std::uint64_t rank = 0;
    int rem = b_;
    for (int i = 0; i < K_; ++i) {
        const int len = K_ - i - 1;
        for (int v = 0; v < x[i]; ++v) rank += count(len, rem - v);
        rem -= x[i];
    }
    return static_cast<std::size_t>(rank);
}

State StateSpace::unindex(std::size_t idx) const {
    if (idx >= size_) throw ModelError("state index out of range");
    State x(K_, 0);
    std::uint64_t rest = idx;
    int rem = b_;
    for (int i = 0; i < K_; ++i) {
        const int len = K_ - i - 1;
        int v = 0;
        while (rest >= count(len, rem - v)) {
            rest -= count(len, rem - v);
            ++v;
        }
        x[i] = v;
        rem -= v;
    }
    return x;
}

double holding_rate(const ModelParams& params, const State& x) {
    double rate = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rate += params.h[i] * x[i];
    return rate;
}

T1Result apply_t1(const ModelParams& params, const ValueFunction& V, const State& x) {
    const double keep = V(x);
    if (total(x) >= params.b) return {keep, 0};
    State y = x;
    double acquire = params.c_a;
    for (int i = 0; i < params.K; ++i) {
        ++y[i];
        acquire += params.p[i] * V(y);
        --y[i];
    }
    acquire += params.p_bar * keep;
    if (acquire < keep) return {acquire, 1};
    return {keep, 0};
}

T2Result apply_t2(const ModelParams& params, const ValueFunction& V, const State& x) {
    T2Result best{V(x) + params.c_l, 0};
    State y = x;
    for (int i = 0; i < params.K; ++i) {
        if (x[i] < 1) continue;
        --y[i];
        const double v = V(y) + params.r[i];
        ++y[i];
        if (v < best.cost) best = {v, i + 1};
    }
    return best;
}

double bellman_apply(const ModelParams& params, const ValueFunction& V, const State& x) {
    return params.mu * apply_t1(params, V, x).cost + params.lambda * apply_t2(params, V, x).cost +
           holding_rate(params, x);
}

bool admissible(const ModelParams& params, const State& x, const Action& a) {
    if (a.tau != 0 && a.tau != 1) return false;
    if (a.eta < 0 || a.eta > params.K) return false;
    if (a.tau == 1 && total(x) >= params.b) return false;
    if (a.eta >= 1 && x[a.eta - 1] < 1) return false;
    return true;
}

Transition sample_transition(const ModelParams& params, const State& x, const Action& action,
                             Rng& rng) {
    if (!admissible(params, x, action))
        throw std::invalid_argument("inadmissible action in state " + to_string(x));
    const double rate = params.lambda + params.mu;
    Transition tr;
    tr.next = x;
    const bool acquisition = rng.uniform() < params.mu / rate;
    tr.t_w = rng.exponential(rate);
    if (acquisition) {
        tr.event.kind = EventKind::Acquisition;
        if (action.tau == 1) {
            const double u = rng.uniform();
            double cum = 0.0;
            int quality = 0;
            for (int j = 0; j < params.K; ++j) {
                cum += params.p[j];
                if (u < cum) {
                    quality = j + 1;
                    break;
                }
            }
            tr.event.quality = quality;
            if (quality > 0) ++tr.next[quality - 1];
        }
    } else {
        tr.event.kind = EventKind::Demand;
        if (action.eta >= 1) --tr.next[action.eta - 1];
    }
    return tr;
}

double immediate_cost(const ModelParams& params, const State& x, const Action& action,
                      const Event& event, double t_w) {
    const double holding = t_w * holding_rate(params, x);
    if (event.kind == EventKind::Acquisition) return holding + (action.tau == 1 ? params.c_a : 0.0);
    return holding + (action.eta == 0 ? params.c_l : params.r[action.eta - 1]);
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL + 1));
}

std::string to_string(const State& x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ')';
    return os.str();
}

}  // namespace rto
