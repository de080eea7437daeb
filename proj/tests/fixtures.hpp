#pragma once

#include <random>
#include <vector>

#include "rto/model.hpp"

namespace fixtures {

// Baseline instance built by hand so tests do not depend on the harness.
inline rto::ModelParams baseline(int K, double lambda, int b = 20) {
    rto::ModelParams p;
    p.K = K;
    p.b = b;
    p.lambda = lambda;
    p.alpha = 0.99;
    p.mu = 0.99 - lambda;
    p.c_a = 5.0;
    p.c_l = 100.0;
    p.h.clear();
    p.r.clear();
    p.p.clear();
    for (int i = 1; i <= K; ++i) {
        p.h.push_back(K - i + 1);
        p.r.push_back(10.0 * i);
        p.p.push_back(1.0 / (K + 1));
    }
    p.p_bar = 1.0 / (K + 1);
    return p;
}

// All vectors of length K with entries >= 0 and sum <= b, by brute force.
inline std::vector<rto::State> enumerate(int K, int b) {
    std::vector<rto::State> out;
    rto::State x(K, 0);
    while (true) {
        int s = 0;
        for (int v : x) s += v;
        if (s <= b) out.push_back(x);
        int i = K - 1;
        while (i >= 0 && x[i] == b) x[i--] = 0;
        if (i < 0) break;
        ++x[i];
    }
    return out;
}

inline std::vector<double> random_table(std::size_t n, std::mt19937_64& gen, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& e : v) e = d(gen);
    return v;
}

}  // namespace fixtures
