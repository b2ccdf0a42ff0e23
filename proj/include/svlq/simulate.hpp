// Monte Carlo rollout of the closed loop and empirical cost estimation,
// used to validate the closed-form value matrices. Deterministic given the
// master seed: per-trial sub-seeds come from a counter-based mix so serial
// and parallel execution agree.
#pragma once

#include "synthesis.hpp"

#include <cmath>
#include <ostream>

namespace svlq {

struct SimConfig {
    int trials = 1;
    int horizon = 1;
    std::uint64_t seed = 0;
    Vector x0;
};

struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int trials = 0;
    std::vector<double> per_trial;  // retained for order-insensitive reduction
};

struct Trajectory {
    std::vector<Vector> states;   // x(0..T)
    std::vector<Vector> inputs;   // u(0..T-1)
    std::vector<double> stage_costs;
    double cost = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t counter) {
    return splitmix64(master ^ splitmix64(counter + 1));
}

// Pairwise summation: result is independent of how trials were produced.
inline double pairwise_sum(const double* v, size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace detail

inline Trajectory rollout(const StochasticSystem& sys, const CostSpec& cost,
                          const AffinePolicy& policy, const Vector& x0, int horizon,
                          std::uint64_t seed) {
    if (x0.size() != sys.n()) throw std::invalid_argument("rollout: x0 dimension mismatch");
    if (policy.k_bar.rows() != sys.m() || policy.k_bar.cols() != sys.n())
        throw std::invalid_argument("rollout: policy dimension mismatch");
    std::mt19937_64 rng(seed);
    Matrix r = cost.r_full(sys.structure);
    Trajectory tr;
    tr.states.push_back(x0);
    Vector x = x0;
    for (int k = 0; k < horizon; ++k) {
        std::vector<double> alphas = sample_alphas(sys, rng);
        Matrix a = realize_a(sys, alphas);
        Matrix gain = policy.realized(alphas);
        Vector u = gain * x;
        double stage = x.dot(cost.q_at(k, horizon) * x) + u.dot(r * u);
        tr.stage_costs.push_back(stage);
        tr.cost += stage;
        x = a * x + sys.b_full() * u;
        tr.inputs.push_back(u);
        tr.states.push_back(x);
    }
    tr.cost += x.dot(cost.q_at(horizon, horizon) * x);
    return tr;
}

inline CostEstimate estimate_cost(const StochasticSystem& sys, const CostSpec& cost,
                                  const AffinePolicy& policy, const SimConfig& cfg) {
    if (cfg.trials < 1 || cfg.horizon < 1)
        throw std::invalid_argument("estimate_cost: trials and horizon must be >= 1");
    CostEstimate est;
    est.trials = cfg.trials;
    est.per_trial.resize(cfg.trials);
    for (int t = 0; t < cfg.trials; ++t)
        est.per_trial[t] = rollout(sys, cost, policy, cfg.x0, cfg.horizon,
                                   detail::trial_seed(cfg.seed, t)).cost;
    est.mean = detail::pairwise_sum(est.per_trial.data(), est.per_trial.size()) / cfg.trials;
    if (cfg.trials > 1) {
        std::vector<double> sq(cfg.trials);
        for (int t = 0; t < cfg.trials; ++t) {
            double d = est.per_trial[t] - est.mean;
            sq[t] = d * d;
        }
        double var = detail::pairwise_sum(sq.data(), sq.size()) / (cfg.trials - 1);
        est.std_error = std::sqrt(var / cfg.trials);
    }
    return est;
}

// CSV dump: header row, then one row per step with state, input (empty for
// the terminal row), and the instantaneous cost.
inline void write_csv(std::ostream& os, const Trajectory& tr) {
    size_t n = tr.states.front().size();
    size_t m = tr.inputs.empty() ? 0 : tr.inputs.front().size();
    os << "step";
    for (size_t i = 0; i < n; ++i) os << ",x" << i;
    for (size_t j = 0; j < m; ++j) os << ",u" << j;
    os << ",stage_cost\n";
    os.precision(17);
    for (size_t k = 0; k < tr.states.size(); ++k) {
        os << k;
        for (size_t i = 0; i < n; ++i) os << "," << tr.states[k](i);
        for (size_t j = 0; j < m; ++j) {
            if (k < tr.inputs.size()) os << "," << tr.inputs[k](j);
            else os << ",";
        }
        if (k < tr.stage_costs.size()) os << "," << tr.stage_costs[k];
        else os << ",";
        os << "\n";
    }
}

}  // namespace svlq
