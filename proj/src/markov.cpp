#include "evnet/markov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

namespace evnet {

std::vector<std::string> validate_station(const StationConfig& cfg) {
    if (cfg.grid_slots < 0) throw std::invalid_argument("grid_slots must be >= 0");
    if (cfg.storage_units < 0) throw std::invalid_argument("storage_units must be >= 0");
    if (!(cfg.charge_rate > 0)) throw std::invalid_argument("charge_rate must be > 0");
    if (!(cfg.storage_recharge_rate > 0))
        throw std::invalid_argument("storage_recharge_rate must be > 0");
    if (!(cfg.qos_min > 0 && cfg.qos_min <= cfg.qos_max && cfg.qos_max < 1))
        throw std::invalid_argument("require 0 < qos_min <= qos_max < 1");
    if (!(cfg.price_block_penalty > cfg.price_normal))
        throw std::invalid_argument("price_block_penalty must exceed price_normal");
    if (cfg.theta < 0) throw std::invalid_argument("theta must be >= 0");

    std::vector<std::string> warnings;
    if (cfg.grid_slots == 0 && cfg.storage_units > 0)
        warnings.push_back("S=0 with R>0: storage cannot recharge once drained");
    return warnings;
}

std::vector<std::pair<int, int>> reachable_states(const StationConfig& cfg) {
    const int S = cfg.grid_slots;
    const int R = cfg.storage_units;
    std::set<std::pair<int, int>> seen;
    std::deque<std::pair<int, int>> frontier;
    frontier.push_back({0, R});
    seen.insert({0, R});
    while (!frontier.empty()) {
        auto [n, j] = frontier.front();
        frontier.pop_front();
        auto visit = [&](int nn, int jj) {
            if (seen.insert({nn, jj}).second) frontier.push_back({nn, jj});
        };
        if (n < S) visit(n + 1, j);
        else if (j > 0) visit(n + 1, j - 1);
        if (n > 0) visit(n - 1, j);
        if (j < R && n < S) visit(n, j + 1);
    }
    return {seen.begin(), seen.end()};
}

MarkovModel build_generator(const StationConfig& cfg, double arrival_rate) {
    validate_station(cfg);
    if (!(arrival_rate > 0) || !std::isfinite(arrival_rate))
        throw std::invalid_argument("arrival_rate must be > 0 and finite");

    MarkovModel model;
    model.grid_slots = cfg.grid_slots;
    model.storage_units = cfg.storage_units;
    model.states = reachable_states(cfg);
    const int m = static_cast<int>(model.states.size());
    std::unordered_map<std::int64_t, int> index;
    index.reserve(model.states.size());
    auto key = [](int n, int j) {
        return (static_cast<std::int64_t>(n) << 32) | static_cast<std::uint32_t>(j);
    };
    for (int i = 0; i < m; ++i)
        index[key(model.states[i].first, model.states[i].second)] = i;

    const int S = cfg.grid_slots;
    const int R = cfg.storage_units;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        auto [n, j] = model.states[i];
        if (n < S) Q(i, index.at(key(n + 1, j))) += arrival_rate;
        else if (j > 0) Q(i, index.at(key(n + 1, j - 1))) += arrival_rate;
        if (n > 0) Q(i, index.at(key(n - 1, j))) += n * cfg.charge_rate;
        if (j < R && n < S) Q(i, index.at(key(n, j + 1))) += cfg.storage_recharge_rate;
        Q(i, i) = -Q.row(i).sum();
    }
    model.generator = std::move(Q);
    return model;
}

void stationary_distribution(MarkovModel& model) {
    const int m = static_cast<int>(model.states.size());
    if (m == 0) throw std::invalid_argument("empty model");

    const double scale = std::max(1.0, model.generator.cwiseAbs().maxCoeff());
    Eigen::MatrixXd A = (model.generator / scale).transpose();
    A.row(m - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b(m - 1) = 1.0;

    Eigen::VectorXd pi = A.partialPivLu().solve(b);

    auto residual_of = [&](const Eigen::VectorXd& p) {
        return (p.transpose() * model.generator).cwiseAbs().maxCoeff();
    };

    bool ok = pi.allFinite() && pi.minCoeff() > -1e-9;
    double res = ok ? residual_of(pi) : std::numeric_limits<double>::infinity();
    if (!ok || res > 1e-9 * scale) {
        // Rank-revealing fallback for chains with transient states.
        Eigen::MatrixXd Af(m + 1, m);
        Af.topRows(m) = (model.generator / scale).transpose();
        Af.row(m).setOnes();
        Eigen::VectorXd bf = Eigen::VectorXd::Zero(m + 1);
        bf(m) = 1.0;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Af);
        if (qr.rank() < m)
            throw std::runtime_error("singular stationary system: reachable class not unique");
        pi = qr.solve(bf);
        res = residual_of(pi);
        if (!pi.allFinite() || pi.minCoeff() < -1e-8 || res > 1e-8 * scale)
            throw std::runtime_error("stationary solve failed to converge");
    }

    for (int i = 0; i < m; ++i) pi(i) = std::max(pi(i), 0.0);
    pi /= pi.sum();
    model.stationary = std::move(pi);
    model.residual = residual_of(model.stationary);

    const int S = model.grid_slots;
    double blocked = 0.0;
    for (int i = 0; i < m; ++i) {
        auto [n, j] = model.states[i];
        if (n >= S && j == 0) blocked += model.stationary(i);
    }
    model.blocking_prob = blocked;
}

double blocking_probability(const StationConfig& cfg, double arrival_rate) {
    if (cfg.grid_slots == 0 && cfg.storage_units == 0) return 1.0;
    MarkovModel model = build_generator(cfg, arrival_rate);
    stationary_distribution(model);
    return model.blocking_prob;
}

double weighted_blocking(double b_ev, double b_rb, double gamma1, double gamma2) {
    if (std::abs(gamma1 + gamma2 - 1.0) > 1e-9)
        throw std::invalid_argument("blocking weights must sum to 1");
    if (!(gamma2 > gamma1))
        throw std::invalid_argument("routed-blocking weight must exceed local weight");
    return gamma1 * b_ev + gamma2 * b_rb;
}

double admissible_rate_cap(const StationConfig& cfg) {
    return (cfg.grid_slots + cfg.storage_units) * cfg.charge_rate * 1048576.0;
}

double max_admissible_rate(const StationConfig& cfg) {
    validate_station(cfg);
    if (cfg.grid_slots == 0)
        throw std::runtime_error("infeasible config: blocking is 1 at any rate");

    const double cap = admissible_rate_cap(cfg);
    double hi = (cfg.grid_slots + cfg.storage_units) * cfg.charge_rate;
    while (blocking_probability(cfg, hi) <= cfg.qos_max) {
        hi *= 2.0;
        if (hi >= cap) return cap;
    }
    double lo = 1e-9;
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        if (blocking_probability(cfg, mid) <= cfg.qos_max) lo = mid;
        else hi = mid;
    }
    return lo;
}

double BlockingCache::at(double arrival_rate) {
    if (arrival_rate <= 0) return 0.0;
    const std::int64_t k = std::llround(arrival_rate * 1000.0);
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    const double b = blocking_probability(cfg_, std::max(arrival_rate, 1e-9));
    memo_.emplace(k, b);
    return b;
}

} // namespace evnet
