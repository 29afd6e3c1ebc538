#include "evnet/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace evnet {

void validate_spatial(const SpatialDemand& spatial) {
    if (!(spatial.area > 0)) throw std::invalid_argument("area must be > 0");
    if (spatial.hotspot_fraction < 0 || spatial.hotspot_fraction > 1)
        throw std::invalid_argument("hotspot_fraction must be in [0,1]");
    if (!(spatial.beta_x_a > 0) || !(spatial.beta_x_b > 0) ||
        !(spatial.beta_y_a > 0) || !(spatial.beta_y_b > 0))
        throw std::invalid_argument("Beta shape parameters must be > 0");
    if (!(spatial.patch_scale > 0) || spatial.patch_scale > spatial.area)
        throw std::invalid_argument("patch_scale must be in (0, area]");
}

void validate_profile(const DemandProfile& profile) {
    switch (profile.kind) {
        case ProfileKind::constant:
            if (profile.base < 0) throw std::invalid_argument("constant rate must be >= 0");
            break;
        case ProfileKind::sine:
            if (!(profile.period > 0)) throw std::invalid_argument("sine period must be > 0");
            if (profile.base - std::abs(profile.amplitude) < 0)
                throw std::invalid_argument("sine profile dips below zero");
            break;
        case ProfileKind::table:
            if (profile.hourly.size() != 24)
                throw std::invalid_argument("hourly table must have 24 entries");
            for (double v : profile.hourly)
                if (v < 0) throw std::invalid_argument("hourly rates must be >= 0");
            break;
    }
}

double beta_sample(Rng& rng, double shape_a, double shape_b) {
    std::gamma_distribution<double> ga(shape_a, 1.0);
    std::gamma_distribution<double> gb(shape_b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    const double s = x + y;
    if (s <= 0) return 0.5;
    return x / s;
}

std::pair<double, double> sample_location(const SpatialDemand& spatial, Rng& rng) {
    if (uniform01(rng) < spatial.hotspot_fraction) {
        const double x = spatial.patch_scale * beta_sample(rng, spatial.beta_x_a, spatial.beta_x_b);
        const double y = spatial.patch_scale * beta_sample(rng, spatial.beta_y_a, spatial.beta_y_b);
        return {x, y};
    }
    std::uniform_real_distribution<double> u(0.0, spatial.area);
    const double x = u(rng);
    const double y = u(rng);
    return {x, y};
}

std::pair<double, double> sample_location_in_cell(const SpatialDemand& spatial,
                                                  const std::vector<StationConfig>& stations,
                                                  int station, Rng& rng) {
    if (station < 0 || station >= static_cast<int>(stations.size()))
        throw std::invalid_argument("station index out of range");
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        auto [x, y] = sample_location(spatial, rng);
        if (nearest_station(stations, x, y) == station) return {x, y};
    }
    throw std::runtime_error("could not sample a location in the station's cell");
}

int nearest_station(const std::vector<StationConfig>& stations, double x, double y) {
    if (stations.empty()) throw std::invalid_argument("no stations");
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(stations.size()); ++i) {
        const double dx = x - stations[i].x;
        const double dy = y - stations[i].y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best = i;
            best_d2 = d2;
        }
    }
    return best;
}

std::vector<double> station_shares(const SpatialDemand& spatial,
                                   const std::vector<StationConfig>& stations,
                                   int n_samples, Rng& rng) {
    validate_spatial(spatial);
    if (stations.empty()) throw std::invalid_argument("no stations");
    if (n_samples < 10000) throw std::invalid_argument("need at least 10^4 samples");
    std::vector<long long> counts(stations.size(), 0);
    for (int s = 0; s < n_samples; ++s) {
        auto [x, y] = sample_location(spatial, rng);
        ++counts[nearest_station(stations, x, y)];
    }
    std::vector<double> shares(stations.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        shares[i] = static_cast<double>(counts[i]) / n_samples;
    return shares;
}

double rate_at(const DemandProfile& profile, double t) {
    switch (profile.kind) {
        case ProfileKind::constant:
            return profile.base;
        case ProfileKind::sine:
            return profile.base +
                   profile.amplitude *
                       std::sin(2.0 * M_PI * (t - profile.phase) / profile.period);
        case ProfileKind::table: {
            double h = std::fmod(t, 24.0);
            if (h < 0) h += 24.0;
            return profile.hourly[static_cast<std::size_t>(h)];
        }
    }
    throw std::logic_error("unknown profile kind");
}

double profile_max(const DemandProfile& profile) {
    switch (profile.kind) {
        case ProfileKind::constant:
            return profile.base;
        case ProfileKind::sine:
            return profile.base + std::abs(profile.amplitude);
        case ProfileKind::table:
            return *std::max_element(profile.hourly.begin(), profile.hourly.end());
    }
    throw std::logic_error("unknown profile kind");
}

} // namespace evnet
