#pragma once

#include <vector>

#include "evnet/rng.hpp"
#include "evnet/station.hpp"

namespace evnet {

// Customer locations follow a mixture: with probability hotspot_fraction the
// point lands in a [0,patch_scale]^2 patch with Beta-distributed coordinates,
// otherwise uniformly over the full area x area square.
struct SpatialDemand {
    double area = 30.0;
    double hotspot_fraction = 0.5;
    double beta_x_a = 4.42;
    double beta_x_b = 0.763;
    double beta_y_a = 2.42;
    double beta_y_b = 0.799;
    double patch_scale = 15.0;
};

enum class ProfileKind { constant, sine, table };

// Total network arrival rate over time. sine evaluates
// base + amplitude * sin(2*pi*(t - phase) / period); table is a repeating
// 24-entry hourly step function.
struct DemandProfile {
    ProfileKind kind = ProfileKind::constant;
    double base = 0.0;
    double amplitude = 0.0;
    double period = 24.0;
    double phase = 0.0;
    std::vector<double> hourly;
};

void validate_spatial(const SpatialDemand& spatial);
void validate_profile(const DemandProfile& profile);

double beta_sample(Rng& rng, double shape_a, double shape_b);

std::pair<double, double> sample_location(const SpatialDemand& spatial, Rng& rng);

// Rejection-samples a location conditioned on falling in the Voronoi cell of
// the given station.
std::pair<double, double> sample_location_in_cell(const SpatialDemand& spatial,
                                                  const std::vector<StationConfig>& stations,
                                                  int station, Rng& rng);

int nearest_station(const std::vector<StationConfig>& stations, double x, double y);

std::vector<double> station_shares(const SpatialDemand& spatial,
                                   const std::vector<StationConfig>& stations,
                                   int n_samples, Rng& rng);

double rate_at(const DemandProfile& profile, double t);

// Supremum of rate_at over all t, used as the thinning envelope.
double profile_max(const DemandProfile& profile);

} // namespace evnet
