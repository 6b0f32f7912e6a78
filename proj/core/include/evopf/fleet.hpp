#pragma once

#include <string>
#include <vector>

#include "evopf/errors.hpp"

namespace evopf {

/// One charger option a charging point may use in a given hour.
struct ChargerLevel {
    std::string id;          ///< short label, e.g. "fast", "level2"
    double p_max = 0.0;      ///< rated charging power, p.u.
    double deg_weight = 1.0; ///< multiplier on the quadratic wear term for this level
};

/// An aggregated charging point: several identical vehicles at one bus treated
/// as one store with scaled bounds and charger power.
struct EvSpec {
    int bus = -1;
    double e_min = 0.0; ///< stored energy floor, p.u.-h
    double e_max = 0.0; ///< stored energy ceiling, p.u.-h
    double eta_c = 1.0; ///< charging efficiency in (0,1]
    double eta_d = 1.0; ///< discharging efficiency in (0,1]
    std::vector<ChargerLevel> levels;
    /// Per-hour driving draw while traveling, p.u.; length equals the horizon.
    std::vector<double> p_travel;
};

/// Hourly modulation shared by the whole fleet: what fraction of vehicles is
/// plugged in (scales charger ratings) and what fraction is on the road
/// (scales the travel draw).
struct FleetProfiles {
    std::vector<double> r_charge;
    std::vector<double> r_discharge;
};

struct FleetModel {
    std::vector<EvSpec> evs;
    FleetProfiles profiles;

    void validate(int horizon) const;
};

/// Stored energy after one hour. Travel drains e_prev by p_travel*r_d/eta_d;
/// charging adds eta_c*p_charge.
double energy_step(double e_prev, double p_charge, double p_travel, double r_d, double eta_c,
                   double eta_d);

/// Residual of the periodic energy balance for one charging point: for each
/// hour t, |E_t - step(E_{t-1}, ...)| where hour 0 wraps to the last hour.
/// All inputs are full-horizon series; returns the per-hour residuals' max.
double cyclic_closure(const std::vector<double>& trajectory, const std::vector<double>& p_charge,
                      const EvSpec& ev, const FleetProfiles& profiles);

/// The stored-energy trajectory induced by a charging schedule, if a periodic
/// one inside [e_min, e_max] exists. e_out[t] is the level at the end of hour
/// t; e_out[T-1] feeds back into hour 0. Returns false when no feasible start
/// exists (steps must sum to zero and fit the band).
bool cyclic_trajectory(const EvSpec& ev, const FleetProfiles& profiles,
                       const std::vector<double>& p_charge, std::vector<double>& e_out);

/// Every assignment of at most one active level per hour for one charging
/// point. Each pattern has length `horizon`; entry -1 means idle, otherwise an
/// index into ev.levels. Throws EnumerationLimitError if the count would
/// exceed max_patterns.
std::vector<std::vector<int>> enumerate_level_patterns(const EvSpec& ev, int horizon,
                                                       std::size_t max_patterns = 1u << 20);

} // namespace evopf
