#include "evopf/fleet.hpp"

#include <algorithm>
#include <cmath>

namespace evopf {

void FleetModel::validate(int horizon) const {
    if (static_cast<int>(profiles.r_charge.size()) != horizon ||
        static_cast<int>(profiles.r_discharge.size()) != horizon) {
        throw ValidationError("fleet profile length must equal horizon");
    }
    for (int t = 0; t < horizon; ++t) {
        const double rc = profiles.r_charge[t];
        const double rd = profiles.r_discharge[t];
        if (rc < 0.0 || rc > 1.0) throw ValidationError("charge ratio must lie in [0,1]");
        if (rd < 0.0 || rd > 1.0) throw ValidationError("travel ratio must lie in [0,1]");
        if (rc + rd > 1.0 + 1e-12) {
            throw ValidationError("charge and travel ratios at hour " + std::to_string(t) +
                             " sum to more than 1");
        }
    }
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const EvSpec& ev = evs[i];
        const std::string tag = "ev[" + std::to_string(i) + "]";
        if (!(ev.e_min >= 0.0 && ev.e_min < ev.e_max)) {
            throw ValidationError(tag + ": need 0 <= e_min < e_max");
        }
        if (!(ev.eta_c > 0.0 && ev.eta_c <= 1.0)) throw ValidationError(tag + ": eta_c out of (0,1]");
        if (!(ev.eta_d > 0.0 && ev.eta_d <= 1.0)) throw ValidationError(tag + ": eta_d out of (0,1]");
        if (ev.levels.empty()) throw ValidationError(tag + ": needs at least one charger level");
        for (std::size_t j = 0; j < ev.levels.size(); ++j) {
            const ChargerLevel& lvl = ev.levels[j];
            if (lvl.id.empty()) throw ValidationError(tag + ": level id must be nonempty");
            if (!(lvl.p_max > 0.0)) throw ValidationError(tag + ": level p_max must be positive");
            if (lvl.deg_weight < 0.0) throw ValidationError(tag + ": level weight must be nonnegative");
            if (j > 0 && !(ev.levels[j].p_max < ev.levels[j - 1].p_max)) {
                throw ValidationError(tag + ": levels must be strictly ordered by p_max, descending");
            }
        }
        if (static_cast<int>(ev.p_travel.size()) != horizon) {
            throw ValidationError(tag + ": travel profile length must equal horizon");
        }
        for (double p : ev.p_travel) {
            if (p < 0.0) throw ValidationError(tag + ": travel draw must be nonnegative");
        }
    }
}

double energy_step(double e_prev, double p_charge, double p_travel, double r_d, double eta_c,
                   double eta_d) {
    return e_prev - (p_travel * r_d / eta_d - eta_c * p_charge);
}

double cyclic_closure(const std::vector<double>& trajectory, const std::vector<double>& p_charge,
                      const EvSpec& ev, const FleetProfiles& profiles) {
    const int horizon = static_cast<int>(trajectory.size());
    if (static_cast<int>(p_charge.size()) != horizon ||
        static_cast<int>(ev.p_travel.size()) != horizon ||
        static_cast<int>(profiles.r_discharge.size()) != horizon) {
        throw InputError("trajectory, schedule and profile lengths must agree");
    }
    double worst = 0.0;
    for (int t = 0; t < horizon; ++t) {
        const int prev = (t == 0) ? horizon - 1 : t - 1;
        const double predicted = energy_step(trajectory[prev], p_charge[t], ev.p_travel[t],
                                             profiles.r_discharge[t], ev.eta_c, ev.eta_d);
        worst = std::max(worst, std::abs(trajectory[t] - predicted));
    }
    return worst;
}

bool cyclic_trajectory(const EvSpec& ev, const FleetProfiles& profiles,
                       const std::vector<double>& p_charge, std::vector<double>& e_out) {
    const int horizon = static_cast<int>(p_charge.size());
    if (static_cast<int>(ev.p_travel.size()) != horizon ||
        static_cast<int>(profiles.r_discharge.size()) != horizon) {
        throw InputError("schedule and profile lengths must agree");
    }
    // Steps are fixed by the schedule; only the start level is free. A periodic
    // trajectory exists iff the steps sum to zero and some start keeps the
    // running level inside the band.
    std::vector<double> step(horizon);
    double total = 0.0;
    for (int t = 0; t < horizon; ++t) {
        step[t] = energy_step(0.0, p_charge[t], ev.p_travel[t], profiles.r_discharge[t], ev.eta_c,
                              ev.eta_d);
        total += step[t];
    }
    if (std::abs(total) > 1e-9 * (1.0 + std::abs(total))) return false;

    double running = 0.0, lo = 0.0, hi = 0.0;
    for (int t = 0; t < horizon; ++t) {
        running += step[t];
        lo = std::min(lo, running);
        hi = std::max(hi, running);
    }
    // need e_start + lo >= e_min and e_start + hi <= e_max
    if (ev.e_min - lo > ev.e_max - hi + 1e-12) return false;
    const double e_start = ev.e_min - lo;

    e_out.resize(horizon);
    running = e_start;
    for (int t = 0; t < horizon; ++t) {
        running += step[t];
        e_out[t] = running;
    }
    return true;
}

std::vector<std::vector<int>> enumerate_level_patterns(const EvSpec& ev, int horizon,
                                                       std::size_t max_patterns) {
    if (horizon < 0) throw InputError("horizon must be nonnegative");
    const int radix = static_cast<int>(ev.levels.size()) + 1; // idle plus one per level
    double count = 1.0;
    for (int t = 0; t < horizon; ++t) {
        count *= radix;
        if (count > static_cast<double>(max_patterns)) {
            throw EnumerationLimitError("level pattern count exceeds limit of " +
                                        std::to_string(max_patterns));
        }
    }

    std::vector<std::vector<int>> patterns;
    patterns.reserve(static_cast<std::size_t>(count));
    std::vector<int> current(horizon, -1);
    while (true) {
        patterns.push_back(current);
        int pos = horizon;
        while (pos > 0) {
            --pos;
            if (current[pos] + 1 < radix - 1) {
                ++current[pos];
                break;
            }
            current[pos] = -1;
            if (pos == 0) return patterns;
        }
        if (horizon == 0) return patterns;
    }
}

} // namespace evopf
