#pragma once

#include <map>
#include <string>
#include <vector>

#include "evopf/errors.hpp"
#include "evopf/fleet.hpp"
#include "evopf/network.hpp"

namespace evopf {

/// Hourly series shared by every scenario: tariff, load/solar shapes and the
/// fleet availability split. All vectors have one entry per hour.
struct ProfileSet {
    std::vector<double> tou_price;    ///< energy price, $ per p.u.-hour
    std::vector<double> demand_shape; ///< multiplier on base loads, >= 0
    std::vector<double> solar_shape;  ///< multiplier on solar peak, >= 0
    std::vector<double> r_charge;     ///< fraction of the fleet plugged in
    std::vector<double> r_discharge;  ///< fraction of the fleet traveling
    std::vector<double> p_travel;     ///< driving draw per traveling vehicle, p.u.

    int horizon() const { return static_cast<int>(tou_price.size()); }
    /// Lengths equal, shapes nonnegative, ratios in [0,1] with sum <= 1.
    void validate(int expected_horizon) const;
};

/// Fleet definition as stored on disk: the charger menu plus the physical
/// parameters of one vehicle. Scenario assembly aggregates vehicles into
/// per-bus charging points and selects each point's level menu.
struct FleetSpec {
    std::vector<ChargerLevel> levels; ///< full menu, largest p_max first
    std::vector<int> point_buses;     ///< buses hosting charging points; empty = all load buses
    double evs_per_point = 10.0;
    double e_min = 0.0; ///< per vehicle, p.u.-hours
    double e_max = 0.0;
    double eta_c = 1.0;
    double eta_d = 1.0;

    void validate() const;
    const ChargerLevel& level_by_id(const std::string& id) const;
};

/// One scenario variant: which charger levels each point offers and how the
/// shared sizing knobs are set.
struct ScenarioConfig {
    std::string name = "base";
    /// Level assignment pattern: a level id ("fast", "level2", ...) applied to
    /// every point, "combined" (alternate fast/level2 by bus index, bus 18
    /// fast), or an explicit "bus=level,...,*=level" list.
    std::string charger_mix = "combined";
    double solar_penetration = 0.10; ///< available solar energy / load energy
    double degradation_cost = 0.25;  ///< quadratic wear coefficient, pre-rescale
    double ev_penetration = 0.5;     ///< fraction of vehicles participating
    double evs_per_point = 0.0;      ///< override; 0 keeps the fleet file value
    bool allow_export = false;       ///< permit negative grid injection
    int focus_bus = 18;              ///< bus highlighted in reports

    void validate() const;
};

/// Everything a finished scenario run reports; plain data so writers stay
/// independent of the analysis types that produced it.
struct ScenarioReport {
    std::string scenario_name;
    int horizon = 0;
    std::vector<int> bus_ids;
    std::vector<std::vector<double>> voltage; ///< [bus][hour] magnitudes, p.u.
    std::vector<int> point_buses;
    std::vector<std::vector<double>> charging;  ///< [point][hour] total draw, p.u.
    std::vector<std::vector<std::string>> level_choice; ///< [point][hour] level id or "-"
    std::vector<double> grid_p; ///< injection per hour, p.u.
    std::vector<double> grid_q;
    std::vector<int> hours_below; ///< per bus, count of sub-threshold hours
    double voltage_threshold = 0.95;
    double total_cost = 0.0;
    double energy_cost = 0.0;
    double degradation_cost = 0.0;
    double max_exactness_residual = 0.0;
    double mip_gap = 0.0;
    long nodes = 0;
    std::string solve_status;
    int focus_bus = 18;
};

/// Reads a network case from the named-section text format documented in
/// docs/formats.md. Cross-references and value ranges are checked; a cyclic
/// topology is reported through `radial` (the optimizer refuses later) while
/// a disconnected one throws.
NetworkCase load_case(const std::string& path, bool* radial = nullptr);

/// Writes the case in the same format; load_case(write_case(c)) reproduces
/// every field bit-exactly.
void write_case(const NetworkCase& net, const std::string& path);

/// Reads the hourly profile table (CSV with a fixed header) and validates it
/// against the expected horizon.
ProfileSet load_profiles(const std::string& path, int horizon);

/// Reads the fleet section file.
FleetSpec load_fleet(const std::string& path);

/// Emits the report's CSV tables into dir (created if missing): voltage.csv,
/// voltage_h<focus>.csv, charging.csv, levels.csv, grid_injection.csv,
/// costs.csv, violations.csv. Returns the list of files written (relative to
/// dir). Identical reports produce identical bytes.
std::vector<std::string> write_report(const ScenarioReport& report, const std::string& dir);

/// SVG line chart of one or more hourly series; pure string assembly so chart
/// output needs no external tooling. Returned markup is deterministic.
std::string svg_line_chart(const std::string& title, const std::vector<std::string>& labels,
                           const std::vector<std::vector<double>>& series);

/// Serialized solved scenario: config echo, objective split and the raw
/// solution vector keyed by the variable layout digest.
struct SolutionFile {
    std::string case_digest;    ///< name + bus/branch counts + horizon
    ScenarioConfig config;
    std::string status;
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    long nodes = 0;
    std::vector<double> x;
};

void save_solution(const SolutionFile& sol, const std::string& path);
SolutionFile load_solution(const std::string& path);

} // namespace evopf
