#pragma once

#include <string>
#include <vector>

#include "evopf/analysis.hpp"
#include "evopf/branch_bound.hpp"
#include "evopf/io.hpp"

namespace evopf {

/// Scenario inputs after assembly: the case with shaped loads and sized solar
/// baked in, the aggregated fleet, and the config echo.
struct Scenario {
    NetworkCase net;
    ProfileSet profiles;
    FleetModel fleet;
    ScenarioConfig config;
};

/// Applies a scenario config to raw inputs: loads scaled by the demand shape,
/// solar peaks sized so available energy over the horizon equals the
/// penetration times load energy (split equally over the case's solar buses),
/// vehicles aggregated per point (count scaled by participation), and each
/// point's level menu chosen by the charger-mix pattern.
Scenario assemble_scenario(const NetworkCase& base_case, const ProfileSet& profiles,
                           const FleetSpec& fleet_spec, const ScenarioConfig& config);

enum class StudyKind { ChargingLevels, SolarPenetration, DegradationCost, Custom };

struct StudySpec {
    StudyKind kind = StudyKind::Custom;
    std::vector<ScenarioConfig> variants;

    /// The three named studies over a shared base config.
    static StudySpec charging_levels(const ScenarioConfig& base);
    static StudySpec solar_penetration(const ScenarioConfig& base);
    static StudySpec degradation_cost(const ScenarioConfig& base);
    static StudySpec named(const std::string& kind_name, const ScenarioConfig& base);
};

struct ComparisonRow {
    std::string variant;
    std::string status;
    double total_cost = 0.0;
    double energy_cost = 0.0;
    double degradation_cost = 0.0;
    double peak_injection = 0.0;
    std::vector<int> hours_below; ///< per bus, case bus order
    int focus_hours_below = 0;
    double gap = 0.0;
    long nodes = 0;
};

struct ComparisonTable {
    std::vector<int> bus_ids;
    std::vector<ComparisonRow> rows;
    std::string to_csv() const; ///< deterministic bytes
};

struct VariantResult {
    ScenarioConfig config;
    bool solved = false;
    std::string error; ///< set when this variant failed; others still run
    /// Failure class: "", "infeasible", "limit", "input", "solver", "internal".
    std::string error_kind;
    MipOutcome mip;
    LiftedSolution solution;
    QualityReport quality;
    ScenarioReport report;
};

struct StudySettings {
    BnBSettings bnb;
    SolverSettings solver;
    /// Preset name; "desk" leaves the fleet as configured, "desk-reduced"
    /// restricts charging points to a fixed 8-bus subset. Empty skips preset
    /// application (the caller already applied one).
    std::string preset = "desk";
    /// Emit per-variant CSV/SVG files under out_dir; empty skips writing.
    std::string out_dir;
};

/// Applies a preset's documented defaults onto settings and config.
void apply_preset(const std::string& preset, BnBSettings& bnb, ScenarioConfig& config,
                  FleetSpec& fleet_spec);

/// Runs every variant through build -> search -> analyze -> report. Failures
/// are isolated per variant. Returns the comparison table; per-variant
/// details go to `results` when non-null.
ComparisonTable run_study(const StudySpec& spec, const NetworkCase& base_case,
                          const ProfileSet& profiles, const FleetSpec& fleet_spec,
                          const StudySettings& settings,
                          std::vector<VariantResult>* results = nullptr);

} // namespace evopf
