#pragma once

#include <string>
#include <vector>

#include "evopf/fleet.hpp"
#include "evopf/io.hpp"
#include "evopf/network.hpp"
#include "evopf/problem.hpp"

namespace evopf {

/// A solved program's column vector together with the layout needed to read
/// it and the objective split.
struct LiftedSolution {
    std::vector<double> x;
    VariableIndex index;
    double objective = 0.0;
    double energy_cost = 0.0;
    double degradation_cost = 0.0;

    double at(int col) const { return x[static_cast<std::size_t>(col)]; }
};

/// Computes the objective split from the column vector: the tariff part and
/// the wear part, matching the built objective term by term.
void split_objective(const ConicProgram& program, LiftedSolution& sol,
                     const ProfileSet& profiles);

/// Rectangular voltage phasors per bus-hour.
struct RecoveredPhasors {
    int horizon = 0;
    std::vector<double> e; ///< real part, bus-major [i * horizon + t]
    std::vector<double> f; ///< imaginary part

    double magnitude(int i, int t) const;
    double angle(int i, int t) const;
};

/// Tightness gap |c_ij^2 + s_ij^2 - c_ii * c_jj| per line-hour, line-major.
/// Zero means the product cone is tight and a physical voltage profile
/// exists.
std::vector<double> exactness_residual(const LiftedSolution& sol, const NetworkCase& net);

/// Rebuilds voltage phasors from the lifted solution by walking the tree from
/// the slack bus: |V_j| = sqrt(c_jj), theta_j = theta_i - atan2(s_ij, c_ij)
/// along each edge (orientation-corrected). Refuses with
/// RecoveryRefusedError when the worst exactness residual exceeds the
/// threshold, since the lifted point then encodes no single voltage profile.
RecoveredPhasors recover_phasors(const LiftedSolution& sol, const NetworkCase& net,
                                 double refusal_threshold = 1e-5);

struct AcResidualReport {
    double max_flow = 0.0;    ///< worst gap in the four flow equations, any line-hour
    double max_balance = 0.0; ///< worst nodal real/reactive imbalance, any bus-hour
};

/// Plugs the recovered phasors into the AC flow and nodal-balance equations
/// directly (no lifted variables) and reports the worst residuals against the
/// solution's injections.
AcResidualReport validate_ac(const RecoveredPhasors& phasors, const LiftedSolution& sol,
                             const NetworkCase& net);

struct QualityReport {
    int horizon = 0;
    std::vector<int> bus_ids;
    std::vector<std::vector<double>> voltage; ///< [bus][hour] magnitude
    std::vector<std::pair<int, int>> violations; ///< (bus id, hour) below threshold
    std::vector<int> hours_below;                ///< per bus, aligned with bus_ids
    double threshold = 0.95;
    double max_exactness = 0.0;
    double max_balance = 0.0;
    std::vector<double> grid_p; ///< injection trajectory
    std::vector<double> grid_q;
    double total_cost = 0.0;
    double energy_cost = 0.0;
    double degradation_cost = 0.0;
};

QualityReport quality_metrics(const LiftedSolution& sol, const RecoveredPhasors& phasors,
                              const NetworkCase& net, double threshold = 0.95);

/// Worst-case residuals of every structural constraint class, evaluated
/// directly on the solution vector; the post-solve gate for reported
/// incumbents.
struct ConstraintCheck {
    double level_cap = 0.0;      ///< charging above its indicator-gated rating
    double exclusivity = 0.0;    ///< worst indicator distance from {0,1}, and group sums above 1
    double level_sum = 0.0;      ///< per-level powers vs. total charging power
    double energy_bounds = 0.0;  ///< trajectory outside [e_min, e_max]
    double cyclic = 0.0;         ///< periodic energy-balance residual
    double charge_sign = 0.0;    ///< negative charging power
    double line_cone = 0.0;      ///< apparent-power envelope violation
    double worst() const;
};

ConstraintCheck check_constraints(const LiftedSolution& sol, const NetworkCase& net,
                                  const FleetModel& fleet, double integrality_tol = 1e-5);

} // namespace evopf
