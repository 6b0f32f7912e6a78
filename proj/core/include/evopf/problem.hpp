#pragma once

#include <string>
#include <vector>

#include "evopf/conic.hpp"
#include "evopf/fleet.hpp"
#include "evopf/io.hpp"
#include "evopf/network.hpp"

namespace evopf {

/// Quadratic wear coefficients are entered in $ per (100 kW)^2-hour; columns
/// are in p.u. of a 100 MVA base, so the objective multiplies them by
/// (1e5 kW / 100 kW)^2 = 1e6 to convert.
inline constexpr double kDegradationScale = 1e6;

/// Wear epigraph columns store (kWearScale * p)^2 rather than p^2, with the
/// cost coefficient divided by kWearScale^2 to compensate; the objective term
/// is unchanged while the cost vector's dynamic range stays within the
/// interior-point method's comfortable band.
inline constexpr double kWearScale = 10.0;

/// Dense column layout of a built program. All accessors are pure index
/// arithmetic over the block offsets; the same layout is the contract for
/// reading solutions back.
class VariableIndex {
public:
    int horizon = 0;
    int n_buses = 0;
    int n_lines = 0;
    int n_solar = 0;
    int n_points = 0;
    std::vector<int> levels_per_point;
    std::vector<int> point_bus_index; ///< dense bus index hosting each point

    // grid interface
    int p_grid(int t) const { return off_grid_ + t; }
    int q_grid(int t) const { return off_grid_ + horizon + t; }
    // squared voltage magnitudes
    int c_bus(int i, int t) const { return off_voltage_ + i * horizon + t; }
    // per-line lifted products, stored once per undirected line
    int c_line(int l, int t) const { return off_cline_ + l * horizon + t; }
    int s_line(int l, int t) const { return off_sline_ + l * horizon + t; }
    // directed flows; fwd leaves the branch's from-bus, rev leaves its to-bus
    int p_flow(int l, int t) const { return off_flow_ + (0 * n_lines + l) * horizon + t; }
    int q_flow(int l, int t) const { return off_flow_ + (1 * n_lines + l) * horizon + t; }
    int p_flow_rev(int l, int t) const { return off_flow_ + (2 * n_lines + l) * horizon + t; }
    int q_flow_rev(int l, int t) const { return off_flow_ + (3 * n_lines + l) * horizon + t; }
    // per line-hour auxiliary unit: 4 product-cone columns, 3 limit-cone
    // columns (head pinned to the rating), 8 envelope slacks
    int line_aux(int l, int t) const { return off_line_aux_ + (l * horizon + t) * 15; }
    int p_solar(int s, int t) const { return off_solar_ + s * horizon + t; }
    // per-point fleet block
    int energy(int e, int t) const { return point_off_[e] + t; }
    int p_charge(int e, int t) const { return point_off_[e] + horizon + t; }
    /// 7-column unit per (point, level, hour): charging power, level
    /// indicator, cap slack, wear epigraph value, 3 epigraph cone columns.
    int level_unit(int e, int j, int t) const {
        return point_off_[e] + 2 * horizon + (j * horizon + t) * 7;
    }
    int p_charge_level(int e, int j, int t) const { return level_unit(e, j, t); }
    int indicator(int e, int j, int t) const { return level_unit(e, j, t) + 1; }
    int wear(int e, int j, int t) const { return level_unit(e, j, t) + 3; }
    int excl_slack(int e, int t) const {
        return point_off_[e] + 2 * horizon + levels_per_point[e] * horizon * 7 + t;
    }

    /// SOS1 group id for one (point, hour); groups are numbered point-major.
    int group_id(int e, int t) const { return group_off_[e] + t; }
    int num_groups() const { return group_off_.empty() ? 0 : group_off_.back(); }
    void group_location(int gid, int& e, int& t) const;

    int num_cols() const { return n_cols_; }

    friend struct Builder;

private:
    int off_grid_ = 0, off_voltage_ = 0, off_cline_ = 0, off_sline_ = 0;
    int off_flow_ = 0, off_line_aux_ = 0, off_solar_ = 0;
    std::vector<int> point_off_;
    std::vector<int> group_off_; // per point: first group id; trailing total
    int n_cols_ = 0;
};

struct BuildOptions {
    /// Strip integer marks and treat indicators as continuous in [0,1].
    bool relax_binaries = false;
    /// Full level assignment per [point][hour] (-1 = idle); when set, marks
    /// are stripped and equality rows pinning every indicator are appended.
    /// Mutually exclusive with relax_binaries.
    std::vector<std::vector<int>> fix_levels;
    /// Keep the apparent-power envelope cones on every line-hour.
    bool line_limits = true;
};

struct BuiltProblem {
    ConicProgram program;
    VariableIndex index;
};

/// Assembles the scheduling program: grid energy cost plus quadratic wear,
/// lifted branch-flow equalities, product cones, line-rating envelopes, nodal
/// balance, solar bounds, and the per-point charging block with cyclic energy
/// coupling. Deterministic: identical inputs give identical programs.
BuiltProblem build(const NetworkCase& net, const ProfileSet& profiles, const FleetModel& fleet,
                   const ScenarioConfig& scenario, const BuildOptions& options = {});

/// Appends the three rows encoding u >= (p_scale*p)^2 through the cone
/// ||(2*p_scale*p, u-1)|| <= u+1. The caller allocates three consecutive
/// columns starting at a0_col; the cone is declared over [a0, a0+3).
void epigraph_quadratic(ConicProgram& prog, int p_col, int u_col, int a0_col,
                        double p_scale = 1.0);

/// Appends equality rows deciding one exclusivity group: indicator j pinned
/// to 1 (or all to 0 when level < 0), the rest to 0. The same call sequence
/// is used for BuildOptions::fix_levels and for search-tree fixings, so both
/// produce bit-identical rows.
void append_group_fix(ConicProgram& prog, const VariableIndex& idx, int e, int t, int level);

struct ProgramCensus {
    int cols = 0;
    int rows = 0;
    int cones_4d = 0;
    int cones_3d = 0;
    int integer_cols = 0;
    int sos1_groups = 0;
    int col_grid = 0, col_voltage = 0, col_line = 0, col_flow = 0;
    int col_line_aux = 0, col_solar = 0, col_fleet = 0;
    int row_flow_def = 0, row_cone_def = 0, row_line_limit = 0;
    int row_balance = 0, row_fleet = 0, row_fix = 0;

    /// Stable "key: value" lines for golden-file comparison.
    std::string to_text() const;
};

/// Counts the built program's blocks by walking the actual rows, columns and
/// cones (not the closed-form formulas, which tests derive independently).
ProgramCensus census(const BuiltProblem& built);

} // namespace evopf
