#pragma once

#include <string>
#include <vector>

#include "evopf/errors.hpp"

namespace evopf {

using BusId = int;

struct Bus {
    BusId id = 0;         // external identifier (1-based in the bundled cases)
    double vmin = 0.90;   // p.u.
    double vmax = 1.10;   // p.u.
    bool is_slack = false;

    bool operator==(const Bus&) const = default;
};

struct Branch {
    BusId from = 0;
    BusId to = 0;
    double r = 0.0;      // series resistance, p.u.
    double x = 0.0;      // series reactance, p.u.
    double s_max = 0.0;  // apparent power limit, p.u.

    bool operator==(const Branch&) const = default;
};

struct Load {
    BusId bus = 0;
    std::vector<double> p_profile;  // p.u. per hour, length = horizon
    std::vector<double> q_profile;

    bool operator==(const Load&) const = default;
};

struct SolarUnit {
    BusId bus = 0;
    std::vector<double> availability;  // p.u. per hour, length = horizon

    bool operator==(const SolarUnit&) const = default;
};

struct NetworkCase {
    std::string name;
    double s_base_mva = 100.0;
    double v_base_kv = 12.66;
    int horizon = 24;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Load> loads;
    std::vector<SolarUnit> solar;

    bool operator==(const NetworkCase&) const = default;

    int bus_index(BusId id) const;          // dense index into buses, InputError if unknown
    BusId slack_bus() const;                // InputError if not exactly one
    void validate() const;                  // cross-reference and invariant checks
};

/// Off-diagonal bus-admittance elements per branch plus negated-row-sum
/// diagonals. Convention: Y_ij = -y_series for branch (i,j), so
/// G_off = -r/(r^2+x^2) and B_off = +x/(r^2+x^2). Shunts are zero, hence
/// G_diag(i) = -sum_j G_off(i,j) and likewise for B.
struct AdmittanceView {
    std::vector<double> g_off;   // per branch
    std::vector<double> b_off;
    std::vector<double> g_diag;  // per bus (dense index)
    std::vector<double> b_diag;
    std::vector<std::vector<int>> adjacent_branches;  // per bus, branch indices sorted

    double g_diag_plus_row(int bus_index) const;  // G_ii + sum_j G_ij (zero for shuntless lines)
    double b_diag_plus_row(int bus_index) const;
};

AdmittanceView build_admittance(const std::vector<Branch>& branches, int n_buses,
                                const std::vector<BusId>& bus_ids);
AdmittanceView build_admittance(const NetworkCase& net);

/// True iff the graph is a tree: |branches| = |buses| - 1 and connected.
/// Throws DisconnectedError when the graph is not connected (a distinct
/// condition from a connected but cyclic graph, which returns false).
bool check_radial(const NetworkCase& net);

/// Sorted external ids of the buses adjacent to `bus`.
std::vector<BusId> neighbors(const NetworkCase& net, BusId bus);

/// Tree structure rooted at the slack bus, used by phasor recovery and the
/// power-flow sweeps. parent[i] = -1 marks the root.
struct RootedTree {
    std::vector<int> parent;         // dense bus index of parent
    std::vector<int> parent_branch;  // branch index toward parent, -1 at root
    std::vector<int> bfs_order;      // root first
};

RootedTree root_at_slack(const NetworkCase& net);

} // namespace evopf
