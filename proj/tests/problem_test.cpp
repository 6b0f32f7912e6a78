#include "doctest.h"

#include <cmath>
#include <limits>

#include "evopf/problem.hpp"
#include "evopf/solver.hpp"
#include "support/acpf_oracle.hpp"

using namespace evopf;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

NetworkCase two_bus_net(int horizon, double p_load = 0.1, double q_load = 0.05) {
    NetworkCase net;
    net.name = "twobus";
    net.horizon = horizon;
    net.buses = {{1, 0.9, 1.1, true}, {2, 0.9, 1.1, false}};
    net.branches = {{1, 2, 0.05, 0.05, 1.5}};
    net.loads.push_back({2, std::vector<double>(static_cast<std::size_t>(horizon), p_load),
                         std::vector<double>(static_cast<std::size_t>(horizon), q_load)});
    return net;
}

// price defaults to a realistic tariff magnitude ($ per p.u.-hour on a
// 100 MVA base); token prices would stretch the objective's dynamic range
// against the wear coefficients far beyond anything the data model produces
ProfileSet flat_profiles(int horizon, double price = 1.0e4) {
    ProfileSet p;
    const std::size_t T = static_cast<std::size_t>(horizon);
    p.tou_price.assign(T, price);
    p.demand_shape.assign(T, 1.0);
    p.solar_shape.assign(T, 0.0);
    p.r_charge.assign(T, 0.6);
    p.r_discharge.assign(T, 0.3);
    p.p_travel.assign(T, 0.0);
    return p;
}

FleetModel empty_fleet(int horizon) {
    FleetModel fleet;
    fleet.profiles.r_charge.assign(static_cast<std::size_t>(horizon), 0.6);
    fleet.profiles.r_discharge.assign(static_cast<std::size_t>(horizon), 0.3);
    return fleet;
}

FleetModel one_point_fleet(int horizon, int n_levels, double travel = 0.0) {
    FleetModel fleet = empty_fleet(horizon);
    EvSpec ev;
    ev.bus = 2;
    ev.e_min = 0.01;
    ev.e_max = 0.08;
    ev.eta_c = 0.9;
    ev.eta_d = 0.9;
    for (int j = 0; j < n_levels; ++j) {
        ev.levels.push_back({"L" + std::to_string(j), 0.02 / (j + 1), 1.0 + 0.2 * j});
    }
    ev.p_travel.assign(static_cast<std::size_t>(horizon), travel);
    fleet.evs.push_back(std::move(ev));
    return fleet;
}

ScenarioConfig base_config() {
    ScenarioConfig cfg;
    cfg.degradation_cost = 0.25;
    return cfg;
}

} // namespace

TEST_CASE("two-bus single-hour program has one 4-dim and one 3-dim cone") {
    BuiltProblem built =
        build(two_bus_net(1), flat_profiles(1), empty_fleet(1), base_config());
    ProgramCensus c = census(built);

    CHECK(c.cones_4d == 1);
    CHECK(c.cones_3d == 1);
    CHECK(c.integer_cols == 0);
    CHECK(c.sos1_groups == 0);

    CHECK(c.col_grid == 2);
    CHECK(c.col_voltage == 2);
    CHECK(c.col_line == 2);
    CHECK(c.col_flow == 4);
    CHECK(c.col_line_aux == 15);
    CHECK(c.col_solar == 0);
    CHECK(c.col_fleet == 0);
    CHECK(c.cols == 25);

    CHECK(c.row_flow_def == 4);
    CHECK(c.row_cone_def == 4);
    CHECK(c.row_line_limit == 8);
    CHECK(c.row_balance == 4);
    CHECK(c.row_fleet == 0);
    CHECK(c.row_fix == 0);
    CHECK(c.rows == 20);
}

TEST_CASE("census matches an independently counted formula") {
    // 4-bus chain with one unlimited line, 2 solar units, 2 charging points
    NetworkCase net;
    net.name = "chain4";
    net.horizon = 3;
    for (int i = 1; i <= 4; ++i) net.buses.push_back({i, 0.9, 1.1, i == 1});
    net.branches = {{1, 2, 0.05, 0.05, 1.5}, {2, 3, 0.08, 0.04, kInf}, {3, 4, 0.06, 0.03, 0.8}};
    net.loads.push_back({3, {0.1, 0.2, 0.1}, {0.05, 0.1, 0.05}});
    net.solar.push_back({2, {0.0, 0.3, 0.1}});
    net.solar.push_back({4, {0.0, 0.2, 0.05}});

    FleetModel fleet = one_point_fleet(3, 2);
    EvSpec second = fleet.evs[0];
    second.bus = 4;
    second.levels.pop_back();
    fleet.evs.push_back(second);

    BuiltProblem built = build(net, flat_profiles(3), fleet, base_config());
    ProgramCensus c = census(built);

    const int T = 3, n = 4, L = 3, L_lim = 2, S = 2, E = 2;
    const int sumJ = 2 + 1;
    CHECK(c.col_grid == 2 * T);
    CHECK(c.col_voltage == n * T);
    CHECK(c.col_line == 2 * L * T);
    CHECK(c.col_flow == 4 * L * T);
    CHECK(c.col_line_aux == 15 * L * T);
    CHECK(c.col_solar == S * T);
    CHECK(c.col_fleet == 3 * E * T + 7 * sumJ * T);
    CHECK(c.cols == c.col_grid + c.col_voltage + c.col_line + c.col_flow + c.col_line_aux +
                        c.col_solar + c.col_fleet);

    CHECK(c.row_flow_def == 4 * L * T);
    CHECK(c.row_cone_def == 4 * L * T);
    CHECK(c.row_line_limit == 8 * L_lim * T);
    CHECK(c.row_balance == 2 * n * T);
    CHECK(c.row_fleet == 3 * E * T + 4 * sumJ * T);
    CHECK(c.row_fix == 0);
    CHECK(c.rows == c.row_flow_def + c.row_cone_def + c.row_line_limit + c.row_balance +
                        c.row_fleet);

    CHECK(c.cones_4d == L * T);
    CHECK(c.cones_3d == L_lim * T + sumJ * T);
    CHECK(c.integer_cols == sumJ * T);
    CHECK(c.sos1_groups == E * T);

    // unlimited line: rating unit fully pinned to zero, limited line pinned
    // to its rating
    const ConicProgram& p = built.program;
    const VariableIndex& ix = built.index;
    const int m0_unlimited = ix.line_aux(1, 0) + 4;
    CHECK(p.lower[static_cast<std::size_t>(m0_unlimited)] == 0.0);
    CHECK(p.upper[static_cast<std::size_t>(m0_unlimited)] == 0.0);
    const int m0_limited = ix.line_aux(0, 0) + 4;
    CHECK(p.lower[static_cast<std::size_t>(m0_limited)] == 1.5);
    CHECK(p.upper[static_cast<std::size_t>(m0_limited)] == 1.5);
}

TEST_CASE("doubling the horizon doubles every time-indexed block") {
    auto snapshot = [](int T) {
        NetworkCase net = two_bus_net(T);
        net.solar.push_back({2, std::vector<double>(static_cast<std::size_t>(T), 0.1)});
        return census(build(net, flat_profiles(T), one_point_fleet(T, 2), base_config()));
    };
    ProgramCensus a = snapshot(2);
    ProgramCensus b = snapshot(4);

    CHECK(b.cols == 2 * a.cols);
    CHECK(b.rows == 2 * a.rows);
    CHECK(b.cones_4d == 2 * a.cones_4d);
    CHECK(b.cones_3d == 2 * a.cones_3d);
    CHECK(b.integer_cols == 2 * a.integer_cols);
    CHECK(b.sos1_groups == 2 * a.sos1_groups);
    CHECK(b.col_fleet == 2 * a.col_fleet);
    CHECK(b.row_fleet == 2 * a.row_fleet);
}

TEST_CASE("slack anchor, voltage boxes and grid bounds") {
    NetworkCase net = two_bus_net(2);
    net.buses[1].vmin = 0.92;
    net.buses[1].vmax = 1.06;
    BuiltProblem built = build(net, flat_profiles(2), empty_fleet(2), base_config());
    const ConicProgram& p = built.program;
    const VariableIndex& ix = built.index;

    for (int t = 0; t < 2; ++t) {
        CHECK(p.lower[static_cast<std::size_t>(ix.c_bus(0, t))] == 1.0);
        CHECK(p.upper[static_cast<std::size_t>(ix.c_bus(0, t))] == 1.0);
        CHECK(p.lower[static_cast<std::size_t>(ix.c_bus(1, t))] == doctest::Approx(0.92 * 0.92));
        CHECK(p.upper[static_cast<std::size_t>(ix.c_bus(1, t))] == doctest::Approx(1.06 * 1.06));
        CHECK(p.lower[static_cast<std::size_t>(ix.p_grid(t))] == 0.0);
        CHECK(p.upper[static_cast<std::size_t>(ix.p_grid(t))] == kInf);
        CHECK(p.lower[static_cast<std::size_t>(ix.q_grid(t))] == -kInf);
    }

    ScenarioConfig exporting = base_config();
    exporting.allow_export = true;
    BuiltProblem open = build(net, flat_profiles(2), empty_fleet(2), exporting);
    CHECK(open.program.lower[static_cast<std::size_t>(open.index.p_grid(0))] == -kInf);
}

TEST_CASE("wear cost lands on the epigraph column with the fixed rescale") {
    FleetModel fleet = one_point_fleet(1, 2);
    fleet.evs[0].levels[0].deg_weight = 0.8;
    ScenarioConfig cfg = base_config(); // degradation_cost 0.25
    BuiltProblem built = build(two_bus_net(1), flat_profiles(1), fleet, cfg);
    const VariableIndex& ix = built.index;

    const double unit = kDegradationScale / (kWearScale * kWearScale);
    CHECK(built.program.cost[static_cast<std::size_t>(ix.wear(0, 0, 0))] ==
          doctest::Approx(0.25 * unit * 0.8));
    CHECK(built.program.cost[static_cast<std::size_t>(ix.wear(0, 1, 0))] ==
          doctest::Approx(0.25 * unit * 1.2));
    // charging itself is not priced directly; only energy and wear are
    CHECK(built.program.cost[static_cast<std::size_t>(ix.p_charge(0, 0))] == 0.0);
    CHECK(built.program.cost[static_cast<std::size_t>(ix.p_charge_level(0, 0, 0))] == 0.0);
}

TEST_CASE("builder output is deterministic") {
    NetworkCase net = two_bus_net(2);
    FleetModel fleet = one_point_fleet(2, 2);
    std::string a = export_text(build(net, flat_profiles(2), fleet, base_config()).program);
    std::string b = export_text(build(net, flat_profiles(2), fleet, base_config()).program);
    CHECK(a == b);
}

TEST_CASE("epigraph rows make u the square of the scaled p") {
    auto minimal_u = [](double p_fixed, double p_scale) {
        ConicProgram prog;
        int p = prog.add_col("p", p_fixed, p_fixed);
        int u = prog.add_col("u", 0.0, kInf, 1.0);
        int a0 = prog.add_col("a0", -kInf, kInf);
        prog.add_col("a1", -kInf, kInf);
        prog.add_col("a2", -kInf, kInf);
        epigraph_quadratic(prog, p, u, a0, p_scale);
        SolveOutcome out = solve(prog);
        REQUIRE(out.status == SolveStatus::Optimal);
        return out.objective;
    };
    CHECK(minimal_u(3.0, 1.0) == doctest::Approx(9.0).epsilon(1e-6));
    CHECK(minimal_u(0.5, 1.0) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(minimal_u(0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(minimal_u(0.5, 10.0) == doctest::Approx(25.0).epsilon(1e-6));
}

TEST_CASE("relaxing then fixing reproduces the directly fixed program") {
    NetworkCase net = two_bus_net(2);
    FleetModel fleet = one_point_fleet(2, 2);
    ProfileSet profiles = flat_profiles(2);
    std::vector<std::vector<int>> pattern = {{0, -1}};

    BuildOptions direct;
    direct.fix_levels = pattern;
    BuiltProblem fixed = build(net, profiles, fleet, base_config(), direct);

    BuildOptions relaxed_opts;
    relaxed_opts.relax_binaries = true;
    BuiltProblem relaxed = build(net, profiles, fleet, base_config(), relaxed_opts);
    for (int t = 0; t < 2; ++t) {
        append_group_fix(relaxed.program, relaxed.index, 0, t, pattern[0][static_cast<std::size_t>(t)]);
    }

    CHECK(export_text(fixed.program) == export_text(relaxed.program));
}

TEST_CASE("group ids map back to their point and hour") {
    FleetModel fleet = one_point_fleet(3, 2);
    EvSpec second = fleet.evs[0];
    second.bus = 1;
    fleet.evs.push_back(second);
    BuiltProblem built = build(two_bus_net(3), flat_profiles(3), fleet, base_config());
    const VariableIndex& ix = built.index;

    CHECK(ix.num_groups() == 6);
    for (int gid = 0; gid < ix.num_groups(); ++gid) {
        int e = -1, t = -1;
        ix.group_location(gid, e, t);
        CHECK(ix.group_id(e, t) == gid);
    }
    int e = 0, t = 0;
    CHECK_THROWS_AS(built.index.group_location(6, e, t), InputError);
}

TEST_CASE("builder rejects inconsistent requests") {
    NetworkCase net = two_bus_net(1);
    ProfileSet profiles = flat_profiles(1);
    FleetModel fleet = one_point_fleet(1, 2);

    BuildOptions both;
    both.relax_binaries = true;
    both.fix_levels = {{0}};
    CHECK_THROWS_AS(build(net, profiles, fleet, base_config(), both), InputError);

    BuildOptions short_pattern;
    short_pattern.fix_levels = {{0}, {1}};
    CHECK_THROWS_AS(build(net, profiles, fleet, base_config(), short_pattern), InputError);

    BuildOptions bad_level;
    bad_level.fix_levels = {{7}};
    CHECK_THROWS_AS(build(net, profiles, fleet, base_config(), bad_level), InputError);

    FleetModel lost = fleet;
    lost.evs[0].bus = 42;
    CHECK_THROWS_AS(build(net, profiles, lost, base_config()), InputError);

    NetworkCase loop = net;
    loop.buses.push_back({3, 0.9, 1.1, false});
    loop.branches.push_back({2, 3, 0.05, 0.05, 1.0});
    loop.branches.push_back({3, 1, 0.05, 0.05, 1.0});
    CHECK_THROWS_AS(build(loop, profiles, empty_fleet(1), base_config()), NonRadialError);
}

TEST_CASE("pure network program matches the AC power-flow oracle") {
    NetworkCase net = two_bus_net(1, 0.1, 0.05);
    BuiltProblem built = build(net, flat_profiles(1), empty_fleet(1), base_config());
    SolveOutcome out = solve(built.program);
    REQUIRE(out.status == SolveStatus::Optimal);

    testing::AcpfResult pf = testing::sweep_power_flow(net, {{0.0, 0.0}, {0.1, 0.05}});
    REQUIRE(pf.converged);

    const VariableIndex& ix = built.index;
    CHECK(out.x[static_cast<std::size_t>(ix.p_grid(0))] ==
          doctest::Approx(pf.slack_injection.real()).epsilon(1e-6));
    CHECK(out.x[static_cast<std::size_t>(ix.q_grid(0))] ==
          doctest::Approx(pf.slack_injection.imag()).epsilon(1e-6));
    CHECK(std::sqrt(out.x[static_cast<std::size_t>(ix.c_bus(1, 0))]) ==
          doctest::Approx(std::abs(pf.voltage[1])).epsilon(1e-6));

    // radial exactness: the relaxation is tight at the optimum
    const double cii = out.x[static_cast<std::size_t>(ix.c_bus(0, 0))];
    const double cjj = out.x[static_cast<std::size_t>(ix.c_bus(1, 0))];
    const double cij = out.x[static_cast<std::size_t>(ix.c_line(0, 0))];
    const double sij = out.x[static_cast<std::size_t>(ix.s_line(0, 0))];
    CHECK(std::abs(cij * cij + sij * sij - cii * cjj) <= 1e-8);
}

TEST_CASE("all-idle fixing with travel demand is infeasible") {
    FleetModel traveling = one_point_fleet(2, 1, 0.002);
    BuildOptions idle;
    idle.fix_levels = {{-1, -1}};
    BuiltProblem built =
        build(two_bus_net(2), flat_profiles(2), traveling, base_config(), idle);
    SolveOutcome out = solve(built.program);
    CHECK(out.status == SolveStatus::PrimalInfeasible);

    // control: with no travel the same fixing is feasible (point stays idle)
    FleetModel parked = one_point_fleet(2, 1, 0.0);
    BuiltProblem ok = build(two_bus_net(2), flat_profiles(2), parked, base_config(), idle);
    SolveOutcome out_ok = solve(ok.program);
    CHECK(out_ok.status == SolveStatus::Optimal);
}

TEST_CASE("relaxed charging program is solvable and internally consistent") {
    FleetModel fleet = one_point_fleet(3, 2, 0.001);
    BuildOptions relax;
    relax.relax_binaries = true;
    BuiltProblem built = build(two_bus_net(3), flat_profiles(3), fleet, base_config(), relax);
    SolveOutcome out = solve(built.program);
    REQUIRE(out.status == SolveStatus::Optimal);

    const VariableIndex& ix = built.index;
    for (int t = 0; t < 3; ++t) {
        double level_sum = 0.0;
        for (int j = 0; j < 2; ++j) {
            level_sum += out.x[static_cast<std::size_t>(ix.p_charge_level(0, j, t))];
        }
        CHECK(out.x[static_cast<std::size_t>(ix.p_charge(0, t))] ==
              doctest::Approx(level_sum).epsilon(1e-7));
    }

    // energy stays periodic: E_0 derived from E_2 by the hourly step
    const double e0 = out.x[static_cast<std::size_t>(ix.energy(0, 0))];
    const double e2 = out.x[static_cast<std::size_t>(ix.energy(0, 2))];
    const double pc0 = out.x[static_cast<std::size_t>(ix.p_charge(0, 0))];
    const double travel = 0.001 * 0.3 / 0.9;
    CHECK(e0 == doctest::Approx(e2 + 0.9 * pc0 - travel).epsilon(1e-7));
}
