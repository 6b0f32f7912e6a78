#include "doctest.h"

#include <cmath>

#include "evopf/analysis.hpp"
#include "evopf/solver.hpp"
#include "support/acpf_oracle.hpp"

using namespace evopf;

namespace {

NetworkCase two_bus_net(int horizon, double p_load, double q_load, double s_max = 2.0) {
    NetworkCase net;
    net.name = "twobus";
    net.horizon = horizon;
    net.buses = {{1, 0.9, 1.1, true}, {2, 0.9, 1.1, false}};
    net.branches = {{1, 2, 0.05, 0.05, s_max}};
    net.loads.push_back({2, std::vector<double>(static_cast<std::size_t>(horizon), p_load),
                         std::vector<double>(static_cast<std::size_t>(horizon), q_load)});
    return net;
}

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
        ev.levels.push_back({"L" + std::to_string(j), 0.02 / (j + 1), 1.0});
    }
    ev.p_travel.assign(static_cast<std::size_t>(horizon), travel);
    fleet.evs.push_back(std::move(ev));
    return fleet;
}

// Solves the continuous relaxation of a built problem and wraps the result.
LiftedSolution solved(const BuiltProblem& built, const ProfileSet& profiles) {
    SolveOutcome out = solve(built.program);
    REQUIRE(out.status == SolveStatus::Optimal);
    LiftedSolution sol;
    sol.x = out.x;
    sol.index = built.index;
    split_objective(built.program, sol, profiles);
    return sol;
}

// A hand-made flat lifted point: every voltage 1, no flows, no injections.
LiftedSolution flat_point(const BuiltProblem& built) {
    LiftedSolution sol;
    sol.index = built.index;
    sol.x.assign(static_cast<std::size_t>(built.program.num_cols()), 0.0);
    const VariableIndex& ix = sol.index;
    for (int i = 0; i < ix.n_buses; ++i) {
        for (int t = 0; t < ix.horizon; ++t) {
            sol.x[static_cast<std::size_t>(ix.c_bus(i, t))] = 1.0;
        }
    }
    for (int l = 0; l < ix.n_lines; ++l) {
        for (int t = 0; t < ix.horizon; ++t) {
            sol.x[static_cast<std::size_t>(ix.c_line(l, t))] = 1.0;
        }
    }
    return sol;
}

} // namespace

TEST_CASE("exactness residual on hand-made lifted points") {
    NetworkCase net = two_bus_net(1, 0.1, 0.05);
    BuiltProblem built = build(net, flat_profiles(1), empty_fleet(1), ScenarioConfig{});

    LiftedSolution sol = flat_point(built);
    std::vector<double> r = exactness_residual(sol, net);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(0.0));

    sol.x[static_cast<std::size_t>(sol.index.c_line(0, 0))] = 0.9;
    r = exactness_residual(sol, net);
    CHECK(r[0] == doctest::Approx(0.19));
}

TEST_CASE("flat lifted point recovers unit phasors everywhere") {
    NetworkCase net = two_bus_net(2, 0.1, 0.05);
    BuiltProblem built = build(net, flat_profiles(2), empty_fleet(2), ScenarioConfig{});
    RecoveredPhasors ph = recover_phasors(flat_point(built), net);
    for (int i = 0; i < 2; ++i) {
        for (int t = 0; t < 2; ++t) {
            CHECK(ph.magnitude(i, t) == doctest::Approx(1.0));
            CHECK(ph.angle(i, t) == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("recovery is refused on a visibly inexact point") {
    NetworkCase net = two_bus_net(1, 0.1, 0.05);
    BuiltProblem built = build(net, flat_profiles(1), empty_fleet(1), ScenarioConfig{});
    LiftedSolution sol = flat_point(built);
    sol.x[static_cast<std::size_t>(sol.index.c_line(0, 0))] = std::sqrt(0.9); // residual 0.1
    CHECK_THROWS_AS(recover_phasors(sol, net), RecoveryRefusedError);
    // a permissive threshold admits the same point
    CHECK_NOTHROW(recover_phasors(sol, net, 0.2));
}

TEST_CASE("solved two-bus network: recovery closure and AC validation") {
    NetworkCase net = two_bus_net(1, 0.1, 0.05);
    ProfileSet profiles = flat_profiles(1);
    BuiltProblem built = build(net, profiles, empty_fleet(1), ScenarioConfig{});
    LiftedSolution sol = solved(built, profiles);
    const VariableIndex& ix = sol.index;

    RecoveredPhasors ph = recover_phasors(sol, net);

    // lifting the recovered phasors reproduces the stored pair
    const double mag1 = ph.magnitude(0, 0), mag2 = ph.magnitude(1, 0);
    const double dtheta = ph.angle(0, 0) - ph.angle(1, 0);
    CHECK(mag1 * mag2 * std::cos(dtheta) ==
          doctest::Approx(sol.at(ix.c_line(0, 0))).epsilon(1e-9));
    CHECK(mag1 * mag2 * std::sin(dtheta) ==
          doctest::Approx(sol.at(ix.s_line(0, 0))).epsilon(1e-9));
    CHECK(mag2 * mag2 == doctest::Approx(sol.at(ix.c_bus(1, 0))).epsilon(1e-12));
    CHECK(ph.angle(0, 0) == doctest::Approx(0.0)); // slack reference

    // phasors agree with the independent AC sweep
    testing::AcpfResult pf = testing::sweep_power_flow(net, {{0.0, 0.0}, {0.1, 0.05}});
    REQUIRE(pf.converged);
    CHECK(mag2 == doctest::Approx(std::abs(pf.voltage[1])).epsilon(1e-6));

    AcResidualReport ac = validate_ac(ph, sol, net);
    CHECK(ac.max_flow <= 1e-6);
    CHECK(ac.max_balance <= 1e-6);
}

TEST_CASE("zeroed flows against a nonzero load leave the load as imbalance") {
    NetworkCase net = two_bus_net(1, 0.1, 0.05);
    BuiltProblem built = build(net, flat_profiles(1), empty_fleet(1), ScenarioConfig{});
    LiftedSolution sol = flat_point(built); // flat voltages => zero AC flows
    RecoveredPhasors ph = recover_phasors(sol, net);
    AcResidualReport ac = validate_ac(ph, sol, net);
    CHECK(ac.max_flow == doctest::Approx(0.0));
    CHECK(ac.max_balance == doctest::Approx(0.1)); // the unserved real load
}

TEST_CASE("unloaded flat case validates to zero everywhere") {
    NetworkCase net = two_bus_net(1, 0.0, 0.0);
    net.loads.clear();
    BuiltProblem built = build(net, flat_profiles(1), empty_fleet(1), ScenarioConfig{});
    LiftedSolution sol = flat_point(built);
    RecoveredPhasors ph = recover_phasors(sol, net);
    AcResidualReport ac = validate_ac(ph, sol, net);
    CHECK(ac.max_flow == doctest::Approx(0.0));
    CHECK(ac.max_balance == doctest::Approx(0.0));
}

TEST_CASE("objective split is an exact accounting of the solver objective") {
    NetworkCase net = two_bus_net(3, 0.1, 0.05);
    ProfileSet profiles = flat_profiles(3);
    profiles.tou_price = {8000.0, 12000.0, 20000.0};
    FleetModel fleet = one_point_fleet(3, 2, 0.001);
    BuildOptions relax;
    relax.relax_binaries = true;
    BuiltProblem built = build(net, profiles, fleet, ScenarioConfig{}, relax);

    SolveOutcome out = solve(built.program);
    REQUIRE(out.status == SolveStatus::Optimal);
    LiftedSolution sol;
    sol.x = out.x;
    sol.index = built.index;
    split_objective(built.program, sol, profiles);

    CHECK(sol.objective ==
          doctest::Approx(out.objective).epsilon(1e-9)); // energy + wear covers everything
    CHECK(sol.energy_cost > 0.0);
    CHECK(sol.degradation_cost > 0.0);
    CHECK(sol.energy_cost + sol.degradation_cost == doctest::Approx(sol.objective));
}

TEST_CASE("quality metrics count sub-threshold bus-hours") {
    // heavy load pulls the far bus below 0.95 p.u.
    NetworkCase net = two_bus_net(2, 0.7, 0.35);
    ProfileSet profiles = flat_profiles(2);
    BuiltProblem built = build(net, profiles, empty_fleet(2), ScenarioConfig{});
    LiftedSolution sol = solved(built, profiles);
    RecoveredPhasors ph = recover_phasors(sol, net);
    QualityReport q = quality_metrics(sol, ph, net);

    CHECK(q.bus_ids == std::vector<int>{1, 2});
    CHECK(q.voltage[1][0] < 0.95);
    CHECK(q.hours_below[0] == 0);
    CHECK(q.hours_below[1] == 2);
    REQUIRE(q.violations.size() == 2);
    CHECK(q.violations[0] == std::pair<int, int>{2, 0});
    CHECK(q.max_exactness <= 1e-6);
    CHECK(q.max_balance <= 1e-6);
    CHECK(q.grid_p.size() == 2);
    CHECK(q.grid_p[0] > 0.7); // load plus losses
    CHECK(q.total_cost == doctest::Approx(sol.objective));

    // flat point has no violations
    LiftedSolution flat = flat_point(built);
    QualityReport q0 = quality_metrics(flat, recover_phasors(flat, net), net);
    CHECK(q0.violations.empty());
    CHECK(q0.hours_below == std::vector<int>{0, 0});
}

TEST_CASE("constraint check passes a solved restriction and flags corruption") {
    NetworkCase net = two_bus_net(2, 0.1, 0.05);
    ProfileSet profiles = flat_profiles(2);
    FleetModel fleet = one_point_fleet(2, 1, 0.001);
    BuildOptions fix;
    fix.fix_levels = {{0, 0}}; // charger active both hours
    BuiltProblem built = build(net, profiles, fleet, ScenarioConfig{}, fix);
    LiftedSolution sol = solved(built, profiles);

    ConstraintCheck ok = check_constraints(sol, net, fleet);
    CHECK(ok.worst() <= 1e-6);

    SUBCASE("negative charging power") {
        sol.x[static_cast<std::size_t>(sol.index.p_charge_level(0, 0, 0))] = -0.5;
        ConstraintCheck bad = check_constraints(sol, net, fleet);
        CHECK(bad.charge_sign == doctest::Approx(0.5));
        CHECK(bad.worst() >= 0.5);
    }
    SUBCASE("fractional indicator") {
        sol.x[static_cast<std::size_t>(sol.index.indicator(0, 0, 0))] = 0.4;
        ConstraintCheck bad = check_constraints(sol, net, fleet);
        CHECK(bad.exclusivity == doctest::Approx(0.4));
    }
    SUBCASE("charging beyond the gated rating") {
        sol.x[static_cast<std::size_t>(sol.index.p_charge_level(0, 0, 0))] = 0.05;
        ConstraintCheck bad = check_constraints(sol, net, fleet);
        // cap = 0.02 * r_charge(0.6) = 0.012
        CHECK(bad.level_cap == doctest::Approx(0.05 - 0.012));
    }
    SUBCASE("energy outside the band") {
        sol.x[static_cast<std::size_t>(sol.index.energy(0, 0))] = 0.5;
        ConstraintCheck bad = check_constraints(sol, net, fleet);
        CHECK(bad.energy_bounds == doctest::Approx(0.42));
        CHECK(bad.cyclic > 0.0);
    }
    SUBCASE("line envelope violation") {
        sol.x[static_cast<std::size_t>(sol.index.p_flow(0, 0))] = 5.0;
        ConstraintCheck bad = check_constraints(sol, net, fleet);
        CHECK(bad.line_cone >= 3.0 - 1e-9); // sqrt(25+q^2) - 2.0
    }
}
