#include "doctest.h"

#include <cmath>
#include <complex>
#include <limits>

#include "evopf/network.hpp"
#include "evopf/solver.hpp"
#include "support/acpf_oracle.hpp"

using namespace evopf;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// min x0 subject to x0 >= ||(x1, x2)||, x1 = 3, x2 = 4.
ConicProgram norm_cone_program() {
    ConicProgram p;
    p.add_col("x0", -kInf, kInf, 1.0);
    p.add_col("x1", 3.0, 3.0);
    p.add_col("x2", 4.0, 4.0);
    p.add_cone(ConeKind::Soc, 0, 3);
    return p;
}

// u bounded below by p^2 through the cone ||(2p, u-1)|| <= u+1.
ConicProgram epigraph_program(double p_fixed, double u_cost, double u_upper) {
    ConicProgram prog;
    const int u = prog.add_col("u", -kInf, u_upper, u_cost);
    const int p = prog.add_col("p", p_fixed, p_fixed);
    const int a0 = prog.add_col("a0", -kInf, kInf);
    const int a1 = prog.add_col("a1", -kInf, kInf);
    const int a2 = prog.add_col("a2", -kInf, kInf);
    prog.add_row("def_a0", {{a0, 1.0}, {u, -1.0}}, 1.0);
    prog.add_row("def_a1", {{a1, 1.0}, {p, -2.0}}, 0.0);
    prog.add_row("def_a2", {{a2, 1.0}, {u, -1.0}}, -1.0);
    prog.add_cone(ConeKind::Soc, a0, 3);
    return prog;
}

// Single line feeding one load; lifted formulation written out by hand.
struct TwoBusOpf {
    ConicProgram prog;
    int pg, qg, c11, c22, c12, s12, p12, q12, p21, q21;
};

TwoBusOpf two_bus_opf(double p_load, double q_load, double r, double x) {
    const double z2 = r * r + x * x;
    const double g_off = -r / z2;
    const double b_off = x / z2;

    TwoBusOpf t;
    ConicProgram& p = t.prog;
    t.pg = p.add_col("pg", 0.0, kInf, 1.0);
    t.qg = p.add_col("qg", -kInf, kInf);
    t.c11 = p.add_col("c11", 1.0, 1.0);
    t.c22 = p.add_col("c22", 0.81, 1.21);
    t.c12 = p.add_col("c12", -kInf, kInf);
    t.s12 = p.add_col("s12", -kInf, kInf);
    t.p12 = p.add_col("p12", -kInf, kInf);
    t.q12 = p.add_col("q12", -kInf, kInf);
    t.p21 = p.add_col("p21", -kInf, kInf);
    t.q21 = p.add_col("q21", -kInf, kInf);

    // flow definitions in lifted variables
    p.add_row("def_p12", {{t.p12, 1.0}, {t.c11, g_off}, {t.c12, -g_off}, {t.s12, -b_off}}, 0.0);
    p.add_row("def_q12", {{t.q12, 1.0}, {t.c11, -b_off}, {t.c12, b_off}, {t.s12, -g_off}}, 0.0);
    p.add_row("def_p21", {{t.p21, 1.0}, {t.c22, g_off}, {t.c12, -g_off}, {t.s12, b_off}}, 0.0);
    p.add_row("def_q21", {{t.q21, 1.0}, {t.c22, -b_off}, {t.c12, b_off}, {t.s12, g_off}}, 0.0);
    // nodal balance
    p.add_row("bal_p1", {{t.p12, 1.0}, {t.pg, -1.0}}, 0.0);
    p.add_row("bal_q1", {{t.q12, 1.0}, {t.qg, -1.0}}, 0.0);
    p.add_row("bal_p2", {{t.p21, 1.0}}, -p_load);
    p.add_row("bal_q2", {{t.q21, 1.0}}, -q_load);
    // voltage product cone
    const int w0 = p.add_col("w0", -kInf, kInf);
    const int w1 = p.add_col("w1", -kInf, kInf);
    const int w2 = p.add_col("w2", -kInf, kInf);
    const int w3 = p.add_col("w3", -kInf, kInf);
    p.add_row("def_w0", {{w0, 1.0}, {t.c11, -1.0}, {t.c22, -1.0}}, 0.0);
    p.add_row("def_w1", {{w1, 1.0}, {t.c12, -2.0}}, 0.0);
    p.add_row("def_w2", {{w2, 1.0}, {t.s12, -2.0}}, 0.0);
    p.add_row("def_w3", {{w3, 1.0}, {t.c11, -1.0}, {t.c22, 1.0}}, 0.0);
    p.add_cone(ConeKind::Soc, w0, 4);
    return t;
}

} // namespace

TEST_CASE("norm cone optimum is the euclidean norm") {
    SolveOutcome out = solve(norm_cone_program());
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(out.x[0] == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("epigraph cone bounds the squared value") {
    SUBCASE("pushing u down stops at p squared") {
        SolveOutcome out = solve(epigraph_program(0.5, 1.0, kInf));
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.x[0] == doctest::Approx(0.25).epsilon(1e-6));
    }
    SUBCASE("pushing u up stops at its upper bound") {
        SolveOutcome out = solve(epigraph_program(0.5, -1.0, 1.0));
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("p = 3 forces u at least 9") {
        SolveOutcome out = solve(epigraph_program(3.0, 1.0, kInf));
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.x[0] == doctest::Approx(9.0).epsilon(1e-6));
    }
    SUBCASE("p = 0 allows u = 0") {
        SolveOutcome out = solve(epigraph_program(0.0, 1.0, kInf));
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.x[0] == doctest::Approx(0.0).epsilon(1e-6));
    }
}

TEST_CASE("single-load network matches the sweep power flow") {
    const double p_load = 0.1, q_load = 0.05, r = 0.05, x = 0.05;
    TwoBusOpf t = two_bus_opf(p_load, q_load, r, x);
    SolverSettings settings;
    SolveOutcome out = solve(t.prog, settings);
    REQUIRE(out.status == SolveStatus::Optimal);

    NetworkCase net;
    net.name = "two-bus";
    net.horizon = 1;
    net.buses = {{1, 0.9, 1.1, true}, {2, 0.9, 1.1, false}};
    net.branches = {{1, 2, r, x, 10.0}};
    testing::AcpfResult pf = testing::sweep_power_flow(net, {{0.0, 0.0}, {p_load, q_load}});
    REQUIRE(pf.converged);

    CHECK(out.x[t.pg] == doctest::Approx(pf.slack_injection.real()).epsilon(1e-6));
    CHECK(out.x[t.qg] == doctest::Approx(pf.slack_injection.imag()).epsilon(1e-6));
    CHECK(std::sqrt(out.x[t.c22]) == doctest::Approx(std::abs(pf.voltage[1])).epsilon(1e-6));
    CHECK(out.x[t.p12] == doctest::Approx(pf.flow_from[0].real()).epsilon(1e-6));
    CHECK(out.x[t.q12] == doctest::Approx(pf.flow_from[0].imag()).epsilon(1e-6));

    // relaxation is tight on a radial line
    const double residual = std::abs(out.x[t.c12] * out.x[t.c12] +
                                     out.x[t.s12] * out.x[t.s12] -
                                     out.x[t.c11] * out.x[t.c22]);
    CHECK(residual <= 1e-8);
}

TEST_CASE("optimal output re-checked through the public residual path") {
    SolveOutcome out = solve(norm_cone_program());
    REQUIRE(out.status == SolveStatus::Optimal);
    ResidualReport rep = residuals(norm_cone_program(), out.x, out.y, out.z);
    CHECK(rep.primal <= 1e-8);
    CHECK(rep.dual <= 1e-8);
    CHECK(rep.gap <= 1e-8);
}

TEST_CASE("zero candidate reports the right-hand side as primal residual") {
    ConicProgram p;
    p.add_col("x", -kInf, kInf, 1.0);
    p.add_col("y", 0.0, kInf);
    p.add_row("r0", {{0, 1.0}, {1, 1.0}}, 2.5);
    p.add_row("r1", {{0, 1.0}}, -1.0);
    std::vector<double> x{0.0, 0.0}, y{0.0, 0.0}, z{0.0};
    ResidualReport rep = residuals(p, x, y, z);
    CHECK(rep.primal_abs == doctest::Approx(2.5));
}

TEST_CASE("perturbing the optimum grows the residuals proportionally") {
    ConicProgram p = norm_cone_program();
    SolveOutcome out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    double prev = 0.0;
    for (double eps : {1e-3, 1e-2, 1e-1}) {
        std::vector<double> xp = out.x;
        for (double& v : xp) v += eps;
        ResidualReport rep = residuals(p, xp, out.y, out.z);
        CHECK(rep.primal_abs >= prev);
        CHECK(rep.primal_abs >= eps * 0.5);
        prev = rep.primal_abs;
    }
}

TEST_CASE("repeated solves are bit-identical") {
    TwoBusOpf t1 = two_bus_opf(0.1, 0.05, 0.05, 0.05);
    TwoBusOpf t2 = two_bus_opf(0.1, 0.05, 0.05, 0.05);
    SolveOutcome a = solve(t1.prog);
    SolveOutcome b = solve(t2.prog);
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(a.x.size() == b.x.size());
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        CHECK(a.x[i] == b.x[i]);
    }
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("scaling the objective leaves the argmin in place") {
    TwoBusOpf base = two_bus_opf(0.1, 0.05, 0.05, 0.05);
    SolveOutcome ref = solve(base.prog);
    REQUIRE(ref.status == SolveStatus::Optimal);
    for (double alpha : {7.0, 0.013}) {
        TwoBusOpf scaled = two_bus_opf(0.1, 0.05, 0.05, 0.05);
        for (double& c : scaled.prog.cost) c *= alpha;
        SolveOutcome out = solve(scaled.prog);
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.x[scaled.pg] == doctest::Approx(ref.x[base.pg]).epsilon(1e-6));
        CHECK(out.objective == doctest::Approx(alpha * ref.objective).epsilon(1e-6));
    }
}

TEST_CASE("conflicting equalities are reported primal infeasible") {
    ConicProgram p;
    p.add_col("x", 1.0, kInf);
    p.add_col("y", 0.0, kInf);
    p.add_row("tie", {{0, 1.0}, {1, 1.0}}, 0.0); // x = -y <= 0 but x >= 1
    SolveOutcome out = solve(p);
    CHECK(out.status == SolveStatus::PrimalInfeasible);
}

TEST_CASE("unbounded descent is reported dual infeasible") {
    ConicProgram p;
    p.add_col("x", 0.0, kInf, -1.0);
    SolveOutcome out = solve(p);
    CHECK(out.status == SolveStatus::DualInfeasible);
}

TEST_CASE("wider norm cones work the same way") {
    ConicProgram p;
    p.add_col("x0", -kInf, kInf, 1.0);
    for (int i = 1; i <= 4; ++i) {
        p.add_col("x" + std::to_string(i), static_cast<double>(i), static_cast<double>(i));
    }
    p.add_cone(ConeKind::Soc, 0, 5);
    SolveOutcome out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(std::sqrt(30.0)).epsilon(1e-7));
}

TEST_CASE("nonnegative cone slices behave like bounds") {
    ConicProgram p;
    p.add_col("x", -kInf, kInf, 1.0);
    p.add_col("y", -kInf, kInf, 2.0);
    p.add_row("sum", {{0, 1.0}, {1, 1.0}}, 3.0);
    p.add_cone(ConeKind::NonNeg, 0, 2);
    SolveOutcome out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.x[0] == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(out.x[1] == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("input validation rejects malformed programs") {
    ConicProgram empty;
    CHECK_THROWS_AS(solve(empty), InputError);

    ConicProgram marked;
    marked.add_col("i", 0.0, 1.0, 0.0, true);
    CHECK_THROWS_AS(solve(marked), InputError);

    ConicProgram nan_cost;
    nan_cost.add_col("x", 0.0, 1.0, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(solve(nan_cost), ValidationError);
}
