#include "evopf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace evopf {

namespace {

double sq(double v) { return v * v; }

// Sending-end complex power of a series branch seen from V_a toward V_b.
std::complex<double> branch_power(std::complex<double> va, std::complex<double> vb, double r,
                                  double x) {
    const std::complex<double> y = 1.0 / std::complex<double>(r, x);
    return va * std::conj((va - vb) * y);
}

} // namespace

void split_objective(const ConicProgram& program, LiftedSolution& sol,
                     const ProfileSet& profiles) {
    const VariableIndex& ix = sol.index;
    double energy = 0.0;
    for (int t = 0; t < ix.horizon; ++t) {
        energy += profiles.tou_price[static_cast<std::size_t>(t)] * sol.at(ix.p_grid(t));
    }
    double wear = 0.0;
    for (int e = 0; e < ix.n_points; ++e) {
        for (int j = 0; j < ix.levels_per_point[static_cast<std::size_t>(e)]; ++j) {
            for (int t = 0; t < ix.horizon; ++t) {
                const int col = ix.wear(e, j, t);
                wear += program.cost[static_cast<std::size_t>(col)] * sol.at(col);
            }
        }
    }
    sol.energy_cost = energy;
    sol.degradation_cost = wear;
    sol.objective = energy + wear;
}

double RecoveredPhasors::magnitude(int i, int t) const {
    const std::size_t k = static_cast<std::size_t>(i * horizon + t);
    return std::hypot(e[k], f[k]);
}

double RecoveredPhasors::angle(int i, int t) const {
    const std::size_t k = static_cast<std::size_t>(i * horizon + t);
    return std::atan2(f[k], e[k]);
}

std::vector<double> exactness_residual(const LiftedSolution& sol, const NetworkCase& net) {
    const VariableIndex& ix = sol.index;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(ix.n_lines * ix.horizon));
    for (int l = 0; l < ix.n_lines; ++l) {
        const Branch& br = net.branches[static_cast<std::size_t>(l)];
        const int fi = net.bus_index(br.from);
        const int ti = net.bus_index(br.to);
        for (int t = 0; t < ix.horizon; ++t) {
            const double c = sol.at(ix.c_line(l, t));
            const double s = sol.at(ix.s_line(l, t));
            out.push_back(std::abs(c * c + s * s -
                                   sol.at(ix.c_bus(fi, t)) * sol.at(ix.c_bus(ti, t))));
        }
    }
    return out;
}

RecoveredPhasors recover_phasors(const LiftedSolution& sol, const NetworkCase& net,
                                 double refusal_threshold) {
    const std::vector<double> residual = exactness_residual(sol, net);
    double worst = 0.0;
    for (double r : residual) worst = std::max(worst, r);
    if (worst > refusal_threshold) {
        throw RecoveryRefusedError(
            "lifted solution is not tight enough for phasor recovery: residual " +
            std::to_string(worst) + " exceeds " + std::to_string(refusal_threshold));
    }

    const VariableIndex& ix = sol.index;
    const int T = ix.horizon;
    const RootedTree tree = root_at_slack(net);

    RecoveredPhasors ph;
    ph.horizon = T;
    ph.e.assign(static_cast<std::size_t>(ix.n_buses) * static_cast<std::size_t>(T), 0.0);
    ph.f = ph.e;

    std::vector<double> theta(static_cast<std::size_t>(ix.n_buses), 0.0);
    for (int t = 0; t < T; ++t) {
        for (int i : tree.bfs_order) {
            const int b = tree.parent_branch[static_cast<std::size_t>(i)];
            if (b < 0) {
                theta[static_cast<std::size_t>(i)] = 0.0;
            } else {
                const Branch& br = net.branches[static_cast<std::size_t>(b)];
                const int parent = tree.parent[static_cast<std::size_t>(i)];
                // stored pair follows the branch orientation; flip s when the
                // tree walks the branch against it
                const double sign = (net.bus_index(br.from) == parent) ? 1.0 : -1.0;
                const double c = sol.at(ix.c_line(b, t));
                const double s = sign * sol.at(ix.s_line(b, t));
                theta[static_cast<std::size_t>(i)] =
                    theta[static_cast<std::size_t>(parent)] - std::atan2(s, c);
            }
            const double mag = std::sqrt(std::max(0.0, sol.at(ix.c_bus(i, t))));
            const std::size_t k = static_cast<std::size_t>(i * T + t);
            ph.e[k] = mag * std::cos(theta[static_cast<std::size_t>(i)]);
            ph.f[k] = mag * std::sin(theta[static_cast<std::size_t>(i)]);
        }
    }
    return ph;
}

AcResidualReport validate_ac(const RecoveredPhasors& phasors, const LiftedSolution& sol,
                             const NetworkCase& net) {
    const VariableIndex& ix = sol.index;
    const int T = ix.horizon;
    const int n = ix.n_buses;
    const int slack = net.bus_index(net.slack_bus());

    auto v = [&](int i, int t) {
        const std::size_t k = static_cast<std::size_t>(i * T + t);
        return std::complex<double>(phasors.e[k], phasors.f[k]);
    };

    AcResidualReport rep;
    // flow equations per line-hour, both orientations
    for (int l = 0; l < ix.n_lines; ++l) {
        const Branch& br = net.branches[static_cast<std::size_t>(l)];
        const int fi = net.bus_index(br.from);
        const int ti = net.bus_index(br.to);
        for (int t = 0; t < T; ++t) {
            const std::complex<double> fwd = branch_power(v(fi, t), v(ti, t), br.r, br.x);
            const std::complex<double> rev = branch_power(v(ti, t), v(fi, t), br.r, br.x);
            rep.max_flow = std::max({rep.max_flow,
                                     std::abs(fwd.real() - sol.at(ix.p_flow(l, t))),
                                     std::abs(fwd.imag() - sol.at(ix.q_flow(l, t))),
                                     std::abs(rev.real() - sol.at(ix.p_flow_rev(l, t))),
                                     std::abs(rev.imag() - sol.at(ix.q_flow_rev(l, t)))});
        }
    }

    // nodal balance per bus-hour from the phasors against the solution's
    // injections and the case's loads
    std::vector<std::vector<double>> load_p(static_cast<std::size_t>(n),
                                            std::vector<double>(static_cast<std::size_t>(T), 0.0));
    std::vector<std::vector<double>> load_q = load_p;
    for (const Load& d : net.loads) {
        const std::size_t i = static_cast<std::size_t>(net.bus_index(d.bus));
        for (int t = 0; t < T; ++t) {
            load_p[i][static_cast<std::size_t>(t)] += d.p_profile[static_cast<std::size_t>(t)];
            load_q[i][static_cast<std::size_t>(t)] += d.q_profile[static_cast<std::size_t>(t)];
        }
    }

    for (int i = 0; i < n; ++i) {
        const BusId id = net.buses[static_cast<std::size_t>(i)].id;
        for (int t = 0; t < T; ++t) {
            std::complex<double> out_flow(0.0, 0.0);
            for (int l = 0; l < ix.n_lines; ++l) {
                const Branch& br = net.branches[static_cast<std::size_t>(l)];
                if (br.from == id) {
                    out_flow += branch_power(v(i, t), v(net.bus_index(br.to), t), br.r, br.x);
                } else if (br.to == id) {
                    out_flow += branch_power(v(i, t), v(net.bus_index(br.from), t), br.r, br.x);
                }
            }
            double inj_p = -load_p[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
            double inj_q = -load_q[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
            if (i == slack) {
                inj_p += sol.at(ix.p_grid(t));
                inj_q += sol.at(ix.q_grid(t));
            }
            for (int s = 0; s < ix.n_solar; ++s) {
                if (net.bus_index(net.solar[static_cast<std::size_t>(s)].bus) == i) {
                    inj_p += sol.at(ix.p_solar(s, t));
                }
            }
            for (int e = 0; e < ix.n_points; ++e) {
                if (ix.point_bus_index[static_cast<std::size_t>(e)] == i) {
                    inj_p -= sol.at(ix.p_charge(e, t));
                }
            }
            rep.max_balance = std::max({rep.max_balance, std::abs(out_flow.real() - inj_p),
                                        std::abs(out_flow.imag() - inj_q)});
        }
    }
    return rep;
}

QualityReport quality_metrics(const LiftedSolution& sol, const RecoveredPhasors& phasors,
                              const NetworkCase& net, double threshold) {
    const VariableIndex& ix = sol.index;
    QualityReport q;
    q.horizon = ix.horizon;
    q.threshold = threshold;

    for (const Bus& b : net.buses) q.bus_ids.push_back(b.id);
    q.voltage.assign(net.buses.size(), std::vector<double>(static_cast<std::size_t>(ix.horizon)));
    q.hours_below.assign(net.buses.size(), 0);
    for (int i = 0; i < ix.n_buses; ++i) {
        for (int t = 0; t < ix.horizon; ++t) {
            const double mag = phasors.magnitude(i, t);
            q.voltage[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] = mag;
            if (mag < threshold) {
                q.violations.push_back({net.buses[static_cast<std::size_t>(i)].id, t});
                ++q.hours_below[static_cast<std::size_t>(i)];
            }
        }
    }

    for (double r : exactness_residual(sol, net)) q.max_exactness = std::max(q.max_exactness, r);
    q.max_balance = validate_ac(phasors, sol, net).max_balance;

    for (int t = 0; t < ix.horizon; ++t) {
        q.grid_p.push_back(sol.at(ix.p_grid(t)));
        q.grid_q.push_back(sol.at(ix.q_grid(t)));
    }
    q.total_cost = sol.objective;
    q.energy_cost = sol.energy_cost;
    q.degradation_cost = sol.degradation_cost;
    return q;
}

double ConstraintCheck::worst() const {
    return std::max({level_cap, exclusivity, level_sum, energy_bounds, cyclic, charge_sign,
                     line_cone});
}

ConstraintCheck check_constraints(const LiftedSolution& sol, const NetworkCase& net,
                                  const FleetModel& fleet, double integrality_tol) {
    const VariableIndex& ix = sol.index;
    const int T = ix.horizon;
    ConstraintCheck chk;

    for (int e = 0; e < ix.n_points; ++e) {
        const EvSpec& ev = fleet.evs[static_cast<std::size_t>(e)];
        const int J = ix.levels_per_point[static_cast<std::size_t>(e)];

        std::vector<double> trajectory, p_charge;
        for (int t = 0; t < T; ++t) {
            trajectory.push_back(sol.at(ix.energy(e, t)));
            p_charge.push_back(sol.at(ix.p_charge(e, t)));
        }
        chk.cyclic =
            std::max(chk.cyclic, cyclic_closure(trajectory, p_charge, ev, fleet.profiles));

        for (int t = 0; t < T; ++t) {
            const double et = trajectory[static_cast<std::size_t>(t)];
            chk.energy_bounds = std::max({chk.energy_bounds, ev.e_min - et, et - ev.e_max});
            chk.charge_sign =
                std::max(chk.charge_sign, -p_charge[static_cast<std::size_t>(t)]);

            double level_sum = 0.0, group_sum = 0.0;
            for (int j = 0; j < J; ++j) {
                const double pcl = sol.at(ix.p_charge_level(e, j, t));
                const double ind = sol.at(ix.indicator(e, j, t));
                const double cap = ev.levels[static_cast<std::size_t>(j)].p_max *
                                   fleet.profiles.r_charge[static_cast<std::size_t>(t)];
                level_sum += pcl;
                group_sum += ind;
                chk.charge_sign = std::max(chk.charge_sign, -pcl);
                chk.level_cap = std::max(chk.level_cap, pcl - cap * ind);
                const double dist = std::min(std::abs(ind), std::abs(1.0 - ind));
                if (dist > integrality_tol) chk.exclusivity = std::max(chk.exclusivity, dist);
            }
            if (group_sum - 1.0 > integrality_tol) {
                chk.exclusivity = std::max(chk.exclusivity, group_sum - 1.0);
            }
            chk.level_sum = std::max(
                chk.level_sum, std::abs(level_sum - p_charge[static_cast<std::size_t>(t)]));
        }
    }

    for (int l = 0; l < ix.n_lines; ++l) {
        const Branch& br = net.branches[static_cast<std::size_t>(l)];
        if (!std::isfinite(br.s_max)) continue;
        for (int t = 0; t < T; ++t) {
            const double fwd =
                std::sqrt(sq(sol.at(ix.p_flow(l, t))) + sq(sol.at(ix.q_flow(l, t))));
            const double rev =
                std::sqrt(sq(sol.at(ix.p_flow_rev(l, t))) + sq(sol.at(ix.q_flow_rev(l, t))));
            chk.line_cone = std::max({chk.line_cone, fwd - br.s_max, rev - br.s_max});
        }
    }
    return chk;
}

} // namespace evopf
