#include "evopf/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace evopf {

namespace {
const double kInf = std::numeric_limits<double>::infinity();

std::string tag2(const char* stem, int a, int b) {
    std::ostringstream s;
    s << stem << a << "_" << b;
    return s.str();
}

std::string tag3(const char* stem, int a, int b, int c) {
    std::ostringstream s;
    s << stem << a << "_" << b << "_" << c;
    return s.str();
}
} // namespace

void VariableIndex::group_location(int gid, int& e, int& t) const {
    if (gid < 0 || gid >= num_groups()) throw InputError("group id out of range");
    for (int p = 0; p < n_points; ++p) {
        if (gid < group_off_[static_cast<std::size_t>(p) + 1]) {
            e = p;
            t = gid - group_off_[static_cast<std::size_t>(p)];
            return;
        }
    }
    throw InputError("group id out of range");
}

void epigraph_quadratic(ConicProgram& prog, int p_col, int u_col, int a0_col, double p_scale) {
    prog.add_row(tag2("epi_h", p_col, 0), {{a0_col, 1.0}, {u_col, -1.0}}, 1.0);
    prog.add_row(tag2("epi_h", p_col, 1), {{a0_col + 1, 1.0}, {p_col, -2.0 * p_scale}}, 0.0);
    prog.add_row(tag2("epi_h", p_col, 2), {{a0_col + 2, 1.0}, {u_col, -1.0}}, -1.0);
    prog.add_cone(ConeKind::Soc, a0_col, 3);
}

void append_group_fix(ConicProgram& prog, const VariableIndex& idx, int e, int t, int level) {
    const int n_levels = idx.levels_per_point[static_cast<std::size_t>(e)];
    if (level < -1 || level >= n_levels) {
        throw InputError("fix level " + std::to_string(level) + " out of range for point " +
                         std::to_string(e));
    }
    for (int j = 0; j < n_levels; ++j) {
        prog.add_row(tag3("fix_e", e, t, j), {{idx.indicator(e, j, t), 1.0}},
                     j == level ? 1.0 : 0.0);
    }
}

struct Builder {
    static BuiltProblem run(const NetworkCase& net, const ProfileSet& profiles,
                            const FleetModel& fleet, const ScenarioConfig& scenario,
                            const BuildOptions& options);
};

BuiltProblem build(const NetworkCase& net, const ProfileSet& profiles, const FleetModel& fleet,
                   const ScenarioConfig& scenario, const BuildOptions& options) {
    return Builder::run(net, profiles, fleet, scenario, options);
}

BuiltProblem Builder::run(const NetworkCase& net, const ProfileSet& profiles,
                          const FleetModel& fleet, const ScenarioConfig& scenario,
                          const BuildOptions& options) {
    net.validate();
    profiles.validate(net.horizon);
    fleet.validate(net.horizon);
    scenario.validate();
    if (!net.branches.empty() && !check_radial(net)) {
        throw NonRadialError("the lifted formulation requires a radial network");
    }
    if (options.relax_binaries && !options.fix_levels.empty()) {
        throw InputError("fix_levels and relax_binaries are mutually exclusive");
    }

    const int T = net.horizon;
    const int n = static_cast<int>(net.buses.size());
    const int L = static_cast<int>(net.branches.size());
    const int S = static_cast<int>(net.solar.size());
    const int E = static_cast<int>(fleet.evs.size());
    const int slack = net.bus_index(net.slack_bus());
    const AdmittanceView adm = build_admittance(net);

    if (!options.fix_levels.empty()) {
        if (static_cast<int>(options.fix_levels.size()) != E) {
            throw InputError("fix_levels needs one pattern per charging point");
        }
        for (const auto& pat : options.fix_levels) {
            if (static_cast<int>(pat.size()) != T) {
                throw InputError("fix_levels patterns need one entry per hour");
            }
        }
    }
    const bool mark_integer = !options.relax_binaries && options.fix_levels.empty();

    BuiltProblem out;
    ConicProgram& p = out.program;
    VariableIndex& ix = out.index;
    ix.horizon = T;
    ix.n_buses = n;
    ix.n_lines = L;
    ix.n_solar = S;
    ix.n_points = E;
    for (int e = 0; e < E; ++e) {
        const EvSpec& ev = fleet.evs[static_cast<std::size_t>(e)];
        ix.levels_per_point.push_back(static_cast<int>(ev.levels.size()));
        ix.point_bus_index.push_back(net.bus_index(ev.bus));
    }

    // -- columns ------------------------------------------------------------
    ix.off_grid_ = p.num_cols();
    for (int t = 0; t < T; ++t) {
        p.add_col("pg_" + std::to_string(t), scenario.allow_export ? -kInf : 0.0, kInf,
                  profiles.tou_price[static_cast<std::size_t>(t)]);
    }
    for (int t = 0; t < T; ++t) {
        p.add_col("qg_" + std::to_string(t), -kInf, kInf);
    }

    ix.off_voltage_ = p.num_cols();
    for (int i = 0; i < n; ++i) {
        const Bus& b = net.buses[static_cast<std::size_t>(i)];
        for (int t = 0; t < T; ++t) {
            if (i == slack) {
                p.add_col(tag2("v_", i, t), 1.0, 1.0);
            } else {
                p.add_col(tag2("v_", i, t), b.vmin * b.vmin, b.vmax * b.vmax);
            }
        }
    }

    ix.off_cline_ = p.num_cols();
    for (int l = 0; l < L; ++l) {
        for (int t = 0; t < T; ++t) p.add_col(tag2("cl_", l, t), -kInf, kInf);
    }
    ix.off_sline_ = p.num_cols();
    for (int l = 0; l < L; ++l) {
        for (int t = 0; t < T; ++t) p.add_col(tag2("sl_", l, t), -kInf, kInf);
    }

    ix.off_flow_ = p.num_cols();
    static const char* kFlowStems[4] = {"pf_", "qf_", "pr_", "qr_"};
    for (int blk = 0; blk < 4; ++blk) {
        for (int l = 0; l < L; ++l) {
            for (int t = 0; t < T; ++t) p.add_col(tag2(kFlowStems[blk], l, t), -kInf, kInf);
        }
    }

    // per line-hour: 4 product-cone columns, head + 2 members of the rating
    // cone, 8 envelope slacks; the rating head is pinned to the limit
    ix.off_line_aux_ = p.num_cols();
    for (int l = 0; l < L; ++l) {
        const Branch& br = net.branches[static_cast<std::size_t>(l)];
        const bool limited = options.line_limits && std::isfinite(br.s_max);
        for (int t = 0; t < T; ++t) {
            const int w0 = p.num_cols();
            p.add_col(tag2("w0_", l, t), -kInf, kInf);
            p.add_col(tag2("w1_", l, t), -kInf, kInf);
            p.add_col(tag2("w2_", l, t), -kInf, kInf);
            p.add_col(tag2("w3_", l, t), -kInf, kInf);
            p.add_cone(ConeKind::Soc, w0, 4);
            const int m0 = p.num_cols();
            if (limited) {
                p.add_col(tag2("m0_", l, t), br.s_max, br.s_max);
                p.add_col(tag2("mp_", l, t), -kInf, kInf);
                p.add_col(tag2("mq_", l, t), -kInf, kInf);
                p.add_cone(ConeKind::Soc, m0, 3);
                for (int k = 0; k < 8; ++k) {
                    p.add_col(tag3("ms_", l, t, k), 0.0, kInf);
                }
            } else {
                // unlimited line: keep the layout, pin the whole unit to zero
                for (int k = 0; k < 11; ++k) {
                    p.add_col(tag3("mz_", l, t, k), 0.0, 0.0);
                }
            }
        }
    }

    ix.off_solar_ = p.num_cols();
    for (int s = 0; s < S; ++s) {
        for (int t = 0; t < T; ++t) {
            p.add_col(tag2("ps_", s, t), 0.0,
                      net.solar[static_cast<std::size_t>(s)].availability[static_cast<std::size_t>(t)]);
        }
    }

    int groups = 0;
    for (int e = 0; e < E; ++e) {
        const EvSpec& ev = fleet.evs[static_cast<std::size_t>(e)];
        const int J = ix.levels_per_point[static_cast<std::size_t>(e)];
        ix.point_off_.push_back(p.num_cols());
        ix.group_off_.push_back(groups);
        groups += T;
        for (int t = 0; t < T; ++t) {
            p.add_col(tag2("eE_", e, t), ev.e_min, ev.e_max);
        }
        for (int t = 0; t < T; ++t) {
            p.add_col(tag2("ePc_", e, t), 0.0, kInf);
        }
        for (int j = 0; j < J; ++j) {
            const ChargerLevel& lvl = ev.levels[static_cast<std::size_t>(j)];
            const double wear_cost = scenario.degradation_cost * kDegradationScale *
                                     lvl.deg_weight / (kWearScale * kWearScale);
            for (int t = 0; t < T; ++t) {
                p.add_col(tag3("eP_", e, j, t), 0.0, kInf);
                p.add_col(tag3("eI_", e, j, t), 0.0, 1.0, 0.0, mark_integer);
                p.add_col(tag3("eCs_", e, j, t), 0.0, kInf);
                p.add_col(tag3("eU_", e, j, t), 0.0, kInf, wear_cost);
                p.add_col(tag3("eA0_", e, j, t), -kInf, kInf);
                p.add_col(tag3("eA1_", e, j, t), -kInf, kInf);
                p.add_col(tag3("eA2_", e, j, t), -kInf, kInf);
            }
        }
        for (int t = 0; t < T; ++t) {
            p.add_col(tag2("eXs_", e, t), 0.0, kInf);
        }
    }
    ix.group_off_.push_back(groups);
    ix.n_cols_ = p.num_cols();

    // -- rows ---------------------------------------------------------------
    for (int l = 0; l < L; ++l) {
        const Branch& br = net.branches[static_cast<std::size_t>(l)];
        const int fi = net.bus_index(br.from);
        const int ti = net.bus_index(br.to);
        const double G = adm.g_off[static_cast<std::size_t>(l)];
        const double B = adm.b_off[static_cast<std::size_t>(l)];
        for (int t = 0; t < T; ++t) {
            const int cii = ix.c_bus(fi, t), cjj = ix.c_bus(ti, t);
            const int cl = ix.c_line(l, t), sl = ix.s_line(l, t);
            p.add_row(tag2("flow_p_", l, t),
                      {{ix.p_flow(l, t), 1.0}, {cii, G}, {cl, -G}, {sl, -B}}, 0.0);
            p.add_row(tag2("flow_q_", l, t),
                      {{ix.q_flow(l, t), 1.0}, {cii, -B}, {cl, B}, {sl, -G}}, 0.0);
            p.add_row(tag2("flow_pr_", l, t),
                      {{ix.p_flow_rev(l, t), 1.0}, {cjj, G}, {cl, -G}, {sl, B}}, 0.0);
            p.add_row(tag2("flow_qr_", l, t),
                      {{ix.q_flow_rev(l, t), 1.0}, {cjj, -B}, {cl, B}, {sl, G}}, 0.0);
        }
    }

    for (int l = 0; l < L; ++l) {
        const Branch& br = net.branches[static_cast<std::size_t>(l)];
        const int fi = net.bus_index(br.from);
        const int ti = net.bus_index(br.to);
        for (int t = 0; t < T; ++t) {
            const int w = ix.line_aux(l, t);
            const int cii = ix.c_bus(fi, t), cjj = ix.c_bus(ti, t);
            p.add_row(tag2("prod_w0_", l, t), {{w, 1.0}, {cii, -1.0}, {cjj, -1.0}}, 0.0);
            p.add_row(tag2("prod_w1_", l, t), {{w + 1, 1.0}, {ix.c_line(l, t), -2.0}}, 0.0);
            p.add_row(tag2("prod_w2_", l, t), {{w + 2, 1.0}, {ix.s_line(l, t), -2.0}}, 0.0);
            p.add_row(tag2("prod_w3_", l, t), {{w + 3, 1.0}, {cii, -1.0}, {cjj, 1.0}}, 0.0);
        }
    }

    for (int l = 0; l < L; ++l) {
        const Branch& br = net.branches[static_cast<std::size_t>(l)];
        if (!(options.line_limits && std::isfinite(br.s_max))) continue;
        for (int t = 0; t < T; ++t) {
            const int m0 = ix.line_aux(l, t) + 4;
            const int mp = m0 + 1, mq = m0 + 2, ms = m0 + 3;
            const int fp = ix.p_flow(l, t), fq = ix.q_flow(l, t);
            const int rp = ix.p_flow_rev(l, t), rq = ix.q_flow_rev(l, t);
            p.add_row(tag3("lim_", l, t, 0), {{mp, 1.0}, {fp, -1.0}, {ms + 0, -1.0}}, 0.0);
            p.add_row(tag3("lim_", l, t, 1), {{mp, 1.0}, {fp, 1.0}, {ms + 1, -1.0}}, 0.0);
            p.add_row(tag3("lim_", l, t, 2), {{mp, 1.0}, {rp, -1.0}, {ms + 2, -1.0}}, 0.0);
            p.add_row(tag3("lim_", l, t, 3), {{mp, 1.0}, {rp, 1.0}, {ms + 3, -1.0}}, 0.0);
            p.add_row(tag3("lim_", l, t, 4), {{mq, 1.0}, {fq, -1.0}, {ms + 4, -1.0}}, 0.0);
            p.add_row(tag3("lim_", l, t, 5), {{mq, 1.0}, {fq, 1.0}, {ms + 5, -1.0}}, 0.0);
            p.add_row(tag3("lim_", l, t, 6), {{mq, 1.0}, {rq, -1.0}, {ms + 6, -1.0}}, 0.0);
            p.add_row(tag3("lim_", l, t, 7), {{mq, 1.0}, {rq, 1.0}, {ms + 7, -1.0}}, 0.0);
        }
    }

    // adjacency and attachment tables for the balance rows
    std::vector<std::vector<std::pair<int, bool>>> bus_lines(static_cast<std::size_t>(n));
    for (int l = 0; l < L; ++l) {
        const Branch& br = net.branches[static_cast<std::size_t>(l)];
        bus_lines[static_cast<std::size_t>(net.bus_index(br.from))].push_back({l, true});
        bus_lines[static_cast<std::size_t>(net.bus_index(br.to))].push_back({l, false});
    }
    std::vector<std::vector<int>> bus_solar(static_cast<std::size_t>(n));
    for (int s = 0; s < S; ++s) {
        bus_solar[static_cast<std::size_t>(net.bus_index(net.solar[static_cast<std::size_t>(s)].bus))]
            .push_back(s);
    }
    std::vector<std::vector<int>> bus_points(static_cast<std::size_t>(n));
    for (int e = 0; e < E; ++e) {
        bus_points[static_cast<std::size_t>(net.bus_index(fleet.evs[static_cast<std::size_t>(e)].bus))]
            .push_back(e);
    }
    std::vector<std::vector<double>> bus_load_p(static_cast<std::size_t>(n),
                                                std::vector<double>(static_cast<std::size_t>(T), 0.0));
    std::vector<std::vector<double>> bus_load_q = bus_load_p;
    for (const Load& d : net.loads) {
        const std::size_t i = static_cast<std::size_t>(net.bus_index(d.bus));
        for (int t = 0; t < T; ++t) {
            bus_load_p[i][static_cast<std::size_t>(t)] += d.p_profile[static_cast<std::size_t>(t)];
            bus_load_q[i][static_cast<std::size_t>(t)] += d.q_profile[static_cast<std::size_t>(t)];
        }
    }

    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < T; ++t) {
            std::vector<std::pair<int, double>> prow, qrow;
            for (const auto& [l, forward] : bus_lines[static_cast<std::size_t>(i)]) {
                prow.push_back({forward ? ix.p_flow(l, t) : ix.p_flow_rev(l, t), 1.0});
                qrow.push_back({forward ? ix.q_flow(l, t) : ix.q_flow_rev(l, t), 1.0});
            }
            if (i == slack) {
                prow.push_back({ix.p_grid(t), -1.0});
                qrow.push_back({ix.q_grid(t), -1.0});
            }
            for (int s : bus_solar[static_cast<std::size_t>(i)]) {
                prow.push_back({ix.p_solar(s, t), -1.0});
            }
            for (int e : bus_points[static_cast<std::size_t>(i)]) {
                prow.push_back({ix.p_charge(e, t), 1.0});
            }
            p.add_row(tag2("bal_p_", i, t), prow,
                      -bus_load_p[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]);
            p.add_row(tag2("bal_q_", i, t), qrow,
                      -bus_load_q[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]);
        }
    }

    for (int e = 0; e < E; ++e) {
        const EvSpec& ev = fleet.evs[static_cast<std::size_t>(e)];
        const int J = ix.levels_per_point[static_cast<std::size_t>(e)];
        for (int t = 0; t < T; ++t) {
            std::vector<std::pair<int, double>> sum_row{{ix.p_charge(e, t), -1.0}};
            for (int j = 0; j < J; ++j) sum_row.push_back({ix.p_charge_level(e, j, t), 1.0});
            p.add_row(tag2("ev_sum_", e, t), sum_row, 0.0);
        }
        for (int t = 0; t < T; ++t) {
            std::vector<std::pair<int, double>> exc_row{{ix.excl_slack(e, t), 1.0}};
            for (int j = 0; j < J; ++j) exc_row.push_back({ix.indicator(e, j, t), 1.0});
            p.add_row(tag2("ev_exc_", e, t), exc_row, 1.0);
        }
        for (int t = 0; t < T; ++t) {
            const int prev = (t == 0) ? T - 1 : t - 1;
            const double travel = ev.p_travel[static_cast<std::size_t>(t)] *
                                  fleet.profiles.r_discharge[static_cast<std::size_t>(t)] / ev.eta_d;
            p.add_row(tag2("ev_eng_", e, t),
                      {{ix.energy(e, t), 1.0},
                       {ix.energy(e, prev), -1.0},
                       {ix.p_charge(e, t), -ev.eta_c}},
                      -travel);
        }
        for (int j = 0; j < J; ++j) {
            const double rating = ev.levels[static_cast<std::size_t>(j)].p_max;
            for (int t = 0; t < T; ++t) {
                const double cap = rating * fleet.profiles.r_charge[static_cast<std::size_t>(t)];
                p.add_row(tag3("ev_cap_", e, j, t),
                          {{ix.p_charge_level(e, j, t), 1.0},
                           {ix.indicator(e, j, t), -cap},
                           {ix.level_unit(e, j, t) + 2, 1.0}},
                          0.0);
            }
        }
        for (int j = 0; j < J; ++j) {
            for (int t = 0; t < T; ++t) {
                epigraph_quadratic(p, ix.p_charge_level(e, j, t), ix.wear(e, j, t),
                                   ix.level_unit(e, j, t) + 4, kWearScale);
            }
        }
    }

    if (!options.fix_levels.empty()) {
        for (int e = 0; e < E; ++e) {
            for (int t = 0; t < T; ++t) {
                append_group_fix(p, ix, e, t,
                                 options.fix_levels[static_cast<std::size_t>(e)]
                                                   [static_cast<std::size_t>(t)]);
            }
        }
    }

    p.validate();
    return out;
}

std::string ProgramCensus::to_text() const {
    std::ostringstream s;
    s << "cols: " << cols << "\n";
    s << "rows: " << rows << "\n";
    s << "cones_4d: " << cones_4d << "\n";
    s << "cones_3d: " << cones_3d << "\n";
    s << "integer_cols: " << integer_cols << "\n";
    s << "sos1_groups: " << sos1_groups << "\n";
    s << "col_grid: " << col_grid << "\n";
    s << "col_voltage: " << col_voltage << "\n";
    s << "col_line: " << col_line << "\n";
    s << "col_flow: " << col_flow << "\n";
    s << "col_line_aux: " << col_line_aux << "\n";
    s << "col_solar: " << col_solar << "\n";
    s << "col_fleet: " << col_fleet << "\n";
    s << "row_flow_def: " << row_flow_def << "\n";
    s << "row_cone_def: " << row_cone_def << "\n";
    s << "row_line_limit: " << row_line_limit << "\n";
    s << "row_balance: " << row_balance << "\n";
    s << "row_fleet: " << row_fleet << "\n";
    s << "row_fix: " << row_fix << "\n";
    return s.str();
}

ProgramCensus census(const BuiltProblem& built) {
    const ConicProgram& p = built.program;
    const VariableIndex& ix = built.index;
    ProgramCensus c;
    c.cols = p.num_cols();
    c.rows = p.num_rows();
    for (const ConeSlice& cone : p.cones) {
        if (cone.dim == 4) ++c.cones_4d;
        if (cone.dim == 3) ++c.cones_3d;
    }
    for (std::uint8_t m : p.integer_marks) c.integer_cols += m;
    c.sos1_groups = ix.num_groups();

    c.col_grid = 2 * ix.horizon;
    c.col_voltage = ix.n_buses * ix.horizon;
    c.col_line = 2 * ix.n_lines * ix.horizon;
    c.col_flow = 4 * ix.n_lines * ix.horizon;
    c.col_line_aux = 15 * ix.n_lines * ix.horizon;
    c.col_solar = ix.n_solar * ix.horizon;
    c.col_fleet = c.cols - c.col_grid - c.col_voltage - c.col_line - c.col_flow -
                  c.col_line_aux - c.col_solar;

    for (const std::string& name : p.row_names) {
        if (name.rfind("flow_", 0) == 0) {
            ++c.row_flow_def;
        } else if (name.rfind("prod_", 0) == 0) {
            ++c.row_cone_def;
        } else if (name.rfind("lim_", 0) == 0) {
            ++c.row_line_limit;
        } else if (name.rfind("bal_", 0) == 0) {
            ++c.row_balance;
        } else if (name.rfind("ev_", 0) == 0 || name.rfind("epi_", 0) == 0) {
            ++c.row_fleet;
        } else if (name.rfind("fix_", 0) == 0) {
            ++c.row_fix;
        }
    }
    return c;
}

} // namespace evopf
