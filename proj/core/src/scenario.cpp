#include "evopf/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "CLI11.hpp"

#include "evopf/cli.hpp"
#include "evopf/problem.hpp"

namespace evopf {

namespace {

std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Level id per charging point. "combined" alternates by bus id parity, which
/// puts the even-numbered focus bus 18 on the fast charger; an explicit list
/// is "bus=level,...,*=level" with "*" as the fallback.
std::vector<std::string> charger_assignment(const std::string& mix, const FleetSpec& spec,
                                            const std::vector<int>& buses) {
    std::vector<std::string> out(buses.size());
    if (mix == "combined") {
        (void)spec.level_by_id("fast");
        (void)spec.level_by_id("level2");
        for (std::size_t i = 0; i < buses.size(); ++i) {
            out[i] = buses[i] % 2 == 0 ? "fast" : "level2";
        }
        return out;
    }
    if (mix.find('=') == std::string::npos) {
        (void)spec.level_by_id(mix);
        std::fill(out.begin(), out.end(), mix);
        return out;
    }

    std::map<int, std::string> per_bus;
    std::string fallback;
    std::stringstream entries(mix);
    std::string entry;
    while (std::getline(entries, entry, ',')) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
            throw InputError("charger mix entry '" + entry + "' is not bus=level");
        }
        const std::string key = entry.substr(0, eq);
        const std::string level = entry.substr(eq + 1);
        (void)spec.level_by_id(level);
        if (key == "*") {
            fallback = level;
            continue;
        }
        int bus = 0;
        const auto res = std::from_chars(key.data(), key.data() + key.size(), bus);
        if (res.ec != std::errc{} || res.ptr != key.data() + key.size()) {
            throw InputError("charger mix entry '" + entry + "' names a malformed bus");
        }
        if (std::find(buses.begin(), buses.end(), bus) == buses.end()) {
            throw InputError("charger mix names bus " + key + " which hosts no charging point");
        }
        per_bus[bus] = level;
    }
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const auto it = per_bus.find(buses[i]);
        if (it != per_bus.end()) {
            out[i] = it->second;
        } else if (!fallback.empty()) {
            out[i] = fallback;
        } else {
            throw InputError("charger mix leaves bus " + std::to_string(buses[i]) +
                             " unassigned");
        }
    }
    return out;
}

} // namespace

Scenario assemble_scenario(const NetworkCase& base_case, const ProfileSet& profiles,
                           const FleetSpec& fleet_spec, const ScenarioConfig& config) {
    base_case.validate();
    profiles.validate(base_case.horizon);
    fleet_spec.validate();
    config.validate();

    Scenario s;
    s.config = config;
    s.profiles = profiles;
    s.net = base_case;
    const int T = s.net.horizon;

    double load_energy = 0.0;
    for (Load& load : s.net.loads) {
        for (int t = 0; t < T; ++t) {
            load.p_profile[static_cast<std::size_t>(t)] *=
                profiles.demand_shape[static_cast<std::size_t>(t)];
            load.q_profile[static_cast<std::size_t>(t)] *=
                profiles.demand_shape[static_cast<std::size_t>(t)];
            load_energy += load.p_profile[static_cast<std::size_t>(t)];
        }
    }

    // Solar peaks sized so available energy over the horizon hits the
    // penetration target, split equally across the case's solar buses.
    double shape_energy = 0.0;
    for (double v : profiles.solar_shape) shape_energy += v;
    if (s.net.solar.empty()) {
        if (config.solar_penetration > 0.0) {
            throw InputError("solar penetration requested but the case has no solar buses");
        }
    } else {
        if (config.solar_penetration > 0.0 && shape_energy <= 0.0) {
            throw InputError("solar penetration requested but the solar shape is all zero");
        }
        const double peak =
            shape_energy > 0.0 ? config.solar_penetration * load_energy /
                                     (static_cast<double>(s.net.solar.size()) * shape_energy)
                               : 0.0;
        for (SolarUnit& unit : s.net.solar) {
            unit.availability.assign(static_cast<std::size_t>(T), 0.0);
            for (int t = 0; t < T; ++t) {
                unit.availability[static_cast<std::size_t>(t)] =
                    peak * profiles.solar_shape[static_cast<std::size_t>(t)];
            }
        }
    }

    // Vehicles aggregate into one equivalent battery per point: energy and
    // power scale with the count, the quadratic wear weight divides by it so
    // the per-vehicle wear term is preserved.
    s.fleet.profiles.r_charge = profiles.r_charge;
    s.fleet.profiles.r_discharge = profiles.r_discharge;
    const double per_point =
        config.evs_per_point > 0.0 ? config.evs_per_point : fleet_spec.evs_per_point;
    const double n_eff = per_point * config.ev_penetration;

    std::vector<int> buses = fleet_spec.point_buses;
    if (buses.empty()) {
        std::set<int> seen;
        for (const Load& load : s.net.loads) seen.insert(load.bus);
        buses.assign(seen.begin(), seen.end());
    }
    const std::vector<std::string> levels =
        charger_assignment(config.charger_mix, fleet_spec, buses);
    for (std::size_t i = 0; i < buses.size(); ++i) {
        EvSpec ev;
        ev.bus = buses[i];
        ev.e_min = fleet_spec.e_min * n_eff;
        ev.e_max = fleet_spec.e_max * n_eff;
        ev.eta_c = fleet_spec.eta_c;
        ev.eta_d = fleet_spec.eta_d;
        const ChargerLevel& lvl = fleet_spec.level_by_id(levels[i]);
        ev.levels = {{lvl.id, lvl.p_max * n_eff, lvl.deg_weight / n_eff}};
        ev.p_travel.assign(static_cast<std::size_t>(T), 0.0);
        for (int t = 0; t < T; ++t) {
            ev.p_travel[static_cast<std::size_t>(t)] =
                profiles.p_travel[static_cast<std::size_t>(t)] * n_eff;
        }
        s.fleet.evs.push_back(std::move(ev));
    }
    s.fleet.validate(T);
    return s;
}

StudySpec StudySpec::charging_levels(const ScenarioConfig& base) {
    StudySpec spec;
    spec.kind = StudyKind::ChargingLevels;
    for (const char* mix : {"fast", "combined", "level2"}) {
        ScenarioConfig v = base;
        v.name = mix;
        v.charger_mix = mix;
        spec.variants.push_back(std::move(v));
    }
    return spec;
}

StudySpec StudySpec::solar_penetration(const ScenarioConfig& base) {
    StudySpec spec;
    spec.kind = StudyKind::SolarPenetration;
    const std::pair<const char*, double> points[] = {
        {"solar05", 0.05}, {"solar10", 0.10}, {"solar20", 0.20}};
    for (const auto& [name, pen] : points) {
        ScenarioConfig v = base;
        v.name = name;
        v.solar_penetration = pen;
        spec.variants.push_back(std::move(v));
    }
    return spec;
}

StudySpec StudySpec::degradation_cost(const ScenarioConfig& base) {
    StudySpec spec;
    spec.kind = StudyKind::DegradationCost;
    const std::pair<const char*, double> points[] = {
        {"cd005", 0.05}, {"cd025", 0.25}, {"cd100", 1.0}};
    for (const auto& [name, cd] : points) {
        ScenarioConfig v = base;
        v.name = name;
        v.degradation_cost = cd;
        spec.variants.push_back(std::move(v));
    }
    return spec;
}

StudySpec StudySpec::named(const std::string& kind_name, const ScenarioConfig& base) {
    if (kind_name == "charging-levels") return charging_levels(base);
    if (kind_name == "solar-penetration") return solar_penetration(base);
    if (kind_name == "degradation-cost") return degradation_cost(base);
    throw InputError("unknown study '" + kind_name +
                     "' (expected charging-levels, solar-penetration or degradation-cost)");
}

void apply_preset(const std::string& preset, BnBSettings& bnb, ScenarioConfig& config,
                  FleetSpec& fleet_spec) {
    (void)config;
    if (preset == "desk") {
        bnb.rel_gap_tol = 1e-3;
    } else if (preset == "desk-reduced") {
        bnb.rel_gap_tol = 1e-3;
        fleet_spec.point_buses = {3, 6, 9, 13, 18, 22, 25, 30};
    } else {
        throw InputError("unknown preset '" + preset + "'");
    }
}

std::string ComparisonTable::to_csv() const {
    std::ostringstream out;
    out << "variant,status,total_cost,energy_cost,degradation_cost,peak_injection,"
           "focus_hours_below,gap,nodes";
    for (int bus : bus_ids) out << ",below_" << bus;
    out << "\n";
    for (const ComparisonRow& row : rows) {
        out << row.variant << ',' << row.status << ',';
        if (row.hours_below.empty()) {
            // failed variant: headline cells stay empty rather than fake zeros
            out << ",,,,," << row.nodes;
            for (std::size_t i = 0; i < bus_ids.size(); ++i) out << ',';
        } else {
            out << num(row.total_cost) << ',' << num(row.energy_cost) << ','
                << num(row.degradation_cost) << ',' << num(row.peak_injection) << ','
                << row.focus_hours_below << ',' << num(row.gap) << ',' << row.nodes;
            for (int below : row.hours_below) out << ',' << below;
        }
        out << "\n";
    }
    return out.str();
}

namespace {

ScenarioReport make_report(const Scenario& sc, const VariableIndex& idx, const MipOutcome& mip,
                           const LiftedSolution& sol, const QualityReport& quality) {
    ScenarioReport rep;
    rep.scenario_name = sc.config.name;
    rep.horizon = sc.net.horizon;
    rep.bus_ids = quality.bus_ids;
    rep.voltage = quality.voltage;
    rep.grid_p = quality.grid_p;
    rep.grid_q = quality.grid_q;
    rep.hours_below = quality.hours_below;
    rep.voltage_threshold = quality.threshold;
    rep.total_cost = quality.total_cost;
    rep.energy_cost = quality.energy_cost;
    rep.degradation_cost = quality.degradation_cost;
    rep.max_exactness_residual = quality.max_exactness;
    rep.mip_gap = mip.gap;
    rep.nodes = mip.nodes;
    rep.solve_status = to_string(mip.status);
    rep.focus_bus = sc.config.focus_bus;

    const int T = sc.net.horizon;
    for (std::size_t e = 0; e < sc.fleet.evs.size(); ++e) {
        const EvSpec& ev = sc.fleet.evs[e];
        rep.point_buses.push_back(ev.bus);
        std::vector<double> draw(static_cast<std::size_t>(T), 0.0);
        std::vector<std::string> choice(static_cast<std::size_t>(T), "-");
        for (int t = 0; t < T; ++t) {
            draw[static_cast<std::size_t>(t)] =
                sol.at(idx.p_charge(static_cast<int>(e), t));
            const int g = idx.group_id(static_cast<int>(e), t);
            if (g < static_cast<int>(mip.decisions.size())) {
                const int d = mip.decisions[static_cast<std::size_t>(g)];
                if (d >= 0) choice[static_cast<std::size_t>(t)] =
                    ev.levels[static_cast<std::size_t>(d)].id;
            }
        }
        rep.charging.push_back(std::move(draw));
        rep.level_choice.push_back(std::move(choice));
    }
    return rep;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f << content;
}

void write_variant_outputs(const ScenarioReport& rep, const QualityReport& quality,
                           const std::string& dir) {
    write_report(rep, dir);
    if (rep.horizon < 2) return;
    const auto focus = std::find(rep.bus_ids.begin(), rep.bus_ids.end(), rep.focus_bus);
    if (focus != rep.bus_ids.end()) {
        const std::size_t i = static_cast<std::size_t>(focus - rep.bus_ids.begin());
        const std::string label = "bus " + std::to_string(rep.focus_bus);
        write_text_file(std::filesystem::path(dir) / "voltage_focus.svg",
                        svg_line_chart("voltage, " + label + " (p.u.)", {label},
                                       {quality.voltage[i]}));
    }
    write_text_file(std::filesystem::path(dir) / "grid_injection.svg",
                    svg_line_chart("grid injection (p.u.)", {"P", "Q"},
                                   {quality.grid_p, quality.grid_q}));
}

} // namespace

ComparisonTable run_study(const StudySpec& spec, const NetworkCase& base_case,
                          const ProfileSet& profiles, const FleetSpec& fleet_spec,
                          const StudySettings& settings, std::vector<VariantResult>* results) {
    if (spec.variants.empty()) throw ValidationError("a study needs at least one variant");

    ComparisonTable table;
    for (const Bus& bus : base_case.buses) table.bus_ids.push_back(bus.id);

    for (const ScenarioConfig& variant : spec.variants) {
        VariantResult vr;
        vr.config = variant;
        ComparisonRow row;
        row.variant = variant.name;
        try {
            BnBSettings bnb = settings.bnb;
            ScenarioConfig cfg = variant;
            FleetSpec fs = fleet_spec;
            if (!settings.preset.empty()) apply_preset(settings.preset, bnb, cfg, fs);

            Scenario sc = assemble_scenario(base_case, profiles, fs, cfg);
            BuiltProblem built = build(sc.net, sc.profiles, sc.fleet, sc.config);
            MipOutcome mip = solve_mip(built, bnb, settings.solver);
            row.gap = mip.gap;
            row.nodes = mip.nodes;
            row.status = to_string(mip.status);

            if (mip.status == MipStatus::Infeasible) {
                vr.error = "scenario is infeasible";
                vr.error_kind = "infeasible";
            } else if (mip.x.empty()) {
                vr.error = "no incumbent within the node or time limit";
                vr.error_kind = "limit";
            } else {
                LiftedSolution sol;
                sol.x = mip.x;
                sol.index = built.index;
                split_objective(built.program, sol, sc.profiles);

                const ConstraintCheck check = check_constraints(sol, sc.net, sc.fleet);
                if (check.worst() > 1e-6) {
                    throw NumericalError("incumbent fails post-checks, worst residual " +
                                         num(check.worst()));
                }
                RecoveredPhasors phasors = recover_phasors(sol, sc.net);
                QualityReport quality = quality_metrics(sol, phasors, sc.net);
                ScenarioReport rep = make_report(sc, built.index, mip, sol, quality);

                row.total_cost = quality.total_cost;
                row.energy_cost = quality.energy_cost;
                row.degradation_cost = quality.degradation_cost;
                if (!quality.grid_p.empty()) {
                    row.peak_injection =
                        *std::max_element(quality.grid_p.begin(), quality.grid_p.end());
                }
                row.hours_below = quality.hours_below;
                const auto focus = std::find(quality.bus_ids.begin(), quality.bus_ids.end(),
                                             cfg.focus_bus);
                if (focus != quality.bus_ids.end()) {
                    row.focus_hours_below = quality.hours_below[static_cast<std::size_t>(
                        focus - quality.bus_ids.begin())];
                }

                if (!settings.out_dir.empty()) {
                    const std::filesystem::path dir =
                        std::filesystem::path(settings.out_dir) / cfg.name;
                    write_variant_outputs(rep, quality, dir.string());
                }
                vr.solved = true;
                vr.mip = std::move(mip);
                vr.solution = std::move(sol);
                vr.quality = std::move(quality);
                vr.report = std::move(rep);
            }
        } catch (const InputError& e) {
            row.status = "error";
            vr.error = e.what();
            vr.error_kind = "input";
        } catch (const ValidationError& e) {
            row.status = "error";
            vr.error = e.what();
            vr.error_kind = "input";
        } catch (const NonRadialError& e) {
            row.status = "error";
            vr.error = e.what();
            vr.error_kind = "input";
        } catch (const DisconnectedError& e) {
            row.status = "error";
            vr.error = e.what();
            vr.error_kind = "input";
        } catch (const EnumerationLimitError& e) {
            row.status = "error";
            vr.error = e.what();
            vr.error_kind = "input";
        } catch (const Error& e) {
            row.status = "error";
            vr.error = e.what();
            vr.error_kind = "solver";
        } catch (const std::exception& e) {
            row.status = "error";
            vr.error = e.what();
            vr.error_kind = "internal";
        }
        table.rows.push_back(std::move(row));
        if (results != nullptr) results->push_back(std::move(vr));
    }

    if (!settings.out_dir.empty()) {
        std::filesystem::create_directories(settings.out_dir);
        write_text_file(std::filesystem::path(settings.out_dir) / "comparison.csv",
                        table.to_csv());
    }
    return table;
}

namespace {

/// Compact fingerprint tying a solution file to the case it was solved on.
std::string case_digest(const NetworkCase& net) {
    return net.name + "|" + std::to_string(net.buses.size()) + "|" +
           std::to_string(net.branches.size()) + "|" + std::to_string(net.horizon);
}

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolver = 4;
constexpr int kExitValidation = 5;
constexpr int kExitInternal = 6;

int exit_code_for(const std::string& error_kind) {
    if (error_kind.empty()) return kExitOk;
    if (error_kind == "infeasible") return kExitInfeasible;
    if (error_kind == "input") return kExitInput;
    if (error_kind == "internal") return kExitInternal;
    return kExitSolver; // "limit" and "solver"
}

/// Most actionable code first: internal bugs, then bad inputs, then solver
/// trouble, then a legitimate infeasibility verdict.
int combine_exit_codes(const std::vector<int>& codes) {
    const int order[] = {kExitInternal, kExitInput, kExitSolver, kExitInfeasible};
    for (int severe : order) {
        if (std::find(codes.begin(), codes.end(), severe) != codes.end()) return severe;
    }
    return kExitOk;
}

struct CliOptions {
    std::string case_path;
    std::string profiles_path;
    std::string fleet_path;
    std::string out_dir;
    std::string preset = "desk";
    std::string name = "base";
    std::string mix;
    double solar = -1.0;
    double deg_cost = -1.0;
    double ev_pen = -1.0;
    double gap = 0.0;
    double time_limit = 0.0;
    int threads = 1;
    bool allow_export = false;
    bool seedless = false;
};

void add_shared_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--case", opt.case_path, "network case file")->required();
    cmd->add_option("--profiles", opt.profiles_path, "hourly profile table")->required();
    cmd->add_option("--fleet", opt.fleet_path, "fleet definition file")->required();
    cmd->add_option("--preset", opt.preset, "settings preset: desk or desk-reduced");
    cmd->add_option("--mix", opt.mix, "charger mix: level id, combined, or bus=level list");
    cmd->add_option("--solar", opt.solar, "solar penetration in [0,1]");
    cmd->add_option("--deg-cost", opt.deg_cost, "battery wear coefficient");
    cmd->add_option("--ev-pen", opt.ev_pen, "participating fraction of the fleet");
    cmd->add_flag("--allow-export", opt.allow_export, "permit negative grid injection");
}

void add_solve_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--out", opt.out_dir, "directory for reports and plots");
    cmd->add_option("--gap", opt.gap, "relative optimality gap target");
    cmd->add_option("--time-limit", opt.time_limit, "search time limit, seconds");
    cmd->add_option("--threads", opt.threads, "parallel node evaluations");
    cmd->add_flag("--seedless", opt.seedless, "run twice and require identical tables");
}

ScenarioConfig config_from(const CliOptions& opt) {
    ScenarioConfig cfg;
    cfg.name = opt.name;
    if (!opt.mix.empty()) cfg.charger_mix = opt.mix;
    if (opt.solar >= 0.0) cfg.solar_penetration = opt.solar;
    if (opt.deg_cost >= 0.0) cfg.degradation_cost = opt.deg_cost;
    if (opt.ev_pen >= 0.0) cfg.ev_penetration = opt.ev_pen;
    cfg.allow_export = opt.allow_export;
    return cfg;
}

struct LoadedInputs {
    NetworkCase net;
    ProfileSet profiles;
    FleetSpec fleet;
};

LoadedInputs load_inputs(const CliOptions& opt) {
    LoadedInputs in;
    in.net = load_case(opt.case_path);
    in.profiles = load_profiles(opt.profiles_path, in.net.horizon);
    in.fleet = load_fleet(opt.fleet_path);
    return in;
}

StudySettings settings_from(const CliOptions& opt, BnBSettings bnb) {
    StudySettings st;
    st.bnb = std::move(bnb);
    st.preset = ""; // preset already applied by the caller
    st.out_dir = opt.out_dir;
    return st;
}

int run_solve(const CliOptions& opt) {
    LoadedInputs in = load_inputs(opt);
    ScenarioConfig cfg = config_from(opt);
    BnBSettings bnb;
    apply_preset(opt.preset, bnb, cfg, in.fleet);
    if (opt.gap > 0.0) bnb.rel_gap_tol = opt.gap;
    if (opt.time_limit > 0.0) bnb.time_limit_sec = opt.time_limit;
    bnb.workers = opt.threads;
    bnb.log = [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };

    StudySpec spec;
    spec.kind = StudyKind::Custom;
    spec.variants = {cfg};
    std::vector<VariantResult> results;
    ComparisonTable table =
        run_study(spec, in.net, in.profiles, in.fleet, settings_from(opt, bnb), &results);

    const VariantResult& vr = results.front();
    if (!vr.solved) {
        std::fprintf(stderr, "error: %s\n", vr.error.c_str());
        return exit_code_for(vr.error_kind);
    }
    const ScenarioReport& rep = vr.report;
    std::printf("scenario: %s\n", rep.scenario_name.c_str());
    std::printf("status: %s\n", rep.solve_status.c_str());
    std::printf("objective: %s\n", num(rep.total_cost).c_str());
    std::printf("energy_cost: %s\n", num(rep.energy_cost).c_str());
    std::printf("degradation_cost: %s\n", num(rep.degradation_cost).c_str());
    std::printf("gap: %s\n", num(rep.mip_gap).c_str());
    std::printf("nodes: %ld\n", rep.nodes);
    std::printf("max_exactness: %s\n", num(rep.max_exactness_residual).c_str());
    std::printf("focus_bus: %d\n", rep.focus_bus);
    std::printf("focus_hours_below: %d\n", table.rows.front().focus_hours_below);

    if (!opt.out_dir.empty()) {
        SolutionFile sf;
        sf.case_digest = case_digest(in.net);
        sf.config = vr.config;
        sf.status = to_string(vr.mip.status);
        sf.objective = vr.mip.objective;
        sf.bound = vr.mip.bound;
        sf.gap = vr.mip.gap;
        sf.nodes = vr.mip.nodes;
        sf.x = vr.mip.x;
        const std::filesystem::path path =
            std::filesystem::path(opt.out_dir) / cfg.name / "solution.json";
        save_solution(sf, path.string());
        std::printf("solution: %s\n", path.string().c_str());
    }
    return kExitOk;
}

int run_study_cmd(const CliOptions& opt, const std::string& study_name) {
    LoadedInputs in = load_inputs(opt);
    ScenarioConfig base = config_from(opt);
    BnBSettings bnb;
    apply_preset(opt.preset, bnb, base, in.fleet);
    if (opt.gap > 0.0) bnb.rel_gap_tol = opt.gap;
    if (opt.time_limit > 0.0) bnb.time_limit_sec = opt.time_limit;
    bnb.workers = opt.threads;
    bnb.log = [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };

    const StudySpec spec = StudySpec::named(study_name, base);
    std::vector<VariantResult> results;
    ComparisonTable table =
        run_study(spec, in.net, in.profiles, in.fleet, settings_from(opt, bnb), &results);

    if (opt.seedless) {
        StudySettings repeat = settings_from(opt, bnb);
        repeat.out_dir.clear(); // in-memory comparison only
        const ComparisonTable again =
            run_study(spec, in.net, in.profiles, in.fleet, repeat, nullptr);
        if (again.to_csv() != table.to_csv()) {
            std::fprintf(stderr, "error: repeated study produced a different table\n");
            return kExitInternal;
        }
    }

    std::fputs(table.to_csv().c_str(), stdout);
    std::vector<int> codes;
    for (const VariantResult& vr : results) {
        if (!vr.error.empty()) {
            std::fprintf(stderr, "variant %s: %s\n", vr.config.name.c_str(), vr.error.c_str());
        }
        codes.push_back(exit_code_for(vr.error_kind));
    }
    return combine_exit_codes(codes);
}

int run_validate(const CliOptions& opt, const std::string& solution_path) {
    LoadedInputs in = load_inputs(opt);
    const SolutionFile sf = load_solution(solution_path);
    if (sf.case_digest != case_digest(in.net)) {
        std::fprintf(stderr, "validate: solution was produced for a different case (%s)\n",
                     sf.case_digest.c_str());
        return kExitValidation;
    }

    FleetSpec fs = in.fleet;
    BnBSettings bnb_unused;
    ScenarioConfig cfg = sf.config;
    apply_preset(opt.preset, bnb_unused, cfg, fs);
    const Scenario sc = assemble_scenario(in.net, in.profiles, fs, cfg);
    const BuiltProblem built = build(sc.net, sc.profiles, sc.fleet, sc.config);
    if (sf.x.size() != static_cast<std::size_t>(built.index.num_cols())) {
        std::fprintf(stderr, "validate: solution has %zu columns, the program has %d\n",
                     sf.x.size(), built.index.num_cols());
        return kExitValidation;
    }

    LiftedSolution sol;
    sol.x = sf.x;
    sol.index = built.index;
    split_objective(built.program, sol, sc.profiles);
    bool ok = true;
    if (std::abs(sol.objective - sf.objective) >
        1e-6 * std::max(1.0, std::abs(sf.objective))) {
        std::fprintf(stderr, "validate: stored objective %s, recomputed %s\n",
                     num(sf.objective).c_str(), num(sol.objective).c_str());
        ok = false;
    }
    const ConstraintCheck check = check_constraints(sol, sc.net, sc.fleet);
    if (check.worst() > 1e-6) {
        std::fprintf(stderr, "validate: constraint residual %s exceeds 1e-6\n",
                     num(check.worst()).c_str());
        ok = false;
    }
    if (ok) {
        const RecoveredPhasors phasors = recover_phasors(sol, sc.net);
        const AcResidualReport ac = validate_ac(phasors, sol, sc.net);
        if (std::max(ac.max_flow, ac.max_balance) > 1e-6) {
            std::fprintf(stderr, "validate: recovered-phasor residual %s exceeds 1e-6\n",
                         num(std::max(ac.max_flow, ac.max_balance)).c_str());
            ok = false;
        }
    }
    if (!ok) return kExitValidation;
    std::printf("solution checks out: objective %s, status %s\n", num(sf.objective).c_str(),
                sf.status.c_str());
    return kExitOk;
}

int run_census(const CliOptions& opt) {
    LoadedInputs in = load_inputs(opt);
    ScenarioConfig cfg = config_from(opt);
    BnBSettings bnb_unused;
    apply_preset(opt.preset, bnb_unused, cfg, in.fleet);
    const Scenario sc = assemble_scenario(in.net, in.profiles, in.fleet, cfg);
    const BuiltProblem built = build(sc.net, sc.profiles, sc.fleet, sc.config);
    std::fputs(census(built).to_text().c_str(), stdout);
    return kExitOk;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CliOptions opt;
    std::string study_name;
    std::string solution_path;

    CLI::App app{"multi-period optimal charging on radial distribution networks"};
    app.require_subcommand(1);

    CLI::App* solve_cmd = app.add_subcommand("solve", "optimize one scenario");
    add_shared_options(solve_cmd, opt);
    add_solve_options(solve_cmd, opt);
    solve_cmd->add_option("--name", opt.name, "scenario name used in outputs");

    CLI::App* study_cmd = app.add_subcommand("study", "run a named comparison study");
    add_shared_options(study_cmd, opt);
    add_solve_options(study_cmd, opt);
    study_cmd
        ->add_option("--study", study_name,
                     "charging-levels, solar-penetration or degradation-cost")
        ->required();

    CLI::App* validate_cmd = app.add_subcommand("validate", "re-check a saved solution");
    add_shared_options(validate_cmd, opt);
    validate_cmd->add_option("--solution", solution_path, "solution file from solve")
        ->required();

    CLI::App* census_cmd = app.add_subcommand("census", "print the program's block counts");
    add_shared_options(census_cmd, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(opt);
        if (study_cmd->parsed()) return run_study_cmd(opt, study_name);
        if (validate_cmd->parsed()) return run_validate(opt, solution_path);
        if (census_cmd->parsed()) return run_census(opt);
        return kExitInput;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const RecoveryRefusedError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolver;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolver;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
}

} // namespace evopf
