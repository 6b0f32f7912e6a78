#include "evopf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace evopf {

namespace {

// Shortest representation that parses back to the same double; both
// directions go through charconv, so no locale is consulted anywhere.
std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, const std::string& where) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    bool negative = false;
    if (first != last && (*first == '+' || *first == '-')) {
        negative = (*first == '-');
        ++first;
    }
    // from_chars has no leading-sign handling for '+' and parses "inf"
    std::from_chars_result res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw InputError(where + ": cannot parse number '" + tok + "'");
    }
    return negative ? -v : v;
}

int parse_int(const std::string& tok, const std::string& where) {
    int v = 0;
    std::from_chars_result res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw InputError(where + ": cannot parse integer '" + tok + "'");
    }
    return v;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    for (char c : line) {
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            if (!tok.empty()) out.push_back(std::move(tok));
            tok.clear();
        } else {
            tok.push_back(c);
        }
    }
    if (!tok.empty()) out.push_back(std::move(tok));
    return out;
}

struct SectionFile {
    // header key/value pairs before the first section, in file order
    std::vector<std::pair<std::string, std::string>> header;
    // section name -> token rows
    std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> sections;

    const std::vector<std::vector<std::string>>* find(const std::string& name) const {
        for (const auto& s : sections) {
            if (s.first == name) return &s.second;
        }
        return nullptr;
    }
    std::string header_value(const std::string& key, const std::string& fallback = "") const {
        for (const auto& kv : header) {
            if (kv.first == key) return kv.second;
        }
        return fallback;
    }
};

SectionFile read_sections(const std::string& path, const std::string& magic) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    SectionFile file;
    std::string line;
    std::vector<std::vector<std::string>>* current = nullptr;
    bool saw_magic = false;
    while (std::getline(in, line)) {
        std::vector<std::string> toks = tokenize(line);
        if (toks.empty()) continue;
        if (!saw_magic) {
            if (toks.size() != 2 || toks[0] != magic || toks[1] != "v1") {
                throw InputError(path + ": expected leading '" + magic + " v1' line");
            }
            saw_magic = true;
            continue;
        }
        if (toks.size() == 1 && toks[0].size() >= 2 && toks[0].front() == '[' &&
            toks[0].back() == ']') {
            file.sections.push_back({toks[0].substr(1, toks[0].size() - 2), {}});
            current = &file.sections.back().second;
            continue;
        }
        if (current == nullptr) {
            if (toks.size() < 2) throw InputError(path + ": malformed header line '" + line + "'");
            std::string value = toks[1];
            for (std::size_t i = 2; i < toks.size(); ++i) value += " " + toks[i];
            file.header.push_back({toks[0], value});
        } else {
            current->push_back(std::move(toks));
        }
    }
    if (!saw_magic) throw InputError(path + ": empty file");
    return file;
}

// Constant form of a load/solar row: exactly `count` values after the bus id.
std::vector<double> parse_profile_tail(const std::vector<std::string>& toks, std::size_t start,
                                       std::size_t count, const std::string& where) {
    if (toks.size() != start + count) {
        throw InputError(where + ": expected " + std::to_string(count) + " values, got " +
                         std::to_string(toks.size() - start));
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(parse_double(toks[start + k], where));
    }
    return out;
}

bool is_constant(const std::vector<double>& v) {
    for (double x : v) {
        if (x != v.front()) return false;
    }
    return !v.empty();
}

} // namespace

NetworkCase load_case(const std::string& path, bool* radial) {
    SectionFile file = read_sections(path, "case");
    NetworkCase net;
    net.name = file.header_value("name", "unnamed");
    net.s_base_mva = parse_double(file.header_value("s_base_mva", "100"), path);
    net.v_base_kv = parse_double(file.header_value("v_base_kv", "12.66"), path);
    net.horizon = parse_int(file.header_value("horizon", "24"), path);
    if (net.horizon <= 0) throw InputError(path + ": horizon must be positive");
    const std::size_t T = static_cast<std::size_t>(net.horizon);

    const auto* buses = file.find("buses");
    if (buses == nullptr) throw InputError(path + ": missing [buses] section");
    for (const auto& row : *buses) {
        if (row.size() != 4) throw InputError(path + ": bus rows need 'id vmin vmax slack'");
        Bus b;
        b.id = parse_int(row[0], path);
        b.vmin = parse_double(row[1], path);
        b.vmax = parse_double(row[2], path);
        b.is_slack = parse_int(row[3], path) != 0;
        net.buses.push_back(b);
    }

    if (const auto* branches = file.find("branches")) {
        for (const auto& row : *branches) {
            if (row.size() != 5) {
                throw InputError(path + ": branch rows need 'from to r x s_max'");
            }
            Branch br;
            br.from = parse_int(row[0], path);
            br.to = parse_int(row[1], path);
            br.r = parse_double(row[2], path);
            br.x = parse_double(row[3], path);
            br.s_max = parse_double(row[4], path);
            net.branches.push_back(br);
        }
    }

    if (const auto* loads = file.find("loads")) {
        for (const auto& row : *loads) {
            Load d;
            d.bus = parse_int(row[0], path);
            if (row.size() >= 2 && row[1] == "profile") {
                if (row.size() != 2 + 2 * T) {
                    throw InputError(path + ": load profile rows need 2*horizon values");
                }
                for (std::size_t t = 0; t < T; ++t) {
                    d.p_profile.push_back(parse_double(row[2 + t], path));
                }
                for (std::size_t t = 0; t < T; ++t) {
                    d.q_profile.push_back(parse_double(row[2 + T + t], path));
                }
            } else {
                std::vector<double> pq = parse_profile_tail(row, 1, 2, path);
                d.p_profile.assign(T, pq[0]);
                d.q_profile.assign(T, pq[1]);
            }
            net.loads.push_back(std::move(d));
        }
    }

    if (const auto* solar = file.find("solar")) {
        for (const auto& row : *solar) {
            SolarUnit s;
            s.bus = parse_int(row[0], path);
            if (row.size() >= 2 && row[1] == "profile") {
                if (row.size() != 2 + T) {
                    throw InputError(path + ": solar profile rows need horizon values");
                }
                for (std::size_t t = 0; t < T; ++t) {
                    s.availability.push_back(parse_double(row[2 + t], path));
                }
            } else {
                std::vector<double> a = parse_profile_tail(row, 1, 1, path);
                s.availability.assign(T, a[0]);
            }
            net.solar.push_back(std::move(s));
        }
    }

    net.validate();
    bool is_radial = true;
    if (!net.branches.empty() || net.buses.size() > 1) {
        is_radial = check_radial(net); // disconnected stays fatal
    }
    if (radial != nullptr) *radial = is_radial;
    return net;
}

void write_case(const NetworkCase& net, const std::string& path) {
    std::ostringstream out;
    out << "case v1\n";
    out << "name " << net.name << "\n";
    out << "s_base_mva " << num(net.s_base_mva) << "\n";
    out << "v_base_kv " << num(net.v_base_kv) << "\n";
    out << "horizon " << net.horizon << "\n";
    out << "\n[buses]\n";
    for (const Bus& b : net.buses) {
        out << b.id << " " << num(b.vmin) << " " << num(b.vmax) << " " << (b.is_slack ? 1 : 0)
            << "\n";
    }
    out << "\n[branches]\n";
    for (const Branch& br : net.branches) {
        out << br.from << " " << br.to << " " << num(br.r) << " " << num(br.x) << " "
            << num(br.s_max) << "\n";
    }
    out << "\n[loads]\n";
    for (const Load& d : net.loads) {
        if (is_constant(d.p_profile) && is_constant(d.q_profile)) {
            out << d.bus << " " << num(d.p_profile[0]) << " " << num(d.q_profile[0]) << "\n";
        } else {
            out << d.bus << " profile";
            for (double v : d.p_profile) out << " " << num(v);
            for (double v : d.q_profile) out << " " << num(v);
            out << "\n";
        }
    }
    out << "\n[solar]\n";
    for (const SolarUnit& s : net.solar) {
        if (is_constant(s.availability)) {
            out << s.bus << " " << num(s.availability[0]) << "\n";
        } else {
            out << s.bus << " profile";
            for (double v : s.availability) out << " " << num(v);
            out << "\n";
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << out.str();
}

void ProfileSet::validate(int expected_horizon) const {
    const std::size_t T = static_cast<std::size_t>(expected_horizon);
    if (tou_price.size() != T || demand_shape.size() != T || solar_shape.size() != T ||
        r_charge.size() != T || r_discharge.size() != T || p_travel.size() != T) {
        throw ValidationError("profile columns must all have length " +
                              std::to_string(expected_horizon));
    }
    for (std::size_t t = 0; t < T; ++t) {
        if (!(tou_price[t] >= 0.0)) throw ValidationError("tou_price must be nonnegative");
        if (!(demand_shape[t] >= 0.0) || !(solar_shape[t] >= 0.0)) {
            throw ValidationError("shapes must be nonnegative");
        }
        const double rc = r_charge[t], rd = r_discharge[t];
        if (!(rc >= 0.0 && rc <= 1.0) || !(rd >= 0.0 && rd <= 1.0)) {
            throw ValidationError("availability ratios must lie in [0,1]");
        }
        if (rc + rd > 1.0 + 1e-12) {
            throw ValidationError("hour " + std::to_string(t) +
                                  ": charge and travel ratios sum to more than 1");
        }
        if (!(p_travel[t] >= 0.0)) throw ValidationError("p_travel must be nonnegative");
    }
}

ProfileSet load_profiles(const std::string& path, int horizon) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string expected = "hour,tou_price,demand_shape,solar_shape,r_charge,r_discharge,p_travel";
    if (line != expected) {
        throw InputError(path + ": header must be '" + expected + "'");
    }
    ProfileSet p;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell.push_back(c);
            }
        }
        cells.push_back(cell);
        if (cells.size() != 7) throw InputError(path + ": rows need 7 columns");
        if (parse_int(cells[0], path) != row) {
            throw InputError(path + ": hours must run 0.." + std::to_string(horizon - 1) +
                             " in order");
        }
        p.tou_price.push_back(parse_double(cells[1], path));
        p.demand_shape.push_back(parse_double(cells[2], path));
        p.solar_shape.push_back(parse_double(cells[3], path));
        p.r_charge.push_back(parse_double(cells[4], path));
        p.r_discharge.push_back(parse_double(cells[5], path));
        p.p_travel.push_back(parse_double(cells[6], path));
        ++row;
    }
    if (row != horizon) {
        throw InputError(path + ": expected " + std::to_string(horizon) + " rows, got " +
                         std::to_string(row));
    }
    p.validate(horizon);
    return p;
}

void FleetSpec::validate() const {
    if (levels.empty()) throw ValidationError("fleet needs at least one charger level");
    for (std::size_t j = 0; j < levels.size(); ++j) {
        if (levels[j].id.empty()) throw ValidationError("charger level ids must be nonempty");
        if (!(levels[j].p_max > 0.0)) throw ValidationError("charger p_max must be positive");
        if (levels[j].deg_weight < 0.0) throw ValidationError("level weight must be nonnegative");
        if (j > 0 && !(levels[j].p_max < levels[j - 1].p_max)) {
            throw ValidationError("charger levels must be strictly ordered by p_max, descending");
        }
    }
    if (!(evs_per_point > 0.0)) throw ValidationError("evs_per_point must be positive");
    if (!(e_min >= 0.0 && e_min < e_max)) throw ValidationError("need 0 <= e_min < e_max");
    if (!(eta_c > 0.0 && eta_c <= 1.0)) throw ValidationError("eta_c out of (0,1]");
    if (!(eta_d > 0.0 && eta_d <= 1.0)) throw ValidationError("eta_d out of (0,1]");
}

const ChargerLevel& FleetSpec::level_by_id(const std::string& id) const {
    for (const ChargerLevel& lvl : levels) {
        if (lvl.id == id) return lvl;
    }
    throw InputError("unknown charger level '" + id + "'");
}

FleetSpec load_fleet(const std::string& path) {
    SectionFile file = read_sections(path, "fleet");
    FleetSpec spec;
    spec.evs_per_point = parse_double(file.header_value("evs_per_point", "10"), path);
    spec.e_min = parse_double(file.header_value("e_min", "0"), path);
    spec.e_max = parse_double(file.header_value("e_max", "0"), path);
    spec.eta_c = parse_double(file.header_value("eta_c", "1"), path);
    spec.eta_d = parse_double(file.header_value("eta_d", "1"), path);

    const auto* levels = file.find("levels");
    if (levels == nullptr) throw InputError(path + ": missing [levels] section");
    for (const auto& row : *levels) {
        if (row.size() != 3) throw InputError(path + ": level rows need 'id p_max weight'");
        ChargerLevel lvl;
        lvl.id = row[0];
        lvl.p_max = parse_double(row[1], path);
        lvl.deg_weight = parse_double(row[2], path);
        spec.levels.push_back(std::move(lvl));
    }
    if (const auto* points = file.find("points")) {
        for (const auto& row : *points) {
            for (const std::string& tok : row) {
                spec.point_buses.push_back(parse_int(tok, path));
            }
        }
    }
    spec.validate();
    return spec;
}

void ScenarioConfig::validate() const {
    if (name.empty()) throw ValidationError("scenario name must be nonempty");
    if (charger_mix.empty()) throw ValidationError("charger_mix must be nonempty");
    if (!(solar_penetration >= 0.0 && solar_penetration <= 1.0)) {
        throw ValidationError("solar_penetration must lie in [0,1]");
    }
    if (!(degradation_cost >= 0.0)) throw ValidationError("degradation_cost must be nonnegative");
    if (!(ev_penetration > 0.0 && ev_penetration <= 1.0)) {
        throw ValidationError("ev_penetration must lie in (0,1]");
    }
    if (evs_per_point < 0.0) throw ValidationError("evs_per_point override must be nonnegative");
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InputError("cannot write '" + p.string() + "'");
    f << content;
}

} // namespace

std::vector<std::string> write_report(const ScenarioReport& report, const std::string& dir) {
    if (report.horizon <= 0) throw InputError("report has an empty horizon");
    if (report.bus_ids.size() != report.voltage.size() ||
        report.bus_ids.size() != report.hours_below.size()) {
        throw InputError("report bus tables are inconsistent");
    }
    std::filesystem::path base(dir);
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    if (ec) throw InputError("cannot create directory '" + dir + "'");

    std::vector<std::string> manifest;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file(base / name, content);
        manifest.push_back(name);
    };

    {
        std::ostringstream out;
        out << "hour";
        for (int id : report.bus_ids) out << ",bus_" << id;
        out << "\n";
        for (int t = 0; t < report.horizon; ++t) {
            out << t;
            for (std::size_t i = 0; i < report.bus_ids.size(); ++i) {
                out << "," << num(report.voltage[i][static_cast<std::size_t>(t)]);
            }
            out << "\n";
        }
        emit("voltage.csv", out.str());
    }
    {
        int focus_pos = -1;
        for (std::size_t i = 0; i < report.bus_ids.size(); ++i) {
            if (report.bus_ids[i] == report.focus_bus) focus_pos = static_cast<int>(i);
        }
        if (focus_pos >= 0) {
            std::ostringstream out;
            out << "hour,voltage\n";
            for (int t = 0; t < report.horizon; ++t) {
                out << t << ","
                    << num(report.voltage[static_cast<std::size_t>(focus_pos)]
                                         [static_cast<std::size_t>(t)])
                    << "\n";
            }
            emit("voltage_h" + std::to_string(report.focus_bus) + ".csv", out.str());
        }
    }
    {
        std::ostringstream out;
        out << "hour";
        for (int b : report.point_buses) out << ",point_" << b;
        out << "\n";
        for (int t = 0; t < report.horizon; ++t) {
            out << t;
            for (const auto& series : report.charging) {
                out << "," << num(series[static_cast<std::size_t>(t)]);
            }
            out << "\n";
        }
        emit("charging.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "hour";
        for (int b : report.point_buses) out << ",point_" << b;
        out << "\n";
        for (int t = 0; t < report.horizon; ++t) {
            out << t;
            for (const auto& series : report.level_choice) {
                out << "," << series[static_cast<std::size_t>(t)];
            }
            out << "\n";
        }
        emit("levels.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "hour,p_injection,q_injection\n";
        for (int t = 0; t < report.horizon; ++t) {
            out << t << "," << num(report.grid_p[static_cast<std::size_t>(t)]) << ","
                << num(report.grid_q[static_cast<std::size_t>(t)]) << "\n";
        }
        emit("grid_injection.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "component,value\n";
        out << "total_cost," << num(report.total_cost) << "\n";
        out << "energy_cost," << num(report.energy_cost) << "\n";
        out << "degradation_cost," << num(report.degradation_cost) << "\n";
        out << "mip_gap," << num(report.mip_gap) << "\n";
        out << "nodes," << report.nodes << "\n";
        out << "status," << report.solve_status << "\n";
        out << "max_exactness_residual," << num(report.max_exactness_residual) << "\n";
        emit("costs.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "bus,hours_below_" << num(report.voltage_threshold) << "\n";
        for (std::size_t i = 0; i < report.bus_ids.size(); ++i) {
            out << report.bus_ids[i] << "," << report.hours_below[i] << "\n";
        }
        emit("violations.csv", out.str());
    }
    return manifest;
}

void save_solution(const SolutionFile& sol, const std::string& path) {
    nlohmann::json j;
    j["format"] = "evopf-solution-v1";
    j["case_digest"] = sol.case_digest;
    j["config"] = {
        {"name", sol.config.name},
        {"charger_mix", sol.config.charger_mix},
        {"solar_penetration", sol.config.solar_penetration},
        {"degradation_cost", sol.config.degradation_cost},
        {"ev_penetration", sol.config.ev_penetration},
        {"evs_per_point", sol.config.evs_per_point},
        {"allow_export", sol.config.allow_export},
        {"focus_bus", sol.config.focus_bus},
    };
    j["status"] = sol.status;
    j["objective"] = sol.objective;
    j["bound"] = sol.bound;
    j["gap"] = sol.gap;
    j["nodes"] = sol.nodes;
    j["x"] = sol.x;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << j.dump(1, '\t') << "\n";
}

SolutionFile load_solution(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "evopf-solution-v1") {
            throw InputError(path + ": unknown solution format");
        }
        SolutionFile sol;
        sol.case_digest = j.at("case_digest").get<std::string>();
        const nlohmann::json& c = j.at("config");
        sol.config.name = c.at("name").get<std::string>();
        sol.config.charger_mix = c.at("charger_mix").get<std::string>();
        sol.config.solar_penetration = c.at("solar_penetration").get<double>();
        sol.config.degradation_cost = c.at("degradation_cost").get<double>();
        sol.config.ev_penetration = c.at("ev_penetration").get<double>();
        sol.config.evs_per_point = c.at("evs_per_point").get<double>();
        sol.config.allow_export = c.at("allow_export").get<bool>();
        sol.config.focus_bus = c.at("focus_bus").get<int>();
        sol.status = j.at("status").get<std::string>();
        sol.objective = j.at("objective").get<double>();
        sol.bound = j.at("bound").get<double>();
        sol.gap = j.at("gap").get<double>();
        sol.nodes = j.at("nodes").get<long>();
        sol.x = j.at("x").get<std::vector<double>>();
        return sol;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

} // namespace evopf
