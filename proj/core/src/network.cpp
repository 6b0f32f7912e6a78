#include "evopf/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace evopf {

int NetworkCase::bus_index(BusId id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == id) return static_cast<int>(i);
    }
    throw InputError("unknown bus id " + std::to_string(id) + " in case '" + name + "'");
}

BusId NetworkCase::slack_bus() const {
    BusId found = -1;
    int count = 0;
    for (const Bus& b : buses) {
        if (b.is_slack) {
            found = b.id;
            ++count;
        }
    }
    if (count != 1) {
        throw InputError("case '" + name + "' must declare exactly one slack bus, found " +
                         std::to_string(count));
    }
    return found;
}

void NetworkCase::validate() const {
    if (buses.empty()) throw ValidationError("case has no buses");
    if (horizon <= 0) throw ValidationError("horizon must be positive");

    std::unordered_map<BusId, int> seen;
    for (const Bus& b : buses) {
        if (!(b.vmin > 0.0 && b.vmin < b.vmax)) {
            throw ValidationError("bus " + std::to_string(b.id) + ": need 0 < vmin < vmax");
        }
        if (!seen.emplace(b.id, 1).second) {
            throw ValidationError("duplicate bus id " + std::to_string(b.id));
        }
    }
    slack_bus();

    for (const Branch& br : branches) {
        if (!seen.count(br.from) || !seen.count(br.to)) {
            throw ValidationError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                             " references an unknown bus");
        }
        if (br.from == br.to) throw ValidationError("branch endpoints must differ");
        if (br.r < 0.0) throw ValidationError("branch resistance must be nonnegative");
        if (br.r == 0.0 && br.x == 0.0) {
            throw ValidationError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                             " has zero impedance");
        }
        if (!(br.s_max > 0.0)) throw ValidationError("branch apparent power limit must be positive");
    }
    for (const Load& d : loads) {
        if (!seen.count(d.bus)) {
            throw ValidationError("load references unknown bus " + std::to_string(d.bus));
        }
        if (static_cast<int>(d.p_profile.size()) != horizon ||
            static_cast<int>(d.q_profile.size()) != horizon) {
            throw ValidationError("load at bus " + std::to_string(d.bus) +
                             ": profile length must equal horizon");
        }
        for (double p : d.p_profile) {
            if (p < 0.0) throw ValidationError("real load must be nonnegative");
        }
    }
    for (const SolarUnit& s : solar) {
        if (!seen.count(s.bus)) {
            throw ValidationError("solar unit references unknown bus " + std::to_string(s.bus));
        }
        if (static_cast<int>(s.availability.size()) != horizon) {
            throw ValidationError("solar availability length must equal horizon");
        }
        for (double a : s.availability) {
            if (a < 0.0) throw ValidationError("solar availability must be nonnegative");
        }
    }
}

AdmittanceView build_admittance(const std::vector<Branch>& branches, int n_buses,
                                const std::vector<BusId>& bus_ids) {
    if (static_cast<int>(bus_ids.size()) != n_buses) {
        throw InputError("bus id list does not match bus count");
    }
    std::unordered_map<BusId, int> index;
    for (int i = 0; i < n_buses; ++i) index.emplace(bus_ids[i], i);

    AdmittanceView adm;
    adm.g_off.resize(branches.size());
    adm.b_off.resize(branches.size());
    adm.g_diag.assign(n_buses, 0.0);
    adm.b_diag.assign(n_buses, 0.0);
    adm.adjacent_branches.assign(n_buses, {});

    for (std::size_t k = 0; k < branches.size(); ++k) {
        const Branch& br = branches[k];
        auto fi = index.find(br.from);
        auto ti = index.find(br.to);
        if (fi == index.end() || ti == index.end()) {
            throw InputError("branch endpoint out of range");
        }
        const double z2 = br.r * br.r + br.x * br.x;
        if (z2 <= 0.0) {
            throw InputError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                             " has zero impedance");
        }
        // series admittance y = 1/(r+jx); off-diagonal element is -y
        adm.g_off[k] = -br.r / z2;
        adm.b_off[k] = br.x / z2;
        // diagonals are negated row sums (no shunt terms)
        adm.g_diag[fi->second] -= adm.g_off[k];
        adm.g_diag[ti->second] -= adm.g_off[k];
        adm.b_diag[fi->second] -= adm.b_off[k];
        adm.b_diag[ti->second] -= adm.b_off[k];
        adm.adjacent_branches[fi->second].push_back(static_cast<int>(k));
        adm.adjacent_branches[ti->second].push_back(static_cast<int>(k));
    }
    for (auto& lst : adm.adjacent_branches) std::sort(lst.begin(), lst.end());
    return adm;
}

AdmittanceView build_admittance(const NetworkCase& net) {
    std::vector<BusId> ids;
    ids.reserve(net.buses.size());
    for (const Bus& b : net.buses) ids.push_back(b.id);
    return build_admittance(net.branches, static_cast<int>(net.buses.size()), ids);
}

double AdmittanceView::g_diag_plus_row(int bus_index) const {
    double acc = g_diag[bus_index];
    for (int k : adjacent_branches[bus_index]) acc += g_off[k];
    return acc;
}

double AdmittanceView::b_diag_plus_row(int bus_index) const {
    double acc = b_diag[bus_index];
    for (int k : adjacent_branches[bus_index]) acc += b_off[k];
    return acc;
}

namespace {

std::vector<std::vector<std::pair<int, int>>> adjacency(const NetworkCase& net) {
    // per dense bus index: (neighbor index, branch index)
    std::vector<std::vector<std::pair<int, int>>> adj(net.buses.size());
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        int f = net.bus_index(net.branches[k].from);
        int t = net.bus_index(net.branches[k].to);
        adj[f].emplace_back(t, static_cast<int>(k));
        adj[t].emplace_back(f, static_cast<int>(k));
    }
    return adj;
}

} // namespace

bool check_radial(const NetworkCase& net) {
    const int n = static_cast<int>(net.buses.size());
    if (n == 0) throw InputError("case has no buses");
    auto adj = adjacency(net);

    std::vector<char> visited(n, 0);
    std::deque<int> queue{0};
    visited[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (auto [v, k] : adj[u]) {
            (void)k;
            if (!visited[v]) {
                visited[v] = 1;
                ++reached;
                queue.push_back(v);
            }
        }
    }
    if (reached != n) {
        throw DisconnectedError("network is disconnected: reached " + std::to_string(reached) +
                                " of " + std::to_string(n) + " buses");
    }
    return static_cast<int>(net.branches.size()) == n - 1;
}

std::vector<BusId> neighbors(const NetworkCase& net, BusId bus) {
    int bi = net.bus_index(bus);
    auto adj = adjacency(net);
    std::vector<BusId> out;
    out.reserve(adj[bi].size());
    for (auto [v, k] : adj[bi]) {
        (void)k;
        out.push_back(net.buses[v].id);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RootedTree root_at_slack(const NetworkCase& net) {
    if (!check_radial(net)) {
        throw NonRadialError("network is not radial; cannot root a tree");
    }
    const int n = static_cast<int>(net.buses.size());
    auto adj = adjacency(net);
    for (auto& lst : adj) std::sort(lst.begin(), lst.end());

    RootedTree tree;
    tree.parent.assign(n, -1);
    tree.parent_branch.assign(n, -1);
    tree.bfs_order.clear();
    tree.bfs_order.reserve(n);

    const int root = net.bus_index(net.slack_bus());
    std::vector<char> visited(n, 0);
    std::deque<int> queue{root};
    visited[root] = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        tree.bfs_order.push_back(u);
        for (auto [v, k] : adj[u]) {
            if (!visited[v]) {
                visited[v] = 1;
                tree.parent[v] = u;
                tree.parent_branch[v] = k;
                queue.push_back(v);
            }
        }
    }
    return tree;
}

} // namespace evopf
