#include "evopf/branch_bound.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>
#include <utility>

#include "evopf/errors.hpp"

namespace evopf {

std::string to_string(MipStatus status) {
    switch (status) {
    case MipStatus::OptimalWithinGap: return "optimal-within-gap";
    case MipStatus::Infeasible: return "infeasible";
    case MipStatus::LimitReached: return "limit-reached";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nodes evaluated per wave. Fixed so the explored tree is the same for every
/// worker count; workers only split one wave's solves.
constexpr int kWaveSize = 8;

/// Distance of the group's worst indicator from the nearest integer.
double group_fractionality(const VariableIndex& idx, const std::vector<double>& x, int e, int t) {
    double worst = 0.0;
    for (int j = 0; j < idx.levels_per_point[static_cast<std::size_t>(e)]; ++j) {
        const double v = x[static_cast<std::size_t>(idx.indicator(e, j, t))];
        worst = std::max(worst, std::min(std::abs(v), std::abs(1.0 - v)));
    }
    return worst;
}

/// Reads one decision per group off an integral point: the dominant level, or
/// idle when no indicator reaches one half.
std::vector<int> read_decisions(const VariableIndex& idx, const std::vector<double>& x) {
    std::vector<int> out(static_cast<std::size_t>(idx.num_groups()), BnBNode::kIdle);
    for (int g = 0; g < idx.num_groups(); ++g) {
        int e = 0;
        int t = 0;
        idx.group_location(g, e, t);
        int best = BnBNode::kIdle;
        double best_val = 0.5;
        for (int j = 0; j < idx.levels_per_point[static_cast<std::size_t>(e)]; ++j) {
            const double v = x[static_cast<std::size_t>(idx.indicator(e, j, t))];
            if (v > best_val) {
                best_val = v;
                best = j;
            }
        }
        out[static_cast<std::size_t>(g)] = best;
    }
    return out;
}

/// The relaxed root plus equality rows pinning every decided group.
ConicProgram fixed_program(const ConicProgram& relaxed_root, const VariableIndex& idx,
                           const std::vector<int>& decision) {
    ConicProgram prog = relaxed_root;
    for (int g = 0; g < idx.num_groups(); ++g) {
        const int d = decision[static_cast<std::size_t>(g)];
        if (d == BnBNode::kUndecided) continue;
        int e = 0;
        int t = 0;
        idx.group_location(g, e, t);
        append_group_fix(prog, idx, e, t, d);
    }
    return prog;
}

} // namespace

std::vector<BnBNode> branch_sos1(const BnBNode& node, const VariableIndex& idx,
                                 const std::vector<double>& relaxed_x, double integrality_tol) {
    const int n_groups = idx.num_groups();
    if (n_groups == 0) throw InputError("no exclusivity groups to branch on");
    if (relaxed_x.size() != static_cast<std::size_t>(idx.num_cols()))
        throw InputError("relaxed point has the wrong number of columns");
    std::vector<int> decision = node.decision;
    if (decision.empty())
        decision.assign(static_cast<std::size_t>(n_groups), BnBNode::kUndecided);
    if (decision.size() != static_cast<std::size_t>(n_groups))
        throw InputError("node decision vector has the wrong number of groups");

    int g_best = -1;
    double f_best = integrality_tol; // strict comparison keeps the lowest group id on ties
    for (int g = 0; g < n_groups; ++g) {
        if (decision[static_cast<std::size_t>(g)] != BnBNode::kUndecided) continue;
        int e = 0;
        int t = 0;
        idx.group_location(g, e, t);
        const double f = group_fractionality(idx, relaxed_x, e, t);
        if (f > f_best) {
            f_best = f;
            g_best = g;
        }
    }
    if (g_best < 0) throw InputError("every exclusivity group is already integral");

    int e = 0;
    int t = 0;
    idx.group_location(g_best, e, t);
    const int n_levels = idx.levels_per_point[static_cast<std::size_t>(e)];
    std::vector<BnBNode> children;
    children.reserve(static_cast<std::size_t>(n_levels) + 1);
    for (int d = 0; d <= n_levels; ++d) {
        BnBNode child;
        child.decision = decision;
        child.decision[static_cast<std::size_t>(g_best)] = d < n_levels ? d : BnBNode::kIdle;
        child.parent_bound = node.parent_bound;
        child.depth = node.depth + 1;
        children.push_back(std::move(child));
    }
    return children;
}

std::vector<int> round_heuristic(const VariableIndex& idx, const std::vector<double>& relaxed_x) {
    if (relaxed_x.size() != static_cast<std::size_t>(idx.num_cols()))
        throw InputError("relaxed point has the wrong number of columns");
    std::vector<int> out(static_cast<std::size_t>(idx.num_groups()), BnBNode::kIdle);
    for (int g = 0; g < idx.num_groups(); ++g) {
        int e = 0;
        int t = 0;
        idx.group_location(g, e, t);
        double mass = 0.0;
        double best_val = 0.0;
        int best = 0;
        for (int j = 0; j < idx.levels_per_point[static_cast<std::size_t>(e)]; ++j) {
            const double v = relaxed_x[static_cast<std::size_t>(idx.indicator(e, j, t))];
            mass += v;
            if (v > best_val) {
                best_val = v;
                best = j;
            }
        }
        // The level holding a strict majority of the group's indicator mass is
        // activated; groups without meaningful mass stay idle.
        if (best_val > 0.5 * mass && best_val > 1e-9) out[static_cast<std::size_t>(g)] = best;
    }
    return out;
}

MipOutcome solve_mip(const BuiltProblem& built, const BnBSettings& bnb,
                     const SolverSettings& solver) {
    if (!(bnb.integrality_tol > 0.0) || !(bnb.rel_gap_tol > 0.0))
        throw ValidationError("branch-and-bound tolerances must be positive");
    if (bnb.node_limit < 1) throw ValidationError("node limit must be at least 1");
    if (!(bnb.time_limit_sec > 0.0)) throw ValidationError("time limit must be positive");
    if (bnb.workers < 1) throw ValidationError("worker count must be at least 1");

    const VariableIndex& idx = built.index;
    const int n_groups = idx.num_groups();
    const bool marked =
        std::any_of(built.program.integer_marks.begin(), built.program.integer_marks.end(),
                    [](unsigned char m) { return m != 0; });

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    auto emit = [&bnb](long nodes, std::size_t open, double bound, double incumbent, double gap) {
        if (!bnb.log) return;
        char line[192];
        std::snprintf(line, sizeof line, "nodes=%ld open=%zu bound=%.9g incumbent=%.9g gap=%.9g",
                      nodes, open, bound, incumbent, gap);
        bnb.log(line);
    };

    MipOutcome out;

    // No marks means every group is already pinned by equality rows (or there
    // is no fleet): the program is one plain conic solve.
    if (!marked) {
        SolveOutcome one = solve(built.program, solver);
        out.nodes = 1;
        if (one.status == SolveStatus::Optimal) {
            out.status = MipStatus::OptimalWithinGap;
            out.objective = one.objective;
            out.bound = one.objective;
            out.gap = 0.0;
            if (n_groups > 0) out.decisions = read_decisions(idx, one.x);
            out.x = std::move(one.x);
            emit(out.nodes, 0, out.bound, out.objective, out.gap);
        } else if (one.status == SolveStatus::PrimalInfeasible) {
            out.status = MipStatus::Infeasible;
            out.bound = kInf;
            emit(out.nodes, 0, out.bound, kInf, out.gap);
        } else if (one.status == SolveStatus::DualInfeasible) {
            throw NumericalError("continuous relaxation is unbounded");
        } else {
            throw NumericalError("conic solve failed: " + to_string(one.status));
        }
        return out;
    }

    ConicProgram root = built.program;
    std::fill(root.integer_marks.begin(), root.integer_marks.end(), 0);

    struct Open {
        BnBNode node;
        long id = 0;
    };
    std::vector<Open> open;
    long next_id = 0;
    long nodes_solved = 0;
    long waves = 0;
    bool hit_limit = false;

    bool have_incumbent = false;
    bool incumbent_fixed = false; // came from a fixed-group solve, indicators exact
    double inc_obj = kInf;
    std::vector<double> inc_x;
    std::vector<int> inc_dec;

    {
        Open root_open;
        root_open.node.decision.assign(static_cast<std::size_t>(n_groups), BnBNode::kUndecided);
        root_open.id = next_id++;
        open.push_back(std::move(root_open));
    }

    // Subtrees whose bound cannot beat the incumbent by more than the gap
    // tolerance are pruned; whatever survives keeps the final gap certified.
    auto cutoff = [&] {
        if (!have_incumbent) return kInf;
        return inc_obj - bnb.rel_gap_tol * std::max(1.0, std::abs(inc_obj));
    };
    auto try_incumbent = [&](double obj, std::vector<double>&& x, std::vector<int>&& dec,
                             bool fixed) {
        if (have_incumbent && obj >= inc_obj) return;
        have_incumbent = true;
        incumbent_fixed = fixed;
        inc_obj = obj;
        inc_x = std::move(x);
        inc_dec = std::move(dec);
    };
    auto heuristic = [&](const std::vector<double>& relaxed_x) {
        std::vector<int> dec = round_heuristic(idx, relaxed_x);
        SolveOutcome repaired = solve(fixed_program(root, idx, dec), solver);
        if (repaired.status == SolveStatus::Optimal)
            try_incumbent(repaired.objective, std::move(repaired.x), std::move(dec), true);
    };

    while (!open.empty()) {
        if (nodes_solved >= bnb.node_limit || elapsed() >= bnb.time_limit_sec) {
            hit_limit = true;
            break;
        }
        const double cut = cutoff();
        open.erase(std::remove_if(open.begin(), open.end(),
                                  [cut](const Open& o) { return o.node.parent_bound >= cut; }),
                   open.end());
        if (open.empty()) break;

        std::vector<std::size_t> order(open.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (have_incumbent) {
            std::sort(order.begin(), order.end(), [&open](std::size_t a, std::size_t b) {
                if (open[a].node.parent_bound != open[b].node.parent_bound)
                    return open[a].node.parent_bound < open[b].node.parent_bound;
                return open[a].id < open[b].id;
            });
        } else {
            // Plunge toward a first incumbent: deepest nodes first.
            std::sort(order.begin(), order.end(), [&open](std::size_t a, std::size_t b) {
                if (open[a].node.depth != open[b].node.depth)
                    return open[a].node.depth > open[b].node.depth;
                return open[a].id < open[b].id;
            });
        }

        const long budget = bnb.node_limit - nodes_solved;
        const std::size_t wave_n = static_cast<std::size_t>(std::min<long>(
            std::min<long>(kWaveSize, static_cast<long>(open.size())), budget));
        std::vector<Open> wave;
        wave.reserve(wave_n);
        std::vector<char> taken(open.size(), 0);
        for (std::size_t i = 0; i < wave_n; ++i) {
            wave.push_back(std::move(open[order[i]]));
            taken[order[i]] = 1;
        }
        std::size_t kept = 0;
        for (std::size_t i = 0; i < open.size(); ++i)
            if (!taken[i]) open[kept++] = std::move(open[i]);
        open.resize(kept);

        std::vector<SolveOutcome> results(wave.size());
        const int n_threads =
            static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(bnb.workers),
                                                   wave.size()));
        if (n_threads <= 1) {
            for (std::size_t i = 0; i < wave.size(); ++i)
                results[i] = solve(fixed_program(root, idx, wave[i].node.decision), solver);
        } else {
            std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(n_threads));
            for (int k = 0; k < n_threads; ++k) {
                pool.emplace_back([&, k] {
                    try {
                        for (std::size_t i = static_cast<std::size_t>(k); i < wave.size();
                             i += static_cast<std::size_t>(n_threads))
                            results[i] =
                                solve(fixed_program(root, idx, wave[i].node.decision), solver);
                    } catch (...) {
                        errors[static_cast<std::size_t>(k)] = std::current_exception();
                    }
                });
            }
            for (std::thread& th : pool) th.join();
            for (const std::exception_ptr& err : errors)
                if (err) std::rethrow_exception(err);
        }
        nodes_solved += static_cast<long>(wave.size());
        ++waves;

        // Results apply in wave order, so the incumbent and the child ids do
        // not depend on which worker finished first.
        bool ran_heuristic = false;
        for (std::size_t i = 0; i < wave.size(); ++i) {
            const BnBNode& node = wave[i].node;
            SolveOutcome& res = results[i];
            if (res.status == SolveStatus::PrimalInfeasible) continue;
            if (res.status == SolveStatus::DualInfeasible)
                throw NumericalError("continuous relaxation is unbounded");
            if (res.status != SolveStatus::Optimal) {
                // No usable bound. Splitting the lowest undecided group keeps
                // the partition exact and the children better conditioned; a
                // fully decided node that will not solve is fatal.
                int g_split = -1;
                for (int g = 0; g < n_groups; ++g) {
                    if (node.decision[static_cast<std::size_t>(g)] == BnBNode::kUndecided) {
                        g_split = g;
                        break;
                    }
                }
                if (g_split < 0)
                    throw NumericalError("fixed-group relaxation failed: " +
                                         to_string(res.status));
                int e = 0;
                int t = 0;
                idx.group_location(g_split, e, t);
                const int n_levels = idx.levels_per_point[static_cast<std::size_t>(e)];
                for (int d = 0; d <= n_levels; ++d) {
                    Open child;
                    child.node = node;
                    child.node.decision[static_cast<std::size_t>(g_split)] =
                        d < n_levels ? d : BnBNode::kIdle;
                    child.node.depth = node.depth + 1;
                    child.id = next_id++;
                    open.push_back(std::move(child));
                }
                continue;
            }

            assert(res.objective >=
                   node.parent_bound - 1e-6 * std::max(1.0, std::abs(node.parent_bound)));
            const double bound = std::max(res.objective, node.parent_bound);
            if (bound >= cutoff()) continue;

            double worst = 0.0;
            for (int g = 0; g < n_groups && worst <= bnb.integrality_tol; ++g) {
                int e = 0;
                int t = 0;
                idx.group_location(g, e, t);
                worst = std::max(worst, group_fractionality(idx, res.x, e, t));
            }
            if (worst <= bnb.integrality_tol) {
                std::vector<int> dec = read_decisions(idx, res.x);
                try_incumbent(res.objective, std::move(res.x), std::move(dec), false);
                continue;
            }

            std::vector<BnBNode> children = branch_sos1(node, idx, res.x, bnb.integrality_tol);
            for (BnBNode& child : children) {
                Open o;
                o.node = std::move(child);
                o.node.parent_bound = bound;
                o.id = next_id++;
                open.push_back(std::move(o));
            }
            if (!ran_heuristic && (!have_incumbent || waves % 4 == 1)) {
                ran_heuristic = true;
                heuristic(res.x);
            }
        }

        double bound_now = kInf;
        for (const Open& o : open) bound_now = std::min(bound_now, o.node.parent_bound);
        if (open.empty()) bound_now = have_incumbent ? inc_obj : kInf;
        const double gap_now =
            have_incumbent
                ? std::max(0.0, (inc_obj - bound_now) / std::max(1.0, std::abs(inc_obj)))
                : kInf;
        emit(nodes_solved, open.size(), bound_now, have_incumbent ? inc_obj : kInf, gap_now);
    }

    double bound_final;
    if (!open.empty()) {
        bound_final = kInf;
        for (const Open& o : open) bound_final = std::min(bound_final, o.node.parent_bound);
        if (have_incumbent) bound_final = std::min(bound_final, inc_obj);
    } else {
        bound_final = have_incumbent ? inc_obj : kInf;
    }

    // An incumbent taken from an integral relaxation carries solver-tolerance
    // indicators; one fixed-group resolve pins them exactly.
    if (have_incumbent && !incumbent_fixed) {
        SolveOutcome fin = solve(fixed_program(root, idx, inc_dec), solver);
        if (fin.status == SolveStatus::Optimal) {
            inc_obj = fin.objective;
            inc_x = std::move(fin.x);
        }
    }

    out.nodes = nodes_solved;
    if (have_incumbent) {
        out.objective = inc_obj;
        out.x = std::move(inc_x);
        out.decisions = std::move(inc_dec);
        out.bound = std::min(bound_final, inc_obj);
        out.gap = std::max(0.0, (inc_obj - out.bound) / std::max(1.0, std::abs(inc_obj)));
        out.status = !hit_limit || out.gap <= bnb.rel_gap_tol ? MipStatus::OptimalWithinGap
                                                              : MipStatus::LimitReached;
    } else {
        out.status = hit_limit ? MipStatus::LimitReached : MipStatus::Infeasible;
        out.bound = bound_final;
    }
    emit(out.nodes, open.size(), out.bound, have_incumbent ? out.objective : kInf, out.gap);
    return out;
}

} // namespace evopf
