#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "evopf/conic.hpp"
#include "evopf/problem.hpp"
#include "evopf/solver.hpp"

namespace evopf {

enum class MipStatus {
    OptimalWithinGap,
    Infeasible,
    LimitReached,
};

std::string to_string(MipStatus status);

struct BnBSettings {
    double integrality_tol = 1e-5;
    double rel_gap_tol = 1e-4;
    long node_limit = 100000;
    double time_limit_sec = std::numeric_limits<double>::infinity();
    /// Threads evaluating one wave of nodes. The wave composition is fixed,
    /// so results are identical for any worker count.
    int workers = 1;
    /// Single-line progress sink: "nodes=<n> open=<o> bound=<b> incumbent=<i> gap=<g>".
    std::function<void(const std::string&)> log;
};

struct MipOutcome {
    MipStatus status = MipStatus::Infeasible;
    std::vector<double> x; ///< incumbent column vector (empty when none found)
    double objective = std::numeric_limits<double>::quiet_NaN();
    double bound = -std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    long nodes = 0;
    /// Per-group decision of the incumbent: level index or -1 for idle.
    std::vector<int> decisions;
};

/// One open subproblem: the per-group decisions made so far. Undecided groups
/// are marked kUndecided.
struct BnBNode {
    static constexpr int kUndecided = -2;
    static constexpr int kIdle = -1;
    std::vector<int> decision; ///< per group id
    double parent_bound = -std::numeric_limits<double>::infinity();
    int depth = 0;
};

/// Branch on the most fractional exclusivity group of a relaxed solution:
/// one child per level (that level active) plus an idle child; together they
/// partition the parent's feasible set. Throws InputError when every group is
/// already integral. Ties break toward the lowest group id.
std::vector<BnBNode> branch_sos1(const BnBNode& node, const VariableIndex& idx,
                                 const std::vector<double>& relaxed_x, double integrality_tol);

/// Rounds a relaxed solution to one level choice per group: the level holding
/// more than half the group's indicator mass, idle otherwise. The caller
/// repairs the choice with a fixed-group solve.
std::vector<int> round_heuristic(const VariableIndex& idx, const std::vector<double>& relaxed_x);

/// Branch-and-bound over the exclusivity groups of a built program. The
/// program must carry integer marks (the groups to search); everything else
/// is solved by the conic engine. Deterministic for a fixed input, including
/// under parallel node evaluation.
MipOutcome solve_mip(const BuiltProblem& built, const BnBSettings& bnb,
                     const SolverSettings& solver);

} // namespace evopf
