#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "evopf/conic.hpp"

namespace evopf {

enum class SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    NumericalFailure,
};

std::string to_string(SolveStatus status);

struct SolverSettings {
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iterations = 200;
    /// Static regularization added to the KKT diagonal (+eps on the primal
    /// block, -eps on the dual blocks); corrected by iterative refinement.
    double static_reg = 1e-9;
    /// Refinement passes per triangular solve against the unregularized KKT.
    int refine_steps = 2;
    bool equilibrate = true;
    /// Optional per-iteration log sink; never called when unset.
    std::function<void(const std::string&)> log;
};

/// Residual measures evaluated on the original (unscaled) problem data. The
/// convergence test inside solve() and the public residuals() entry point
/// share this computation.
struct ResidualReport {
    double primal = 0.0; ///< max of equality and cone-constraint violation, relative
    double dual = 0.0;   ///< stationarity and dual-cone violation, relative
    double gap = 0.0;    ///< |primal objective - dual objective|, relative
    double primal_abs = 0.0; ///< same violations in absolute max-norm terms
    double dual_abs = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
};

/// Inequality-form view of a program: the solver rewrites bounds and cone
/// slices into  A_eq x = b_eq,  G x + s = h,  s in K. The dual vector z and
/// slack s returned by solve() follow the G row order, which is:
///   1. finite lower bounds with lower < upper, ascending column;
///   2. finite upper bounds with lower < upper, ascending column;
///   3. declared cone slices, in declaration order, dim rows each.
/// Columns with lower == upper become equality rows appended after the
/// program's own rows, ascending column.
struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalFailure;
    std::vector<double> x; ///< primal solution (or unbounded ray certificate)
    std::vector<double> y; ///< equality duals: program rows, then pinned columns
    std::vector<double> z; ///< cone duals in the documented G row order
    std::vector<double> s; ///< primal slacks matching z
    double objective = std::numeric_limits<double>::quiet_NaN();
    ResidualReport residuals;
    int iterations = 0;
};

/// Solves a continuous conic program by a primal-dual interior-point method
/// (self-dual embedding, Nesterov-Todd scaling, Mehrotra corrector).
/// Deterministic: identical input and settings give bit-identical output.
/// The program must carry no integer marks; the integer layer strips or
/// fixes them first. Throws InputError on marked columns or empty programs,
/// ValidationError if program.validate() fails.
SolveOutcome solve(const ConicProgram& program, const SolverSettings& settings = {});

/// Residuals of a candidate primal-dual triple on the original data, using
/// the same code path as solve()'s convergence test. x has one entry per
/// column; y and z follow the SolveOutcome layout. Slacks are implied:
/// s = h - Gx.
ResidualReport residuals(const ConicProgram& program, const std::vector<double>& x,
                         const std::vector<double>& y, const std::vector<double>& z);

} // namespace evopf
