#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evopf/errors.hpp"

namespace evopf {

enum class ConeKind { NonNeg, Soc };

/// A cone over a contiguous run of decision columns. Soc slices order the
/// columns as (head, tail...): head >= euclidean norm of the tail.
struct ConeSlice {
    ConeKind kind = ConeKind::NonNeg;
    int start = 0;
    int dim = 0;
};

/// Standard-form problem consumed by the solver and the integer layer:
///   minimize    cost' x
///   subject to  A x = rhs,  lower <= x <= upper,  cone slices hold,
///               integer-marked columns binary (handled by the integer layer).
///
/// Rows and columns keep the order in which they were added; nothing is
/// reordered behind the caller's back, which is what makes rebuilds and
/// appended fixings reproducible.
class ConicProgram {
public:
    struct Entry {
        int row = 0;
        int col = 0;
        double value = 0.0;
    };

    /// Appends a column; returns its index. Bounds may be +-infinity.
    int add_col(std::string name, double lower_bound, double upper_bound, double cost = 0.0,
                bool integer = false);

    /// Appends an equality row  sum(coeff * x[col]) = rhs; returns its index.
    /// Terms must reference existing columns; duplicate columns are allowed
    /// and are summed.
    int add_row(std::string name, const std::vector<std::pair<int, double>>& terms,
                double rhs_value);

    /// Declares a cone over columns [start, start+dim). Slices must not
    /// overlap each other.
    void add_cone(ConeKind kind, int start, int dim);

    int num_cols() const { return static_cast<int>(cost.size()); }
    int num_rows() const { return static_cast<int>(rhs.size()); }

    /// Structural and numeric sanity: dimensions, finite data, bound order,
    /// cone slice ranges and disjointness. Throws ValidationError.
    void validate() const;

    std::vector<double> cost;
    std::vector<double> rhs;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Entry> entries;
    std::vector<ConeSlice> cones;
    std::vector<std::uint8_t> integer_marks; // per column, 0/1
    std::vector<std::string> col_names;
    std::vector<std::string> row_names;
};

/// Serializes the program to the text format described in docs/formats.md.
/// Deterministic: identical programs produce identical bytes.
std::string export_text(const ConicProgram& program);

} // namespace evopf
