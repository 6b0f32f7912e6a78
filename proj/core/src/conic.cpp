#include "evopf/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace evopf {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Locale-independent shortest round-trip formatting.
std::string fmt_double(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

int ConicProgram::add_col(std::string name, double lower_bound, double upper_bound, double cost_in,
                          bool integer) {
    const int idx = num_cols();
    cost.push_back(cost_in);
    lower.push_back(lower_bound);
    upper.push_back(upper_bound);
    integer_marks.push_back(integer ? 1 : 0);
    col_names.push_back(std::move(name));
    return idx;
}

int ConicProgram::add_row(std::string name, const std::vector<std::pair<int, double>>& terms,
                          double rhs_value) {
    const int idx = num_rows();
    for (const auto& [col, coeff] : terms) {
        if (col < 0 || col >= num_cols()) {
            throw ValidationError("row '" + name + "' references column " + std::to_string(col) +
                                  " out of range");
        }
        if (coeff != 0.0) entries.push_back({idx, col, coeff});
    }
    rhs.push_back(rhs_value);
    row_names.push_back(std::move(name));
    return idx;
}

void ConicProgram::add_cone(ConeKind kind, int start, int dim) {
    cones.push_back({kind, start, dim});
}

void ConicProgram::validate() const {
    const int n = num_cols();
    const int m = num_rows();
    if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n ||
        static_cast<int>(integer_marks.size()) != n || static_cast<int>(col_names.size()) != n) {
        throw ValidationError("column arrays out of sync");
    }
    if (static_cast<int>(row_names.size()) != m) throw ValidationError("row arrays out of sync");
    for (int j = 0; j < n; ++j) {
        if (std::isnan(cost[j])) throw ValidationError("NaN objective coefficient");
        if (!std::isfinite(cost[j])) throw ValidationError("infinite objective coefficient");
        if (std::isnan(lower[j]) || std::isnan(upper[j])) throw ValidationError("NaN bound");
        if (lower[j] > upper[j]) {
            throw ValidationError("column '" + col_names[j] + "' has lower > upper");
        }
        if (lower[j] == upper[j] && !std::isfinite(lower[j])) {
            throw ValidationError("column '" + col_names[j] + "' pinned to a non-finite value");
        }
        if (integer_marks[j]) {
            if (lower[j] < 0.0 || upper[j] > 1.0) {
                throw ValidationError("integer column '" + col_names[j] +
                                      "' must have bounds within [0,1]");
            }
        }
    }
    for (const Entry& e : entries) {
        if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n) {
            throw ValidationError("matrix entry out of range");
        }
        if (!std::isfinite(e.value)) throw ValidationError("non-finite matrix entry");
    }
    for (double v : rhs) {
        if (!std::isfinite(v)) throw ValidationError("non-finite right-hand side");
    }

    std::vector<ConeSlice> sorted = cones;
    std::sort(sorted.begin(), sorted.end(),
              [](const ConeSlice& a, const ConeSlice& b) { return a.start < b.start; });
    int prev_end = -1;
    for (const ConeSlice& s : sorted) {
        if (s.dim <= 0) throw ValidationError("cone slice with nonpositive dimension");
        if (s.kind == ConeKind::Soc && s.dim < 2) {
            throw ValidationError("second-order cone needs dimension >= 2");
        }
        if (s.start < 0 || s.start + s.dim > n) throw ValidationError("cone slice out of range");
        if (s.start < prev_end) throw ValidationError("cone slices overlap");
        prev_end = s.start + s.dim;
    }
}

std::string export_text(const ConicProgram& program) {
    std::string out;
    out.reserve(64 * (program.num_cols() + program.num_rows()));
    out += "conic-program v1\n";
    out += "cols " + std::to_string(program.num_cols()) + "\n";
    out += "rows " + std::to_string(program.num_rows()) + "\n";
    for (int j = 0; j < program.num_cols(); ++j) {
        out += "col " + program.col_names[j] + " lo=" + fmt_double(program.lower[j]) +
               " up=" + fmt_double(program.upper[j]) + " cost=" + fmt_double(program.cost[j]);
        if (program.integer_marks[j]) out += " int=1";
        out += "\n";
    }
    // entries grouped by row, in insertion order within each row
    std::vector<std::vector<int>> by_row(program.num_rows());
    for (std::size_t k = 0; k < program.entries.size(); ++k) {
        by_row[program.entries[k].row].push_back(static_cast<int>(k));
    }
    for (int i = 0; i < program.num_rows(); ++i) {
        out += "row " + program.row_names[i] + " =" + fmt_double(program.rhs[i]);
        for (int k : by_row[i]) {
            const auto& e = program.entries[k];
            out += " " + std::to_string(e.col) + ":" + fmt_double(e.value);
        }
        out += "\n";
    }
    for (const ConeSlice& s : program.cones) {
        out += std::string("cone ") + (s.kind == ConeKind::Soc ? "soc" : "nonneg") + " " +
               std::to_string(s.start) + " " + std::to_string(s.dim) + "\n";
    }
    return out;
}

} // namespace evopf
