#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qmarket {

/// Dense row-major matrix, just enough for the feasibility LP.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

struct SimplexOptions {
    /// Reduced costs above -tolerance count as optimal; a phase-one objective
    /// at or below it counts as feasible.
    double tolerance = 1e-9;
    /// Smallest pivot element admitted by the ratio test.
    double pivot_tolerance = 1e-12;
    /// 0 selects 50 * (rows + cols).
    std::size_t max_pivots = 0;
};

/// Outcome of the phase-one problem  min 1'a  s.t.  A x + a = b, x, a >= 0.
struct PhaseOneResult {
    bool feasible = false;
    /// A point with A x = b, x >= 0 (up to rounding). Set when feasible.
    std::vector<double> x;
    /// Farkas vector y with y'A_j >= 0 for every column j and y'b < 0.
    /// Set when infeasible. Read off the duals of the final basis.
    std::vector<double> farkas;
    double objective = 0.0;
    std::size_t pivots = 0;
};

/// Decides whether {x >= 0 : A x = b} is nonempty with a phase-one primal
/// simplex on a full tableau, Bland's rule for entering and leaving
/// variables. Throws std::runtime_error if the pivot limit is exceeded.
PhaseOneResult find_feasible_point(const DenseMatrix& a, std::span<const double> b,
                                   const SimplexOptions& options = {});

}  // namespace qmarket
