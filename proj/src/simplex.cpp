#include "qmarket/simplex.hpp"

#include <limits>
#include <stdexcept>

namespace qmarket {

namespace {

// Tableau layout: m constraint rows plus the reduced-cost row at index m.
// Columns: n structural, m artificial, then the right-hand side.
struct Tableau {
    std::size_t m;
    std::size_t n;
    std::size_t width;
    std::vector<double> cells;
    std::vector<std::size_t> basis;

    double& at(std::size_t r, std::size_t c) { return cells[r * width + c]; }
    double at(std::size_t r, std::size_t c) const { return cells[r * width + c]; }
    std::size_t rhs() const { return width - 1; }

    void pivot(std::size_t row, std::size_t col) {
        const double inv = 1.0 / at(row, col);
        for (std::size_t c = 0; c < width; ++c) at(row, c) *= inv;
        at(row, col) = 1.0;
        for (std::size_t r = 0; r <= m; ++r) {
            if (r == row) continue;
            const double factor = at(r, col);
            if (factor == 0.0) continue;
            double* target = &cells[r * width];
            const double* source = &cells[row * width];
            for (std::size_t c = 0; c < width; ++c) target[c] -= factor * source[c];
            target[col] = 0.0;
        }
        basis[row] = col;
    }
};

}  // namespace

PhaseOneResult find_feasible_point(const DenseMatrix& a, std::span<const double> b, const SimplexOptions& options) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (b.size() != m) throw std::invalid_argument("simplex: right-hand side size mismatch");

    Tableau t{m, n, n + m + 1, {}, {}};
    t.cells.assign((m + 1) * t.width, 0.0);
    t.basis.resize(m);
    std::vector<double> sign(m, 1.0);
    for (std::size_t r = 0; r < m; ++r) {
        if (b[r] < 0.0) sign[r] = -1.0;
        for (std::size_t c = 0; c < n; ++c) t.at(r, c) = sign[r] * a(r, c);
        t.at(r, n + r) = 1.0;
        t.at(r, t.rhs()) = sign[r] * b[r];
        t.basis[r] = n + r;
    }
    // Reduced costs of the phase-one objective with the artificial basis.
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += t.at(r, c);
        t.at(m, c) = -s;
    }
    double total = 0.0;
    for (std::size_t r = 0; r < m; ++r) total += t.at(r, t.rhs());
    t.at(m, t.rhs()) = -total;

    const std::size_t max_pivots = options.max_pivots ? options.max_pivots : 50 * (m + n);
    PhaseOneResult result;
    for (;;) {
        // Bland: lowest-index column with negative reduced cost.
        std::size_t entering = t.width;
        for (std::size_t c = 0; c + 1 < t.width; ++c) {
            if (t.at(m, c) < -options.tolerance) {
                entering = c;
                break;
            }
        }
        if (entering == t.width) break;

        // Ratio test, ties to the lowest basic variable index.
        std::size_t leaving = m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m; ++r) {
            const double coef = t.at(r, entering);
            if (coef <= options.pivot_tolerance) continue;
            const double ratio = t.at(r, t.rhs()) / coef;
            if (ratio < best || (ratio == best && t.basis[r] < t.basis[leaving])) {
                best = ratio;
                leaving = r;
            }
        }
        // Phase one is bounded below by zero, so an unbounded ray means the
        // reduced cost was numerical noise.
        if (leaving == m) break;

        if (++result.pivots > max_pivots) throw std::runtime_error("simplex: pivot limit exceeded");
        t.pivot(leaving, entering);
    }

    result.objective = -t.at(m, t.rhs());
    result.feasible = result.objective <= options.tolerance;
    if (result.feasible) {
        result.x.assign(n, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            if (t.basis[r] < n) result.x[t.basis[r]] = std::max(0.0, t.at(r, t.rhs()));
        }
    } else {
        // Artificial column n+r has cost 1, so its reduced cost is 1 - y_r.
        // Optimality gives y'A_j <= 0 and y'b = objective > 0; negate to
        // report a vector with nonnegative column products.
        result.farkas.resize(m);
        for (std::size_t r = 0; r < m; ++r) result.farkas[r] = -sign[r] * (1.0 - t.at(m, n + r));
    }
    return result;
}

}  // namespace qmarket
