#pragma once

#include <armadillo>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fdrelay {

/// Small LP in the form used by the power allocator:
///   minimize    objective . x
///   subject to  ge_matrix x >= ge_bounds,  0 <= x <= upper.
struct LpStandardForm {
    arma::vec objective;
    arma::mat ge_matrix;
    arma::vec ge_bounds;
    arma::vec upper;

    void check() const {
        const arma::uword n = objective.n_elem;
        if (upper.n_elem != n || ge_matrix.n_cols != n ||
            ge_matrix.n_rows != ge_bounds.n_elem)
            throw std::invalid_argument("LpStandardForm: inconsistent dimensions");
        for (arma::uword i = 0; i < n; ++i)
            if (!(upper(i) >= 0.0)) throw std::invalid_argument("LpStandardForm: negative upper bound");
        if (!objective.is_finite() || !ge_matrix.is_finite() || !ge_bounds.is_finite())
            throw std::invalid_argument("LpStandardForm: non-finite data");
    }
};

struct LpSolution {
    enum class Status { optimal, infeasible, unbounded, breakdown };
    Status status = Status::breakdown;
    arma::vec x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double phase1_residual = 0.0;  // infeasibility certificate when > tolerance
    int pivots = 0;
};

/// Self-contained two-phase dense simplex with Bland's pivoting rule
/// (anti-cycling). Built for the tiny programs produced by the power
/// allocator (a few dozen rows); all arithmetic is dense tableau updates.
inline LpSolution solve_lp(const LpStandardForm& lp) {
    lp.check();
    constexpr double kPivotTol = 1e-11;
    constexpr double kCostTol = 1e-10;

    const arma::uword n = lp.objective.n_elem;
    const arma::uword m_ge = lp.ge_matrix.n_rows;
    const arma::uword m = m_ge + n;  // ge rows (negated to <=) plus upper bounds

    // rows: a x + s = b with slack identity; negative b handled by artificials
    arma::mat a(m, n);
    arma::vec b(m);
    for (arma::uword i = 0; i < m_ge; ++i) {
        a.row(i) = -lp.ge_matrix.row(i);
        b(i) = -lp.ge_bounds(i);
    }
    for (arma::uword j = 0; j < n; ++j) {
        a.row(m_ge + j).zeros();
        a(m_ge + j, j) = 1.0;
        b(m_ge + j) = lp.upper(j);
    }

    std::vector<arma::uword> art_rows;
    for (arma::uword i = 0; i < m; ++i)
        if (b(i) < 0.0) art_rows.push_back(i);
    const arma::uword n_art = static_cast<arma::uword>(art_rows.size());

    // tableau columns: x (n) | slacks (m) | artificials (n_art) | rhs
    const arma::uword cols = n + m + n_art + 1;
    arma::mat t(m + 1, cols, arma::fill::zeros);
    std::vector<arma::uword> basis(m);
    for (arma::uword i = 0; i < m; ++i) {
        const double sign = b(i) < 0.0 ? -1.0 : 1.0;
        for (arma::uword j = 0; j < n; ++j) t(i, j) = sign * a(i, j);
        t(i, n + i) = sign;  // slack
        t(i, cols - 1) = sign * b(i);
        basis[i] = n + i;
    }
    for (arma::uword ai = 0; ai < n_art; ++ai) {
        const arma::uword r = art_rows[ai];
        t(r, n + m + ai) = 1.0;
        basis[r] = n + m + ai;
    }

    LpSolution sol;
    const arma::uword obj = m;  // objective row index

    auto pivot = [&](arma::uword row, arma::uword col) {
        t.row(row) /= t(row, col);
        for (arma::uword i = 0; i <= m; ++i) {
            if (i == row) continue;
            const double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        basis[row] = col;
        ++sol.pivots;
    };

    // Bland: entering = lowest-index improving column, leaving = lowest-index
    // basic variable among the minimum ratios.
    auto run = [&](arma::uword usable_cols) -> bool {  // false on unbounded
        for (;;) {
            arma::uword enter = usable_cols;
            for (arma::uword j = 0; j < usable_cols; ++j) {
                if (t(obj, j) < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == usable_cols) return true;  // optimal
            arma::uword leave = m;
            double best_ratio = 0.0;
            for (arma::uword i = 0; i < m; ++i) {
                if (t(i, enter) > kPivotTol) {
                    const double ratio = t(i, cols - 1) / t(i, enter);
                    if (leave == m || ratio < best_ratio - 1e-15 ||
                        (ratio <= best_ratio + 1e-15 && basis[i] < basis[leave])) {
                        leave = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (leave == m) return false;
            pivot(leave, enter);
            if (sol.pivots > 100000)
                throw std::runtime_error("solve_lp: pivot limit exceeded");
        }
    };

    if (n_art > 0) {
        // phase 1: minimize the sum of artificials
        for (arma::uword ai = 0; ai < n_art; ++ai) t(obj, n + m + ai) = 1.0;
        for (const arma::uword r : art_rows) t.row(obj) -= t.row(r);
        run(n + m + n_art);
        sol.phase1_residual = -t(obj, cols - 1);
        const double scale = 1.0 + arma::abs(b).max();
        if (sol.phase1_residual > 1e-8 * scale) {
            sol.status = LpSolution::Status::infeasible;
            return sol;
        }
        // drive leftover artificials out of the basis where possible
        for (arma::uword i = 0; i < m; ++i) {
            if (basis[i] < n + m) continue;
            arma::uword piv = n + m;
            for (arma::uword j = 0; j < n + m; ++j) {
                if (std::abs(t(i, j)) > kPivotTol) {
                    piv = j;
                    break;
                }
            }
            if (piv < n + m) pivot(i, piv);
            // else: redundant row; harmless since artificial columns are
            // excluded from phase-2 pricing
        }
    }

    // phase 2 objective
    t.row(obj).zeros();
    for (arma::uword j = 0; j < n; ++j) t(obj, j) = lp.objective(j);
    for (arma::uword i = 0; i < m; ++i) {
        if (basis[i] < n && t(obj, basis[i]) != 0.0)
            t.row(obj) -= t(obj, basis[i]) * t.row(i);
    }
    if (!run(n + m)) {
        sol.status = LpSolution::Status::unbounded;
        return sol;
    }

    sol.x.zeros(n);
    for (arma::uword i = 0; i < m; ++i)
        if (basis[i] < n) sol.x(basis[i]) = t(i, cols - 1);
    for (arma::uword j = 0; j < n; ++j) {
        if (sol.x(j) < 0.0 && sol.x(j) > -1e-9) sol.x(j) = 0.0;  // numerical dust
    }
    sol.objective = arma::dot(lp.objective, sol.x);
    sol.status = sol.x.is_finite() ? LpSolution::Status::optimal : LpSolution::Status::breakdown;
    return sol;
}

}  // namespace fdrelay
