#pragma once

// Brute-force reference solver for the soft-margin SVM dual:
//   maximize  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij
//   s.t.      0 <= a_i <= C,  sum(a_i y_i) = 0
//
// Enumerates every active-set assignment (each a_i at 0, at C, or free),
// solves the KKT linear system for the free block plus the bias, checks
// feasibility, and keeps the best objective. Exponential in n, intended for
// n <= 8. Entirely independent of the SMO implementation under test.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace qp_oracle {

inline std::optional<std::vector<double>> solve_linear(std::vector<std::vector<double>> a,
                                                       std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-10) return std::nullopt;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

struct Solution {
    double objective = -std::numeric_limits<double>::infinity();
    std::vector<double> alpha;
};

inline double dual_objective(const std::vector<double>& alpha, const std::vector<double>& y,
                             const std::vector<std::vector<double>>& gram) {
    const std::size_t n = alpha.size();
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        obj += alpha[i];
        for (std::size_t j = 0; j < n; ++j)
            obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * gram[i][j];
    }
    return obj;
}

inline Solution solve(const std::vector<std::vector<double>>& gram, const std::vector<double>& y,
                      double c) {
    const std::size_t n = y.size();
    Solution best;
    std::vector<int> state(n, 0);  // 0 = lower bound, 1 = upper bound, 2 = free

    const double feas_eps = 1e-7;
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;

    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rem = code;
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = static_cast<int>(rem % 3);
            rem /= 3;
        }

        std::vector<std::size_t> free_idx;
        std::vector<double> alpha(n, 0.0);
        double bound_ay = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i] == 1) {
                alpha[i] = c;
                bound_ay += c * y[i];
            } else if (state[i] == 2) {
                free_idx.push_back(i);
            }
        }

        double bias = 0.0;
        if (!free_idx.empty()) {
            const std::size_t m = free_idx.size();
            std::vector<std::vector<double>> mat(m + 1, std::vector<double>(m + 1, 0.0));
            std::vector<double> rhs(m + 1, 0.0);
            for (std::size_t r = 0; r < m; ++r) {
                const std::size_t i = free_idx[r];
                double g = 0.0;  // contribution of upper-bound points
                for (std::size_t j = 0; j < n; ++j)
                    if (state[j] == 1) g += c * y[j] * gram[i][j];
                for (std::size_t cidx = 0; cidx < m; ++cidx)
                    mat[r][cidx] = y[free_idx[cidx]] * gram[i][free_idx[cidx]];
                mat[r][m] = 1.0;
                rhs[r] = y[i] - g;
            }
            for (std::size_t cidx = 0; cidx < m; ++cidx) mat[m][cidx] = y[free_idx[cidx]];
            rhs[m] = -bound_ay;

            const auto sol = solve_linear(mat, rhs);
            if (!sol) continue;
            bool in_box = true;
            for (std::size_t r = 0; r < m; ++r) {
                if ((*sol)[r] < -feas_eps || (*sol)[r] > c + feas_eps) in_box = false;
                alpha[free_idx[r]] = std::clamp((*sol)[r], 0.0, c);
            }
            if (!in_box) continue;
            bias = (*sol)[m];
        } else {
            if (std::abs(bound_ay) > feas_eps) continue;
            // any bias satisfying the bound-side KKT inequalities will do;
            // the objective does not depend on it
            double b_lo = -std::numeric_limits<double>::infinity();
            double b_hi = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                double net = 0.0;
                for (std::size_t j = 0; j < n; ++j) net += alpha[j] * y[j] * gram[i][j];
                // lower bound: y_i (net + b) >= 1; upper bound: <= 1
                if (state[i] == 0) {
                    if (y[i] > 0) b_lo = std::max(b_lo, 1.0 - net);
                    else b_hi = std::min(b_hi, net - 1.0);
                } else {
                    if (y[i] > 0) b_hi = std::min(b_hi, 1.0 - net);
                    else b_lo = std::max(b_lo, net - 1.0);
                }
            }
            if (b_lo > b_hi + feas_eps) continue;
            bias = std::clamp(0.0, b_lo, b_hi);
        }

        // verify the full KKT inequalities for bound variables
        bool feasible = true;
        for (std::size_t i = 0; i < n && feasible; ++i) {
            double f = bias;
            for (std::size_t j = 0; j < n; ++j) f += alpha[j] * y[j] * gram[i][j];
            const double m = y[i] * f;
            if (state[i] == 0 && m < 1.0 - feas_eps) feasible = false;
            if (state[i] == 1 && m > 1.0 + feas_eps) feasible = false;
            if (state[i] == 2 && std::abs(m - 1.0) > 1e-5) feasible = false;
        }
        if (!feasible) continue;

        const double obj = dual_objective(alpha, y, gram);
        if (obj > best.objective) {
            best.objective = obj;
            best.alpha = alpha;
        }
    }
    return best;
}

}  // namespace qp_oracle
