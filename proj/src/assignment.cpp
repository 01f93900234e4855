#include <algorithm>
#include <cmath>
#include <vector>

#include "pedtrack/association.hpp"

namespace pedtrack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest augmenting path Hungarian method over an n x m matrix with n <= m
// and every entry finite. Returns the column assigned to each row.
template <typename Cost>
std::vector<std::size_t> hungarian(std::size_t n, std::size_t m, Cost cost) {
    // 1-based rows/columns; column 0 is the virtual root of each search.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> row_to_col(n, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Applies equal-cost exchanges that make the match set lexicographically smaller.
void normalize_ties(const CostMatrix& costs, std::vector<std::size_t>& row_to_col) {
    const std::size_t rows = costs.rows();
    const std::size_t cols = costs.cols();
    std::vector<std::size_t> col_to_row(cols, kNone);
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_to_col[r] != kNone) col_to_row[row_to_col[r]] = r;
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t r = 0; r < rows && !changed; ++r) {
            const std::size_t a = row_to_col[r];
            if (a == kNone) {
                // A free row may take a column from a later row at equal cost.
                for (std::size_t c = 0; c < cols && !changed; ++c) {
                    const std::size_t owner = col_to_row[c];
                    if (owner == kNone || owner < r || !costs.feasible(r, c)) continue;
                    if (costs(r, c) == costs(owner, c)) {
                        row_to_col[owner] = kNone;
                        row_to_col[r] = c;
                        col_to_row[c] = r;
                        changed = true;
                    }
                }
                continue;
            }
            for (std::size_t b = 0; b < a && !changed; ++b) {
                if (!costs.feasible(r, b)) continue;
                const std::size_t other = col_to_row[b];
                if (other == kNone) {
                    if (costs(r, b) == costs(r, a)) {
                        col_to_row[a] = kNone;
                        row_to_col[r] = b;
                        col_to_row[b] = r;
                        changed = true;
                    }
                } else if (other > r && costs.feasible(other, a) &&
                           costs(r, b) + costs(other, a) == costs(r, a) + costs(other, b)) {
                    row_to_col[r] = b;
                    row_to_col[other] = a;
                    col_to_row[b] = r;
                    col_to_row[a] = other;
                    changed = true;
                }
            }
        }
    }
}

}  // namespace

MatchResult solve_assignment(const CostMatrix& costs) {
    const std::size_t rows = costs.rows();
    const std::size_t cols = costs.cols();
    MatchResult result;
    if (rows == 0 || cols == 0) {
        for (std::size_t r = 0; r < rows; ++r) result.unmatched_tracks.push_back(r);
        for (std::size_t c = 0; c < cols; ++c) result.unmatched_detections.push_back(c);
        return result;
    }

    bool all_feasible = true;
    double magnitude = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (costs.feasible(r, c)) {
                magnitude += std::abs(costs(r, c));
            } else {
                all_feasible = false;
            }
        }
    }

    std::vector<std::size_t> row_to_col(rows, kNone);
    if (all_feasible) {
        if (rows <= cols) {
            row_to_col = hungarian(rows, cols, [&](std::size_t r, std::size_t c) { return costs(r, c); });
        } else {
            const auto col_to_row = hungarian(cols, rows, [&](std::size_t c, std::size_t r) { return costs(r, c); });
            for (std::size_t c = 0; c < cols; ++c) row_to_col[col_to_row[c]] = c;
        }
    } else {
        // Square (rows + cols) extension: leaving a row or column unmatched
        // costs `penalty`, which exceeds any total of feasible costs, so the
        // cardinality is maximised before the cost.
        const double penalty = 1.0 + magnitude;
        const double forbidden = 4.0 * penalty * static_cast<double>(rows + cols + 1);
        const std::size_t n = rows + cols;
        auto extended = [&](std::size_t r, std::size_t c) -> double {
            if (r < rows && c < cols) return costs.feasible(r, c) ? costs(r, c) : forbidden;
            if (r < rows) return c - cols == r ? penalty : forbidden;
            if (c < cols) return r - rows == c ? penalty : forbidden;
            return 0.0;
        };
        const auto assignment = hungarian(n, n, extended);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t c = assignment[r];
            if (c < cols && costs.feasible(r, c)) row_to_col[r] = c;
        }
    }

    normalize_ties(costs, row_to_col);

    std::vector<char> col_used(cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t c = row_to_col[r];
        if (c != kNone && costs.feasible(r, c)) {
            result.matches.emplace_back(r, c);
            col_used[c] = 1;
        } else {
            result.unmatched_tracks.push_back(r);
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (!col_used[c]) result.unmatched_detections.push_back(c);
    }
    return result;
}

}  // namespace pedtrack
