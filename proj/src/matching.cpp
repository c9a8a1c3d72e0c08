#include "crm/matching.hpp"

#include <algorithm>
#include <limits>

namespace crm {

namespace {

// Square min-cost assignment via potentials (Jonker-style, O(n^3)).
// Returns col -> row.
std::vector<int> assignment_min(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
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
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> col_to_row(n, -1);
    for (int j = 1; j <= n; ++j) col_to_row[j - 1] = p[j] - 1;
    return col_to_row;
}

std::vector<MatchPair> exact_matching(const std::vector<std::vector<double>>& weights,
                                      double floor) {
    const size_t rows = weights.size();
    const size_t cols = rows == 0 ? 0 : weights[0].size();
    const size_t n = std::max(rows, cols);
    if (n == 0) return {};
    // Pad to square; inadmissible and padded cells carry weight 0, which the
    // assignment may still pick — such picks are dropped afterwards and
    // contribute nothing to the total.
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < cols; ++c) {
            if (weights[r][c] >= floor) cost[r][c] = -weights[r][c];
        }
    }
    auto col_to_row = assignment_min(cost);
    std::vector<MatchPair> out;
    for (size_t c = 0; c < cols; ++c) {
        int r = col_to_row[c];
        if (r < 0 || static_cast<size_t>(r) >= rows) continue;
        double w = weights[static_cast<size_t>(r)][c];
        if (w >= floor) out.push_back({static_cast<size_t>(r), c, w});
    }
    std::sort(out.begin(), out.end(),
              [](const MatchPair& a, const MatchPair& b) { return a.row < b.row; });
    return out;
}

std::vector<MatchPair> greedy_matching(const std::vector<std::vector<double>>& weights,
                                       double floor) {
    std::vector<MatchPair> candidates;
    for (size_t r = 0; r < weights.size(); ++r) {
        for (size_t c = 0; c < weights[r].size(); ++c) {
            if (weights[r][c] >= floor) candidates.push_back({r, c, weights[r][c]});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const MatchPair& a, const MatchPair& b) {
                         if (a.weight != b.weight) return a.weight > b.weight;
                         if (a.row != b.row) return a.row < b.row;
                         return a.col < b.col;
                     });
    std::vector<bool> row_used(weights.size(), false);
    std::vector<bool> col_used(weights.empty() ? 0 : weights[0].size(), false);
    std::vector<MatchPair> out;
    for (const auto& cand : candidates) {
        if (row_used[cand.row] || col_used[cand.col]) continue;
        row_used[cand.row] = true;
        col_used[cand.col] = true;
        out.push_back(cand);
    }
    std::sort(out.begin(), out.end(),
              [](const MatchPair& a, const MatchPair& b) { return a.row < b.row; });
    return out;
}

}  // namespace

std::vector<MatchPair> max_weight_matching(const std::vector<std::vector<double>>& weights,
                                           double floor, size_t exact_limit) {
    const size_t rows = weights.size();
    const size_t cols = rows == 0 ? 0 : weights[0].size();
    if (rows == 0 || cols == 0) return {};
    if (rows <= exact_limit && cols <= exact_limit) return exact_matching(weights, floor);
    return greedy_matching(weights, floor);
}

double matching_total(const std::vector<MatchPair>& pairs) {
    double total = 0.0;
    for (const auto& p : pairs) total += p.weight;
    return total;
}

}  // namespace crm
