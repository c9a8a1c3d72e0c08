#pragma once

#include <cstddef>
#include <vector>

namespace crm {

struct MatchPair {
    size_t row = 0;
    size_t col = 0;
    double weight = 0.0;
};

// Maximum-total-weight one-to-one matching over the admissible entries of a
// rectangular weight matrix (weights[r][c] admissible iff >= floor). Exact
// O(n^3) assignment up to exact_limit per side, deterministic greedy beyond.
std::vector<MatchPair> max_weight_matching(const std::vector<std::vector<double>>& weights,
                                           double floor, size_t exact_limit = 25);

double matching_total(const std::vector<MatchPair>& pairs);

}  // namespace crm
