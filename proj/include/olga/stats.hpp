#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "olga/error.hpp"
#include "olga/matrix.hpp"

namespace olga {

struct RankResult {
    std::vector<std::string> methods;
    Matrix ranks;  // datasets x methods, 1 = best, ties averaged
    std::vector<double> average_ranks;
    double friedman_chi2 = 0.0;
    double critical_difference = 0.0;
    std::vector<std::pair<int, int>> significant_pairs;  // indices into methods

    bool is_significant(int a, int b) const {
        for (auto [i, j] : significant_pairs)
            if ((i == a && j == b) || (i == b && j == a)) return true;
        return false;
    }
};

namespace detail {

// Two-tailed Nemenyi critical values q_{0.05, m} for up to 10 methods.
inline double nemenyi_q05(std::size_t m) {
    static constexpr double table[] = {1.959964, 2.343701, 2.569032, 2.727774, 2.849705,
                                       2.948319, 3.030879, 3.101730, 3.163684};
    if (m < 2 || m > 10)
        throw ConfigError("Nemenyi critical values tabulated for 2..10 methods, got " +
                          std::to_string(m));
    return table[m - 2];
}

// Ranks one score row descending (rank 1 = highest score), averaging ties.
inline std::vector<double> rank_row_descending(std::span<const double> scores) {
    const std::size_t m = scores.size();
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    std::vector<double> ranks(m, 0.0);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[static_cast<std::size_t>(order[k])] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

// Friedman rank test over a datasets x methods score table (higher scores
// are better), with the Nemenyi post-test at 95% confidence:
//   CD = q_{0.05,m} * sqrt(m (m+1) / (6 N)).
// The chi-square statistic carries the standard tie correction.
inline RankResult friedman_nemenyi(const Matrix& scores, std::vector<std::string> methods) {
    const std::size_t n_datasets = scores.rows();
    const std::size_t m = scores.cols();
    if (m != methods.size()) throw DimensionError("friedman_nemenyi: method name count mismatch");
    if (m < 2) throw ConfigError("friedman_nemenyi: need at least 2 methods");
    if (n_datasets < 2) throw ConfigError("friedman_nemenyi: need at least 2 datasets");

    RankResult result;
    result.methods = std::move(methods);
    result.ranks = Matrix(n_datasets, m);
    result.average_ranks.assign(m, 0.0);

    double tie_term = 0.0;
    for (std::size_t d = 0; d < n_datasets; ++d) {
        const auto ranks = detail::rank_row_descending(scores.row(d));
        for (std::size_t j = 0; j < m; ++j) {
            result.ranks(d, j) = ranks[j];
            result.average_ranks[j] += ranks[j];
        }
        // tie correction: sum over groups of t^3 - t
        std::vector<double> sorted(scores.row(d).begin(), scores.row(d).end());
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < m) {
            std::size_t j = i;
            while (j + 1 < m && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    for (double& r : result.average_ranks) r /= static_cast<double>(n_datasets);

    const double nd = static_cast<double>(n_datasets);
    const double md = static_cast<double>(m);
    double sum_sq_totals = 0.0;
    for (double r : result.average_ranks) {
        const double total = r * nd;
        sum_sq_totals += total * total;
    }
    double chi2 = 12.0 / (nd * md * (md + 1.0)) * sum_sq_totals - 3.0 * nd * (md + 1.0);
    const double correction = 1.0 - tie_term / (nd * md * (md * md - 1.0));
    if (correction > 0.0) chi2 /= correction;
    result.friedman_chi2 = chi2;

    result.critical_difference =
        detail::nemenyi_q05(m) * std::sqrt(md * (md + 1.0) / (6.0 * nd));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            if (std::abs(result.average_ranks[a] - result.average_ranks[b]) >
                result.critical_difference)
                result.significant_pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    return result;
}

// Volume of the n-ball: pi^(n/2) / Gamma(n/2 + 1) * r^n. With radii below 1
// this vanishes as the dimension grows, which is why the embedding space is
// kept at 2 or 3 dimensions.
inline double hypersphere_volume(std::size_t n, double r) {
    if (n < 1) throw ConfigError("hypersphere_volume: dimension must be >= 1");
    if (r <= 0.0) throw ConfigError("hypersphere_volume: radius must be positive");
    const double nd = static_cast<double>(n);
    return std::pow(3.14159265358979323846, nd / 2.0) / std::tgamma(nd / 2.0 + 1.0) *
           std::pow(r, nd);
}

}  // namespace olga
