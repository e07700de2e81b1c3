// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/outlier_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tokrecover {

LofTable build_lof_table(std::span<const double> scores, const LofParams& params) {
    params.validate();
    const std::size_t n = scores.size();
    const std::size_t k = params.k;
    if (n <= k) {
        throw Error(ErrorKind::TooFewPoints,
                    "LOF with k=" + std::to_string(k) + " needs more than k points, got " + std::to_string(n));
    }
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw Error(ErrorKind::NonFiniteValue, "LOF input is not finite");
        }
    }

    // In one dimension every k-neighbourhood is a contiguous run of the
    // sorted order, so a sweep from each point's sorted position suffices.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    LofTable table;
    table.k_distance.resize(n);
    table.neighborhoods.resize(n);
    table.lrd.resize(n);
    table.lof.resize(n);
    table.degenerate.assign(n, 0);

    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t self = order[p];
        const double x = scores[self];
        auto left_dist = [&](std::size_t pos) { return x - scores[order[pos]]; };
        auto right_dist = [&](std::size_t pos) { return scores[order[pos]] - x; };

        // k nearest by merging the two sides outward.
        std::size_t l = p;  // next left candidate is l - 1
        std::size_t r = p + 1;
        double kdist = 0.0;
        for (std::size_t step = 0; step < k; ++step) {
            const bool has_left = l > 0;
            const bool has_right = r < n;
            if (has_left && (!has_right || left_dist(l - 1) <= right_dist(r))) {
                kdist = left_dist(--l);
            } else {
                kdist = right_dist(r++);
            }
        }
        while (l > 0 && left_dist(l - 1) <= kdist) {
            --l;
        }
        while (r < n && right_dist(r) <= kdist) {
            ++r;
        }

        auto& hood = table.neighborhoods[self];
        hood.reserve(r - l - 1);
        for (std::size_t pos = l; pos < r; ++pos) {
            if (pos != p) {
                hood.push_back(order[pos]);
            }
        }
        std::ranges::sort(hood);
        table.k_distance[self] = kdist;
        table.degenerate[self] = kdist == 0.0 ? 1 : 0;
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (table.degenerate[i]) {
            table.lrd[i] = kInf;
            continue;
        }
        double reach_sum = 0.0;
        for (std::size_t o : table.neighborhoods[i]) {
            reach_sum += std::max(table.k_distance[o], std::abs(scores[i] - scores[o]));
        }
        table.lrd[i] = static_cast<double>(table.neighborhoods[i].size()) / reach_sum;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (table.degenerate[i]) {
            table.lof[i] = 1.0;
            continue;
        }
        double lrd_sum = 0.0;
        for (std::size_t o : table.neighborhoods[i]) {
            lrd_sum += table.lrd[o];
        }
        table.lof[i] = lrd_sum / static_cast<double>(table.neighborhoods[i].size()) / table.lrd[i];
    }
    return table;
}

double median(std::span<const double> values) {
    if (values.empty()) {
        throw Error(ErrorKind::EmptyInput, "median of an empty sequence");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::ranges::sort(sorted);
    const std::size_t mid = sorted.size() / 2;
    if (sorted.size() % 2 == 1) {
        return sorted[mid];
    }
    return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

std::size_t count_salient(std::span<const double> scores, const LofTable& table, const LofParams& params) {
    if (table.size() != scores.size()) {
        throw Error(ErrorKind::SizeMismatch, "LOF table was built for a different score vector");
    }
    const double mid = median(scores);
    std::size_t m = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (table.lof[i] > params.tau && scores[i] > mid) {
            ++m;
        }
    }
    return m;
}

IndexSet top_scoring(std::span<const double> scores, std::size_t m) {
    m = std::min(m, scores.size());
    IndexSet order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(m);
    std::ranges::sort(order);
    return order;
}

IndexSet dynamic_select(std::span<const double> scores, const LofParams& params, bool fallback) {
    params.validate();
    if (scores.size() <= params.k) {
        IndexSet all(scores.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    const LofTable table = build_lof_table(scores, params);
    const std::size_t m = count_salient(scores, table, params);
    if (m == 0) {
        return fallback ? top_scoring(scores, params.fallback_keep) : IndexSet{};
    }
    return top_scoring(scores, m);
}

}  // namespace tokrecover
