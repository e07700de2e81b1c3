// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tokrecover/types.hpp"

namespace tokrecover {

/// Local outlier factor over a one-dimensional score distribution, using the
/// absolute difference of scores as the metric.
///
/// A point whose k-distance is zero (it has at least k exact duplicates) is
/// degenerate: its density is unbounded, so lrd holds +inf and lof is pinned
/// to exactly 1. A non-degenerate point with a degenerate neighbour gets
/// lof = +inf.
struct LofTable {
    std::vector<double> k_distance;
    /// Positions within distance k_distance of each point, itself excluded,
    /// ascending. Ties make a neighbourhood larger than k.
    std::vector<std::vector<std::size_t>> neighborhoods;
    std::vector<double> lrd;
    std::vector<double> lof;
    std::vector<char> degenerate;

    std::size_t size() const noexcept { return lof.size(); }
};

/// Throws TooFewPoints unless scores.size() > params.k.
LofTable build_lof_table(std::span<const double> scores, const LofParams& params);

/// Median; the mean of the two middle values for even lengths.
double median(std::span<const double> values);

/// Number of high-side outliers: lof > tau and score strictly above the median.
std::size_t count_salient(std::span<const double> scores, const LofTable& table, const LofParams& params);

/// Positions of the m highest scores, ties toward the lower position,
/// returned ascending.
IndexSet top_scoring(std::span<const double> scores, std::size_t m);

/// Dynamic scale filter. Keeps the top-m scores where m = count_salient. When
/// m is zero and fallback is set, keeps the top fallback_keep scores instead.
/// Inputs of at most k points are kept whole.
IndexSet dynamic_select(std::span<const double> scores, const LofParams& params, bool fallback);

}  // namespace tokrecover
