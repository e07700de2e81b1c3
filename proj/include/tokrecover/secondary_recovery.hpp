// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tokrecover/scoring.hpp"
#include "tokrecover/types.hpp"

namespace tokrecover {

/// Cluster seeds among the leftover tokens: the dynamic scale filter over
/// their visual scores with fallback on, so there is always at least one.
IndexSet seed_centers(std::span<const double> leftover_scores, const LofParams& params);

/// For each leftover row, the seed row with the largest dot product.
/// Seeds always belong to their own cluster; other ties go to the lowest seed.
/// Seeds are fixed, there is no re-centering pass.
std::vector<std::size_t> assign_clusters(const Matrix& leftover_tokens, std::span<const std::size_t> seed_ids,
                                         const ComputeOptions& opts = {});

struct MergedClusters {
    Matrix tokens;                        // one row per seed, in seed order
    std::vector<std::uint64_t> placement; // original index of each seed
};

/// Replaces each cluster by the mean of its members. Members are summed in
/// ascending original-index order so the result does not depend on row order.
MergedClusters merge_clusters(const Matrix& leftover_tokens, std::span<const std::size_t> assignment,
                              std::span<const std::size_t> seed_ids,
                              std::span<const std::uint64_t> original_indices);

}  // namespace tokrecover
