// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tokrecover/cost_model.hpp"
#include "tokrecover/scoring.hpp"
#include "tokrecover/types.hpp"

namespace tokrecover {

struct CompressOptions {
    LofParams primary;    // visual filter and text recovery
    LofParams secondary;  // cluster seeding among the leftovers
    ComputeOptions compute;
    /// When set, the report carries prefill FLOPs and KV-cache estimates.
    std::optional<cost::ModelConfig> model;
    /// Prompt text tokens added to both sides of the cost estimate.
    std::size_t text_tokens = 60;
    bool timing = true;
};

struct CompressResult {
    SelectionResult selection;
    TokenBundle compressed;
    CompressionReport report;
};

/// Visual filter, text-guided recovery, then seeded clustering of the
/// remainder. The output keeps every surviving token at its original
/// position; each merged token sits at its seed's original index.
///
/// Rows are processed in ascending original-index order, so permuting the
/// input rows (with their indices) does not change the result.
CompressResult compress(const TokenBundle& bundle, const CompressOptions& options = {});

/// Interleaves kept indices and merged placements in ascending original
/// index. Throws DuplicatePlacement if any index appears twice.
std::vector<OutputSlot> order_output(std::span<const std::uint64_t> kept,
                                     std::span<const std::uint64_t> merged_placement);

}  // namespace tokrecover
