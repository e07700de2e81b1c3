// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tokrecover/pipeline.hpp"
#include "tokrecover/types.hpp"

// Raw-buffer entry points for foreign-language bindings. Inputs are
// contiguous row-major float32 buffers owned by the caller; they are copied
// once at the boundary. An empty span means "absent".

namespace tokrecover {

struct BundleView {
    std::span<const float> tokens;  // n * d
    std::size_t n = 0;
    std::size_t d = 0;
    std::span<const float> cls;          // d
    std::span<const float> text;         // dt, optional
    std::span<const float> proj_weight;  // dt * d, optional
    std::span<const float> proj_bias;    // dt, optional
};

TokenBundle bundle_from_view(const BundleView& view);

struct BufferCompressResult {
    std::vector<std::uint64_t> kept_indices;  // S1 and S2, ascending
    Matrix merged_tokens;
    std::vector<std::uint64_t> merged_placement;
    CompressionReport report;
};

BufferCompressResult compress_view(const BundleView& view, std::size_t k_lof, std::size_t k_lof2, double tau);

}  // namespace tokrecover
