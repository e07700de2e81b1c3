// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tokrecover/types.hpp"

namespace tokrecover {

struct ComputeOptions {
    /// Worker threads for per-token dot products. 0 = hardware concurrency.
    /// Results are bit-identical for every value.
    std::size_t threads = 1;
};

/// Softmax with max subtraction; the normalizing sum runs in index order.
std::vector<double> softmax(std::span<const double> logits);

/// (x - min) / (max - min); all zeros when the input is constant.
std::vector<double> minmax_normalize(std::span<const double> values);

/// softmax + min-max over one set of logits.
ScoreVector make_score(std::span<const double> logits, ScoreKind kind);

/// Row i of the result is weight * tokens_i (+ bias), rounded to float.
Matrix project_tokens(const Matrix& tokens, const ProjectionMap& proj, const ComputeOptions& opts = {});

/// Scaled class-token similarity (tokens_r . cls) / sqrt(D) for the given rows.
std::vector<double> visual_logits(const TokenBundle& bundle, std::span<const std::size_t> rows,
                                  const ComputeOptions& opts = {});
std::vector<double> visual_logits(const TokenBundle& bundle, const ComputeOptions& opts = {});

/// Scaled text similarity (proj(tokens_r) . text) / sqrt(Dt) for the given
/// rows. With no projection the text must share the token dimension.
std::vector<double> text_logits(const TokenBundle& bundle, std::span<const std::size_t> rows,
                                const ComputeOptions& opts = {});
std::vector<double> text_logits(const TokenBundle& bundle, const ComputeOptions& opts = {});

ScoreVector visual_score(const TokenBundle& bundle, const ComputeOptions& opts = {});
ScoreVector text_score(const TokenBundle& bundle, const ComputeOptions& opts = {});

}  // namespace tokrecover
