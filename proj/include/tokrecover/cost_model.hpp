// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>

namespace tokrecover::cost {

/// Decoder-only transformer shape used for prefill cost estimates.
struct ModelConfig {
    std::size_t layers = 32;
    std::size_t hidden = 4096;
    std::size_t ffn = 11008;
    std::size_t vocab = 32000;
    double bytes_per_param = 2.0;  // 2 fp16, 1 int8, 0.5 int4
    double param_count = 0.0;      // 0 = derive from the shape

    /// LLaMA/Vicuna-7B shape in fp16.
    static ModelConfig vicuna_7b();

    void validate() const;

    /// Supplied param_count, otherwise attention + gated FFN weights plus
    /// input and output embeddings.
    double params() const;
};

/// n * L * (8 d^2 + 6 d d_ff): Q/K/V/O projections and the gated FFN.
double prefill_flops_linear(const ModelConfig& cfg, std::size_t n_tokens);

/// 4 * L * n^2 * d: attention scores and the weighted value sum.
double prefill_flops_attention(const ModelConfig& cfg, std::size_t n_tokens);

/// Total prefill FLOPs (multiply-accumulate counted as two).
double prefill_flops(const ModelConfig& cfg, std::size_t n_tokens);

/// 2 * L * n * d * bytes_per_param.
double kv_cache_bytes(const ModelConfig& cfg, std::size_t n_tokens);

/// JSON object with keys layers, hidden, ffn, and optionally vocab,
/// bytes_per_param, param_count. Missing keys keep the 7B defaults.
ModelConfig load_model_config(const std::filesystem::path& path);

}  // namespace tokrecover::cost
