// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/cost_model.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "tokrecover/types.hpp"

namespace tokrecover::cost {

ModelConfig ModelConfig::vicuna_7b() { return ModelConfig{}; }

void ModelConfig::validate() const {
    if (layers == 0 || hidden == 0 || ffn == 0 || vocab == 0) {
        throw Error(ErrorKind::InvalidParams, "model dimensions must be positive");
    }
    if (!(bytes_per_param > 0.0) || !std::isfinite(bytes_per_param)) {
        throw Error(ErrorKind::InvalidParams, "bytes_per_param must be positive");
    }
    if (param_count < 0.0 || !std::isfinite(param_count)) {
        throw Error(ErrorKind::InvalidParams, "param_count must be non-negative");
    }
}

double ModelConfig::params() const {
    if (param_count > 0.0) {
        return param_count;
    }
    const double d = static_cast<double>(hidden);
    const double per_layer = 4.0 * d * d + 3.0 * d * static_cast<double>(ffn);
    return static_cast<double>(layers) * per_layer + 2.0 * static_cast<double>(vocab) * d;
}

namespace {

void require_tokens(std::size_t n_tokens) {
    if (n_tokens == 0) {
        throw Error(ErrorKind::InvalidParams, "token count must be at least 1");
    }
}

}  // namespace

double prefill_flops_linear(const ModelConfig& cfg, std::size_t n_tokens) {
    cfg.validate();
    require_tokens(n_tokens);
    const double d = static_cast<double>(cfg.hidden);
    const double per_token = 8.0 * d * d + 6.0 * d * static_cast<double>(cfg.ffn);
    return static_cast<double>(n_tokens) * static_cast<double>(cfg.layers) * per_token;
}

double prefill_flops_attention(const ModelConfig& cfg, std::size_t n_tokens) {
    cfg.validate();
    require_tokens(n_tokens);
    const double n = static_cast<double>(n_tokens);
    return 4.0 * static_cast<double>(cfg.layers) * n * n * static_cast<double>(cfg.hidden);
}

double prefill_flops(const ModelConfig& cfg, std::size_t n_tokens) {
    return prefill_flops_linear(cfg, n_tokens) + prefill_flops_attention(cfg, n_tokens);
}

double kv_cache_bytes(const ModelConfig& cfg, std::size_t n_tokens) {
    cfg.validate();
    require_tokens(n_tokens);
    return 2.0 * static_cast<double>(cfg.layers) * static_cast<double>(n_tokens) *
           static_cast<double>(cfg.hidden) * cfg.bytes_per_param;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open model config " + path.string());
    }
    ModelConfig cfg = ModelConfig::vicuna_7b();
    try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        if (!doc.is_object()) {
            throw Error(ErrorKind::MalformedHeader, "model config must be a JSON object");
        }
        cfg.layers = doc.value("layers", cfg.layers);
        cfg.hidden = doc.value("hidden", cfg.hidden);
        cfg.ffn = doc.value("ffn", cfg.ffn);
        cfg.vocab = doc.value("vocab", cfg.vocab);
        cfg.bytes_per_param = doc.value("bytes_per_param", cfg.bytes_per_param);
        cfg.param_count = doc.value("param_count", cfg.param_count);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedHeader, std::string("model config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

}  // namespace tokrecover::cost
