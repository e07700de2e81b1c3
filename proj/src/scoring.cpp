// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"
#include "tokrecover/simd/kernels.hpp"

namespace tokrecover {

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw Error(ErrorKind::EmptyInput, "softmax of an empty sequence");
    }
    double max_logit = logits[0];
    for (double v : logits) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFiniteValue, "softmax input is not finite");
        }
        max_logit = std::max(max_logit, v);
    }
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        sum += out[i];
    }
    for (double& v : out) {
        v /= sum;
    }
    return out;
}

std::vector<double> minmax_normalize(std::span<const double> values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) {
        return out;
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (range == 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        // Clamp guards the last-ulp overshoot of the division.
        out[i] = std::clamp((values[i] - lo) / range, 0.0, 1.0);
    }
    return out;
}

ScoreVector make_score(std::span<const double> logits, ScoreKind kind) {
    ScoreVector score;
    score.kind = kind;
    score.raw = softmax(logits);
    score.normalized = minmax_normalize(score.raw);
    return score;
}

Matrix project_tokens(const Matrix& tokens, const ProjectionMap& proj, const ComputeOptions& opts) {
    if (proj.in_dim() != tokens.cols()) {
        throw Error(ErrorKind::ShapeMismatch,
                    "projection expects dimension " + std::to_string(proj.in_dim()) + ", tokens have " +
                        std::to_string(tokens.cols()));
    }
    if (proj.bias && proj.bias->size() != proj.out_dim()) {
        throw Error(ErrorKind::ShapeMismatch, "projection bias length differs from output dimension");
    }
    const std::size_t out_dim = proj.out_dim();
    Matrix out(tokens.rows(), out_dim);
    const auto& kernels = simd::active();
    detail::parallel_for(tokens.rows(), opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const auto token = tokens.row(r);
            auto dst = out.row(r);
            for (std::size_t o = 0; o < out_dim; ++o) {
                double v = kernels.dot(proj.weight.row(o).data(), token.data(), token.size());
                if (proj.bias) {
                    v += static_cast<double>((*proj.bias)[o]);
                }
                dst[o] = static_cast<float>(v);
            }
        }
    });
    return out;
}

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

std::vector<double> scaled_dots(const Matrix& tokens, std::span<const std::size_t> rows,
                                std::span<const float> query, const ComputeOptions& opts) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(query.size()));
    std::vector<double> out(rows.size());
    const auto& kernels = simd::active();
    detail::parallel_for(rows.size(), opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = kernels.dot(tokens.row(rows[i]).data(), query.data(), query.size()) * scale;
        }
    });
    return out;
}

void check_rows(const TokenBundle& bundle, std::span<const std::size_t> rows) {
    for (std::size_t r : rows) {
        if (r >= bundle.size()) {
            throw Error(ErrorKind::ShapeMismatch, "row " + std::to_string(r) + " out of range");
        }
    }
}

}  // namespace

std::vector<double> visual_logits(const TokenBundle& bundle, std::span<const std::size_t> rows,
                                  const ComputeOptions& opts) {
    if (!bundle.has_cls()) {
        throw Error(ErrorKind::MissingCls, "visual score needs a class token");
    }
    if (bundle.cls.size() != bundle.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "cls dimension differs from tokens");
    }
    check_rows(bundle, rows);
    return scaled_dots(bundle.tokens, rows, bundle.cls, opts);
}

std::vector<double> visual_logits(const TokenBundle& bundle, const ComputeOptions& opts) {
    return visual_logits(bundle, all_rows(bundle.size()), opts);
}

std::vector<double> text_logits(const TokenBundle& bundle, std::span<const std::size_t> rows,
                                const ComputeOptions& opts) {
    if (!bundle.text) {
        throw Error(ErrorKind::MissingText, "text score needs a text embedding");
    }
    check_rows(bundle, rows);
    const std::vector<float>& text = *bundle.text;
    if (!bundle.proj) {
        if (text.size() != bundle.dim()) {
            throw Error(ErrorKind::DimensionMismatch,
                        "text dimension differs from tokens and no projection is present");
        }
        return scaled_dots(bundle.tokens, rows, text, opts);
    }
    if (bundle.proj->out_dim() != text.size()) {
        throw Error(ErrorKind::DimensionMismatch, "projection output dimension differs from text");
    }
    Matrix subset(rows.size(), bundle.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::ranges::copy(bundle.tokens.row(rows[i]), subset.row(i).begin());
    }
    const Matrix projected = project_tokens(subset, *bundle.proj, opts);
    return scaled_dots(projected, all_rows(rows.size()), text, opts);
}

std::vector<double> text_logits(const TokenBundle& bundle, const ComputeOptions& opts) {
    return text_logits(bundle, all_rows(bundle.size()), opts);
}

ScoreVector visual_score(const TokenBundle& bundle, const ComputeOptions& opts) {
    return make_score(visual_logits(bundle, opts), ScoreKind::Visual);
}

ScoreVector text_score(const TokenBundle& bundle, const ComputeOptions& opts) {
    return make_score(text_logits(bundle, opts), ScoreKind::Text);
}

}  // namespace tokrecover
