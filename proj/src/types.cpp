// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tokrecover {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::EmptyBundle: return "empty-bundle";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonFiniteValue: return "non-finite-value";
    case ErrorKind::DuplicateIndex: return "duplicate-index";
    case ErrorKind::MissingCls: return "missing-cls";
    case ErrorKind::MissingText: return "missing-text";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::TooFewPoints: return "too-few-points";
    case ErrorKind::InvalidParams: return "invalid-params";
    case ErrorKind::DuplicatePlacement: return "duplicate-placement";
    case ErrorKind::BadMagic: return "bad-magic";
    case ErrorKind::TruncatedPayload: return "truncated-payload";
    case ErrorKind::MalformedHeader: return "malformed-header";
    case ErrorKind::IoFailure: return "io-failure";
    case ErrorKind::RaggedRows: return "ragged-rows";
    case ErrorKind::NonNumericCell: return "non-numeric-cell";
    case ErrorKind::InvalidCounts: return "invalid-counts";
    case ErrorKind::MissingGrid: return "missing-grid";
    case ErrorKind::SizeMismatch: return "size-mismatch";
    }
    return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : m_rows(rows), m_cols(cols), m_data(std::move(data)) {
    if (m_data.size() != rows * cols) {
        throw Error(ErrorKind::ShapeMismatch,
                    "matrix data has " + std::to_string(m_data.size()) + " values, expected " +
                        std::to_string(rows * cols));
    }
}

TokenBundle make_bundle(Matrix tokens, std::vector<float> cls) {
    TokenBundle bundle;
    bundle.original_indices.resize(tokens.rows());
    std::iota(bundle.original_indices.begin(), bundle.original_indices.end(), std::uint64_t{0});
    bundle.tokens = std::move(tokens);
    bundle.cls = std::move(cls);
    return bundle;
}

namespace {

void require_finite(std::span<const float> values, const char* what) {
    for (float v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFiniteValue, std::string(what) + " contains NaN or Inf");
        }
    }
}

}  // namespace

void validate_bundle(const TokenBundle& bundle) {
    const std::size_t n = bundle.size();
    const std::size_t d = bundle.dim();
    if (n == 0 || d == 0) {
        throw Error(ErrorKind::EmptyBundle, "bundle has no tokens");
    }
    require_finite(bundle.tokens.data(), "tokens");

    if (bundle.has_cls()) {
        if (bundle.cls.size() != d) {
            throw Error(ErrorKind::DimensionMismatch,
                        "cls has dimension " + std::to_string(bundle.cls.size()) +
                            ", tokens have " + std::to_string(d));
        }
        require_finite(bundle.cls, "cls");
    }

    if (bundle.original_indices.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "original_indices length differs from token count");
    }
    std::vector<std::uint64_t> sorted = bundle.original_indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error(ErrorKind::DuplicateIndex, "original_indices are not unique");
    }

    if (bundle.grid && bundle.grid->rows * bundle.grid->cols != n) {
        throw Error(ErrorKind::DimensionMismatch, "grid does not cover the token count");
    }

    if (bundle.proj) {
        const ProjectionMap& proj = *bundle.proj;
        if (proj.in_dim() != d || proj.out_dim() == 0) {
            throw Error(ErrorKind::DimensionMismatch, "projection input dimension differs from tokens");
        }
        require_finite(proj.weight.data(), "projection weight");
        if (proj.bias) {
            if (proj.bias->size() != proj.out_dim()) {
                throw Error(ErrorKind::DimensionMismatch, "projection bias length differs from output dimension");
            }
            require_finite(*proj.bias, "projection bias");
        }
    }

    if (bundle.text) {
        const std::size_t dt = bundle.text->size();
        if (dt == 0) {
            throw Error(ErrorKind::DimensionMismatch, "text embedding is empty");
        }
        if (bundle.proj) {
            if (bundle.proj->out_dim() != dt) {
                throw Error(ErrorKind::DimensionMismatch, "projection output dimension differs from text");
            }
        } else if (dt != d) {
            throw Error(ErrorKind::DimensionMismatch,
                        "text dimension " + std::to_string(dt) + " differs from token dimension " +
                            std::to_string(d) + " and no projection is present");
        }
        require_finite(*bundle.text, "text");
    }
}

void LofParams::validate() const {
    if (k < 1) {
        throw Error(ErrorKind::InvalidParams, "LOF k must be at least 1");
    }
    if (!(tau >= 1.0) || !std::isfinite(tau)) {
        throw Error(ErrorKind::InvalidParams, "LOF tau must be a finite value >= 1");
    }
    if (fallback_keep < 1) {
        throw Error(ErrorKind::InvalidParams, "fallback_keep must be at least 1");
    }
}

}  // namespace tokrecover
