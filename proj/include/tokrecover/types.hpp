// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tokrecover {

enum class ErrorKind {
    EmptyBundle,
    DimensionMismatch,
    NonFiniteValue,
    DuplicateIndex,
    MissingCls,
    MissingText,
    ShapeMismatch,
    EmptyInput,
    TooFewPoints,
    InvalidParams,
    DuplicatePlacement,
    BadMagic,
    TruncatedPayload,
    MalformedHeader,
    IoFailure,
    RaggedRows,
    NonNumericCell,
    InvalidCounts,
    MissingGrid,
    SizeMismatch,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), m_kind(kind) {}

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

/// Dense row-major matrix of 32-bit reals.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
        : m_rows(rows), m_cols(cols), m_data(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

    std::size_t rows() const noexcept { return m_rows; }
    std::size_t cols() const noexcept { return m_cols; }
    bool empty() const noexcept { return m_data.empty(); }

    std::span<const float> row(std::size_t r) const {
        return {m_data.data() + r * m_cols, m_cols};
    }
    std::span<float> row(std::size_t r) { return {m_data.data() + r * m_cols, m_cols}; }

    float operator()(std::size_t r, std::size_t c) const { return m_data[r * m_cols + c]; }
    float& operator()(std::size_t r, std::size_t c) { return m_data[r * m_cols + c]; }

    std::span<const float> data() const noexcept { return m_data; }
    std::span<float> data() noexcept { return m_data; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<float> m_data;
};

/// Affine map from visual-token space (D) into text-embedding space (Dt).
struct ProjectionMap {
    Matrix weight;                      // Dt x D
    std::optional<std::vector<float>> bias;  // Dt

    std::size_t in_dim() const noexcept { return weight.cols(); }
    std::size_t out_dim() const noexcept { return weight.rows(); }

    friend bool operator==(const ProjectionMap&, const ProjectionMap&) = default;
};

struct GridShape {
    std::size_t rows = 0;
    std::size_t cols = 0;

    friend bool operator==(const GridShape&, const GridShape&) = default;
};

struct TokenBundle {
    Matrix tokens;                        // N x D visual tokens
    std::vector<float> cls;               // D, empty when absent
    std::optional<std::vector<float>> text;
    std::optional<ProjectionMap> proj;
    std::vector<std::uint64_t> original_indices;
    std::optional<GridShape> grid;
    std::map<std::string, std::string> metadata;

    std::size_t size() const noexcept { return tokens.rows(); }
    std::size_t dim() const noexcept { return tokens.cols(); }
    bool has_cls() const noexcept { return !cls.empty(); }

    friend bool operator==(const TokenBundle&, const TokenBundle&) = default;
};

/// Builds a bundle with default indices 0..N-1.
TokenBundle make_bundle(Matrix tokens, std::vector<float> cls);

/// Throws Error unless every bundle invariant holds.
void validate_bundle(const TokenBundle& bundle);

enum class ScoreKind { Visual, Text };

struct ScoreVector {
    std::vector<double> raw;         // softmax over tokens
    std::vector<double> normalized;  // min-max scaled into [0, 1]
    ScoreKind kind = ScoreKind::Visual;

    std::size_t size() const noexcept { return raw.size(); }
};

struct LofParams {
    std::size_t k = 20;
    double tau = 1.0;
    std::size_t fallback_keep = 1;

    void validate() const;
};

/// Sorted set of positions or original indices.
using IndexSet = std::vector<std::size_t>;

struct OutputSlot {
    enum class Kind { Kept, Merged };
    Kind kind = Kind::Kept;
    std::uint64_t index = 0;  // original index (placement for merged slots)
    std::size_t cluster = 0;  // row in merged_tokens, merged slots only

    friend bool operator==(const OutputSlot&, const OutputSlot&) = default;
};

struct SelectionResult {
    std::vector<std::uint64_t> visual_kept;     // S1, original indices
    std::vector<std::uint64_t> text_recovered;  // S2, original indices
    std::vector<std::uint64_t> cluster_seeds;   // original indices
    std::vector<std::uint64_t> clustered;       // remainder merged into clusters
    Matrix merged_tokens;                        // M x D
    std::vector<std::uint64_t> merged_placement;
    std::vector<OutputSlot> output_order;
};

struct ReportParams {
    std::size_t k_lof = 20;
    double tau = 1.0;
    std::size_t fallback_keep = 1;
    std::size_t k_lof2 = 20;
    double tau2 = 1.0;
    std::size_t text_tokens = 0;
};

struct CompressionReport {
    std::size_t n_input = 0;
    std::size_t n_visual_kept = 0;
    std::size_t n_text_recovered = 0;
    std::size_t n_merged = 0;
    std::size_t n_output = 0;
    double retention_ratio = 1.0;
    std::optional<double> flops_before;
    std::optional<double> flops_after;
    std::optional<double> kv_bytes_before;
    std::optional<double> kv_bytes_after;
    std::optional<double> wall_time;  // seconds; absent when timing is disabled
    ReportParams params_used;
};

}  // namespace tokrecover
