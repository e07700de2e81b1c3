// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tokrecover/outlier_filter.hpp"
#include "tokrecover/secondary_recovery.hpp"
#include "tokrecover/types.hpp"

// Synthetic bundles with planted ground truth, and brute-force reference
// implementations of the LOF table, cluster assignment and cluster merge.
// Nothing here calls into the optimized filter or recovery code.

namespace tokrecover::harness {

/// Portable pseudo-random source. Uses std::mt19937_64 (whose output sequence
/// is fixed by the standard), 53-bit uniform doubles u = (x >> 11) * 2^-53,
/// and the Box-Muller cosine branch for normals (two uniforms per normal).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : m_engine(seed) {}

    std::uint64_t next() { return m_engine(); }
    double uniform();             // [0, 1)
    double normal();              // N(0, 1)
    std::size_t below(std::size_t bound);  // [0, bound), bound > 0

private:
    std::mt19937_64 m_engine;
};

inline constexpr const char* kGeneratorId = "tokrecover-synth/1 mt19937_64 u53 box-muller";

struct SyntheticSpec {
    std::uint64_t seed = 0;
    std::size_t n = 576;
    std::size_t d = 64;
    std::size_t dt = 32;  // 0 = no text embedding
    std::size_t n_visual_salient = 20;
    std::size_t n_text_salient = 20;
    double noise_sigma = 1.0;
    /// Logit boost of a planted token, scaled per token by a factor in [1, 2).
    double visual_gain = 6.0;
    double text_gain = 6.0;
    /// Background patches repeat a few prototypes on the class block.
    std::size_t prototypes = 8;
    std::size_t rare_prototypes = 4;
    std::size_t rare_max_members = 6;
};

struct GroundTruth {
    IndexSet visual;  // V*
    IndexSet text;    // T*
};

struct Synthetic {
    TokenBundle bundle;
    GroundTruth truth;
};

/// Deterministic bundle for a seed.
///
/// Coordinates split into three blocks: text (the first max(1, d/8)), class
/// (the next max(1, d/4)) and noise (the rest). The class token lives on the
/// class block and the projection rows read by the text embedding only see the
/// text block.
///
/// Every token copies one background prototype onto the class block (a few
/// common prototypes plus some rare ones with at most rare_max_members
/// members) and draws isotropic noise of scale noise_sigma on the noise block.
/// Tokens sharing a prototype therefore have exactly equal visual similarity,
/// and everything but T* has exactly constant text similarity. V* tokens add a
/// large component along the class token; T* tokens add one along the
/// preimage of the text direction. A perfect-square n gets a square grid.
Synthetic gen_synthetic(const SyntheticSpec& spec);

/// Direct O(n^2) transcription of k-distance, reachability density and LOF,
/// with the same tie and degenerate-point conventions as LofTable.
LofTable oracle_lof(std::span<const double> scores, std::size_t k);

/// Exhaustive dot-product argmax per row, seeds kept in their own cluster,
/// ties to the lowest seed.
std::vector<std::size_t> oracle_assign(const Matrix& tokens, std::span<const std::size_t> seeds);

/// Per-cluster mean summed member by member in ascending original index.
MergedClusters oracle_merge(const Matrix& tokens, std::span<const std::size_t> assignment,
                            std::span<const std::size_t> seeds, std::span<const std::uint64_t> original_indices);

/// Elementwise agreement of two LOF tables: identical neighbourhoods and
/// degenerate flags, reals within tol * max(1, |expected|) (infinities must
/// match exactly).
bool lof_tables_match(const LofTable& actual, const LofTable& expected, double tol);

struct OracleCheckSummary {
    std::size_t lof_cases = 0;
    std::size_t lof_failures = 0;
    std::size_t assign_cases = 0;
    std::size_t assign_failures = 0;
    std::size_t merge_cases = 0;
    std::size_t merge_failures = 0;

    bool ok() const { return lof_failures == 0 && assign_failures == 0 && merge_failures == 0; }
};

/// Randomized equivalence runs of the optimized LOF, assignment and merge
/// against the oracles above.
OracleCheckSummary run_oracle_checks(std::uint64_t seed, std::size_t cases);

}  // namespace tokrecover::harness
