// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/secondary_recovery.hpp"

#include <algorithm>
#include <numeric>

#include "parallel.hpp"
#include "tokrecover/outlier_filter.hpp"
#include "tokrecover/simd/kernels.hpp"

namespace tokrecover {

IndexSet seed_centers(std::span<const double> leftover_scores, const LofParams& params) {
    if (leftover_scores.empty()) {
        throw Error(ErrorKind::EmptyInput, "no leftover tokens to seed clusters from");
    }
    return dynamic_select(leftover_scores, params, /*fallback=*/true);
}

namespace {

void check_seeds(std::span<const std::size_t> seed_ids, std::size_t rows) {
    if (seed_ids.empty()) {
        throw Error(ErrorKind::InvalidParams, "clustering needs at least one seed");
    }
    for (std::size_t i = 0; i < seed_ids.size(); ++i) {
        if (seed_ids[i] >= rows) {
            throw Error(ErrorKind::InvalidParams, "seed row out of range");
        }
        if (i > 0 && seed_ids[i] <= seed_ids[i - 1]) {
            throw Error(ErrorKind::InvalidParams, "seed rows must be strictly ascending");
        }
    }
}

}  // namespace

std::vector<std::size_t> assign_clusters(const Matrix& leftover_tokens, std::span<const std::size_t> seed_ids,
                                         const ComputeOptions& opts) {
    check_seeds(seed_ids, leftover_tokens.rows());
    const std::size_t d = leftover_tokens.cols();
    std::vector<std::size_t> assignment(leftover_tokens.rows());
    const auto& kernels = simd::active();
    detail::parallel_for(leftover_tokens.rows(), opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            if (std::ranges::binary_search(seed_ids, r)) {
                assignment[r] = r;
                continue;
            }
            const float* token = leftover_tokens.row(r).data();
            std::size_t best = seed_ids[0];
            double best_dot = kernels.dot(token, leftover_tokens.row(best).data(), d);
            for (std::size_t s = 1; s < seed_ids.size(); ++s) {
                const double v = kernels.dot(token, leftover_tokens.row(seed_ids[s]).data(), d);
                if (v > best_dot) {
                    best_dot = v;
                    best = seed_ids[s];
                }
            }
            assignment[r] = best;
        }
    });
    return assignment;
}

MergedClusters merge_clusters(const Matrix& leftover_tokens, std::span<const std::size_t> assignment,
                              std::span<const std::size_t> seed_ids,
                              std::span<const std::uint64_t> original_indices) {
    const std::size_t rows = leftover_tokens.rows();
    const std::size_t d = leftover_tokens.cols();
    check_seeds(seed_ids, rows);
    if (assignment.size() != rows || original_indices.size() != rows) {
        throw Error(ErrorKind::SizeMismatch, "assignment and index lengths must match the token rows");
    }

    std::vector<std::vector<std::size_t>> members(seed_ids.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto it = std::ranges::lower_bound(seed_ids, assignment[r]);
        if (it == seed_ids.end() || *it != assignment[r]) {
            throw Error(ErrorKind::InvalidParams, "row assigned to a non-seed");
        }
        members[static_cast<std::size_t>(it - seed_ids.begin())].push_back(r);
    }

    MergedClusters out;
    out.tokens = Matrix(seed_ids.size(), d);
    out.placement.reserve(seed_ids.size());
    const auto& kernels = simd::active();
    std::vector<double> acc(d);
    for (std::size_t c = 0; c < seed_ids.size(); ++c) {
        auto& rows_in = members[c];
        if (assignment[seed_ids[c]] != seed_ids[c]) {
            throw Error(ErrorKind::InvalidParams, "seed is not a member of its own cluster");
        }
        std::ranges::sort(rows_in, [&](std::size_t a, std::size_t b) {
            return original_indices[a] < original_indices[b];
        });
        std::ranges::fill(acc, 0.0);
        for (std::size_t r : rows_in) {
            kernels.accumulate(acc.data(), leftover_tokens.row(r).data(), d);
        }
        const double count = static_cast<double>(rows_in.size());
        auto dst = out.tokens.row(c);
        for (std::size_t j = 0; j < d; ++j) {
            dst[j] = static_cast<float>(acc[j] / count);
        }
        out.placement.push_back(original_indices[seed_ids[c]]);
    }
    return out;
}

}  // namespace tokrecover
