// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "tokrecover/outlier_filter.hpp"
#include "tokrecover/secondary_recovery.hpp"

namespace tokrecover {

std::vector<OutputSlot> order_output(std::span<const std::uint64_t> kept,
                                     std::span<const std::uint64_t> merged_placement) {
    std::vector<OutputSlot> slots;
    slots.reserve(kept.size() + merged_placement.size());
    for (std::uint64_t idx : kept) {
        slots.push_back({OutputSlot::Kind::Kept, idx, 0});
    }
    for (std::size_t c = 0; c < merged_placement.size(); ++c) {
        slots.push_back({OutputSlot::Kind::Merged, merged_placement[c], c});
    }
    std::ranges::sort(slots, [](const OutputSlot& a, const OutputSlot& b) { return a.index < b.index; });
    for (std::size_t i = 1; i < slots.size(); ++i) {
        if (slots[i].index == slots[i - 1].index) {
            throw Error(ErrorKind::DuplicatePlacement,
                        "original index " + std::to_string(slots[i].index) + " placed twice");
        }
    }
    return slots;
}

namespace {

template <class T>
std::vector<T> gather(std::span<const T> values, std::span<const std::size_t> at) {
    std::vector<T> out;
    out.reserve(at.size());
    for (std::size_t i : at) {
        out.push_back(values[i]);
    }
    return out;
}

/// a \ b for ascending sets.
IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::ranges::set_difference(a, b, std::back_inserter(out));
    return out;
}

}  // namespace

CompressResult compress(const TokenBundle& bundle, const CompressOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    validate_bundle(bundle);
    if (!bundle.has_cls()) {
        throw Error(ErrorKind::MissingCls, "compression needs a class token");
    }
    options.primary.validate();
    options.secondary.validate();

    const std::size_t n = bundle.size();
    const std::size_t d = bundle.dim();

    // Canonical order: position p is the row with the p-th smallest original
    // index. All tie-breaks below are by position, hence by original index.
    std::vector<std::size_t> row_of(n);
    std::iota(row_of.begin(), row_of.end(), std::size_t{0});
    std::ranges::sort(row_of, [&](std::size_t a, std::size_t b) {
        return bundle.original_indices[a] < bundle.original_indices[b];
    });
    std::vector<std::uint64_t> index_of(n);
    for (std::size_t p = 0; p < n; ++p) {
        index_of[p] = bundle.original_indices[row_of[p]];
    }

    IndexSet everyone(n);
    std::iota(everyone.begin(), everyone.end(), std::size_t{0});

    // Step 1: visual filter.
    const std::vector<double> vis_logits = visual_logits(bundle, row_of, options.compute);
    const ScoreVector vis = make_score(vis_logits, ScoreKind::Visual);
    const IndexSet s1 = dynamic_select(vis.normalized, options.primary, /*fallback=*/true);
    const IndexSet r1 = set_difference(everyone, s1);

    // Step 2: text recovery, scored and normalized within the remainder only.
    IndexSet s2;
    if (bundle.text && !r1.empty()) {
        const std::vector<std::size_t> r1_rows = gather<std::size_t>(row_of, r1);
        const ScoreVector txt = make_score(text_logits(bundle, r1_rows, options.compute), ScoreKind::Text);
        for (std::size_t i : dynamic_select(txt.normalized, options.primary, /*fallback=*/false)) {
            s2.push_back(r1[i]);
        }
    }
    const IndexSet r2 = set_difference(r1, s2);

    // Step 3: seeded clustering of whatever is left.
    SelectionResult sel;
    if (!r2.empty()) {
        const std::vector<double> r2_logits = gather<double>(vis_logits, r2);
        const ScoreVector r2_score = make_score(r2_logits, ScoreKind::Visual);
        const IndexSet seeds = seed_centers(r2_score.normalized, options.secondary);

        Matrix leftover(r2.size(), d);
        std::vector<std::uint64_t> leftover_index(r2.size());
        for (std::size_t i = 0; i < r2.size(); ++i) {
            std::ranges::copy(bundle.tokens.row(row_of[r2[i]]), leftover.row(i).begin());
            leftover_index[i] = index_of[r2[i]];
        }
        const std::vector<std::size_t> assignment = assign_clusters(leftover, seeds, options.compute);
        MergedClusters merged = merge_clusters(leftover, assignment, seeds, leftover_index);
        for (std::size_t s : seeds) {
            sel.cluster_seeds.push_back(leftover_index[s]);
        }
        sel.clustered = std::move(leftover_index);
        sel.merged_tokens = std::move(merged.tokens);
        sel.merged_placement = std::move(merged.placement);
    } else {
        sel.merged_tokens = Matrix(0, d);
    }

    // Step 4: order-preserving assembly.
    for (std::size_t p : s1) {
        sel.visual_kept.push_back(index_of[p]);
    }
    for (std::size_t p : s2) {
        sel.text_recovered.push_back(index_of[p]);
    }
    std::vector<std::uint64_t> kept;
    std::ranges::merge(sel.visual_kept, sel.text_recovered, std::back_inserter(kept));
    sel.output_order = order_output(kept, sel.merged_placement);

    CompressResult result;
    TokenBundle& out = result.compressed;
    out.tokens = Matrix(sel.output_order.size(), d);
    out.original_indices.reserve(sel.output_order.size());
    // kept indices are a subset of index_of, which is ascending.
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < sel.output_order.size(); ++i) {
        const OutputSlot& slot = sel.output_order[i];
        std::span<const float> src;
        if (slot.kind == OutputSlot::Kind::Kept) {
            while (index_of[cursor] != slot.index) {
                ++cursor;
            }
            src = bundle.tokens.row(row_of[cursor]);
        } else {
            src = sel.merged_tokens.row(slot.cluster);
        }
        std::ranges::copy(src, out.tokens.row(i).begin());
        out.original_indices.push_back(slot.index);
    }
    out.cls = bundle.cls;
    out.text = bundle.text;
    out.proj = bundle.proj;
    out.metadata = bundle.metadata;

    CompressionReport& report = result.report;
    report.n_input = n;
    report.n_visual_kept = sel.visual_kept.size();
    report.n_text_recovered = sel.text_recovered.size();
    report.n_merged = sel.merged_placement.size();
    report.n_output = sel.output_order.size();
    report.retention_ratio = static_cast<double>(report.n_output) / static_cast<double>(n);
    if (options.model) {
        const cost::ModelConfig& cfg = *options.model;
        report.flops_before = cost::prefill_flops(cfg, n + options.text_tokens);
        report.flops_after = cost::prefill_flops(cfg, report.n_output + options.text_tokens);
        report.kv_bytes_before = cost::kv_cache_bytes(cfg, n + options.text_tokens);
        report.kv_bytes_after = cost::kv_cache_bytes(cfg, report.n_output + options.text_tokens);
    }
    report.params_used = ReportParams{options.primary.k,   options.primary.tau, options.primary.fallback_keep,
                                      options.secondary.k, options.secondary.tau, options.text_tokens};

    result.selection = std::move(sel);
    if (options.timing) {
        report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    return result;
}

}  // namespace tokrecover
