// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/buffer_api.hpp"

#include <algorithm>

namespace tokrecover {

TokenBundle bundle_from_view(const BundleView& view) {
    if (view.tokens.size() != view.n * view.d) {
        throw Error(ErrorKind::ShapeMismatch, "token buffer holds " + std::to_string(view.tokens.size()) +
                                                  " values, expected n*d = " + std::to_string(view.n * view.d));
    }
    TokenBundle bundle = make_bundle(Matrix(view.n, view.d, {view.tokens.begin(), view.tokens.end()}),
                                     {view.cls.begin(), view.cls.end()});
    if (!view.text.empty()) {
        bundle.text = std::vector<float>(view.text.begin(), view.text.end());
    }
    if (!view.proj_weight.empty()) {
        if (view.d == 0 || view.proj_weight.size() % view.d != 0) {
            throw Error(ErrorKind::ShapeMismatch, "projection buffer is not a multiple of d");
        }
        bundle.proj = ProjectionMap{Matrix(view.proj_weight.size() / view.d, view.d,
                                           {view.proj_weight.begin(), view.proj_weight.end()}),
                                    std::nullopt};
        if (!view.proj_bias.empty()) {
            bundle.proj->bias = std::vector<float>(view.proj_bias.begin(), view.proj_bias.end());
        }
    } else if (!view.proj_bias.empty()) {
        throw Error(ErrorKind::ShapeMismatch, "projection bias given without a weight");
    }
    validate_bundle(bundle);
    return bundle;
}

BufferCompressResult compress_view(const BundleView& view, std::size_t k_lof, std::size_t k_lof2, double tau) {
    CompressOptions options;
    options.primary.k = k_lof;
    options.primary.tau = tau;
    options.secondary.k = k_lof2;
    options.secondary.tau = tau;
    options.model = cost::ModelConfig::vicuna_7b();
    options.timing = false;

    CompressResult res = compress(bundle_from_view(view), options);
    BufferCompressResult out;
    std::ranges::merge(res.selection.visual_kept, res.selection.text_recovered,
                       std::back_inserter(out.kept_indices));
    out.merged_tokens = std::move(res.selection.merged_tokens);
    out.merged_placement = std::move(res.selection.merged_placement);
    out.report = res.report;
    return out;
}

}  // namespace tokrecover
