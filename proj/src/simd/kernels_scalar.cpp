// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels_internal.hpp"

namespace tokrecover::simd {

namespace {

double dot_scalar(const float* a, const float* b, std::size_t n) {
    double lanes[8] = {};
    for (std::size_t i = 0; i < n; ++i) {
        lanes[i & 7] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return reduce_lanes(lanes);
}

void accumulate_scalar(double* acc, const float* x, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        acc[j] += static_cast<double>(x[j]);
    }
}

constexpr KernelTable kScalar{Isa::Scalar, &dot_scalar, &accumulate_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace tokrecover::simd
