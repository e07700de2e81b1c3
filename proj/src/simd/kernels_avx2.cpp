// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "kernels_internal.hpp"

namespace tokrecover::simd {

namespace {

double dot_avx2(const float* a, const float* b, std::size_t n) {
    // lo holds lanes 0..3, hi holds lanes 4..7 of the reference order.
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 vb = _mm256_loadu_ps(b + i);
        const __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
        const __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
        const __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
        const __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
        lo = _mm256_add_pd(lo, _mm256_mul_pd(a_lo, b_lo));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(a_hi, b_hi));
    }
    alignas(32) double lanes[8];
    _mm256_store_pd(lanes, lo);
    _mm256_store_pd(lanes + 4, hi);
    for (; i < n; ++i) {
        lanes[i & 7] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return reduce_lanes(lanes);
}

void accumulate_avx2(double* acc, const float* x, std::size_t n) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        const __m256 vx = _mm256_loadu_ps(x + j);
        const __m256d x_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vx));
        const __m256d x_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vx, 1));
        _mm256_storeu_pd(acc + j, _mm256_add_pd(_mm256_loadu_pd(acc + j), x_lo));
        _mm256_storeu_pd(acc + j + 4, _mm256_add_pd(_mm256_loadu_pd(acc + j + 4), x_hi));
    }
    for (; j < n; ++j) {
        acc[j] += static_cast<double>(x[j]);
    }
}

constexpr KernelTable kAvx2{Isa::Avx2, &dot_avx2, &accumulate_avx2};

}  // namespace

const KernelTable& avx2_kernels_impl() { return kAvx2; }

}  // namespace tokrecover::simd
