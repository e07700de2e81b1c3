// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tokrecover/simd/kernels.hpp"

namespace tokrecover::simd {

inline double reduce_lanes(const double (&lanes)[8]) {
    return ((lanes[0] + lanes[4]) + (lanes[1] + lanes[5])) +
           ((lanes[2] + lanes[6]) + (lanes[3] + lanes[7]));
}

#if defined(TOKRECOVER_HAVE_AVX2)
const KernelTable& avx2_kernels_impl();
#endif

}  // namespace tokrecover::simd
