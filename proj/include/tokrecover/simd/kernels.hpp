// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Inner-loop kernels with a scalar reference and ISA-specific variants.
//
// Every variant must produce bit-identical results to the scalar reference.
// This is achievable without giving up vector width because a product of two
// floats is exact in double precision: only the summation order matters, and
// it is pinned below.
//
// Dot product order: element i is accumulated (in double) into lane i % 8,
// in increasing i. The eight lanes are then reduced as
//     ((l0 + l4) + (l1 + l5)) + ((l2 + l6) + (l3 + l7)).

namespace tokrecover::simd {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);
Isa isa_from_string(std::string_view name);

struct KernelTable {
    Isa isa;
    /// Dot product of two float vectors accumulated in double.
    double (*dot)(const float* a, const float* b, std::size_t n);
    /// acc[j] += x[j] for j < n, widened to double.
    void (*accumulate)(double* acc, const float* x, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports(Isa isa);

/// ISAs that are both compiled in and supported by the running CPU.
std::vector<Isa> available_isas();

/// The table used by the library. Picked on first use: the TOKRECOVER_ISA
/// environment variable if set, otherwise the widest supported ISA.
const KernelTable& active();

/// Overrides the active table process-wide. Throws if unavailable.
void set_active(Isa isa);

inline double dot(std::span<const float> a, std::span<const float> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void accumulate(std::span<double> acc, std::span<const float> x) {
    active().accumulate(acc.data(), x.data(), x.size());
}

}  // namespace tokrecover::simd
