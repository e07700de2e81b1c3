// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"
#include "tokrecover/types.hpp"

namespace tokrecover::simd {

const char* to_string(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

Isa isa_from_string(std::string_view name) {
    if (name == "scalar") return Isa::Scalar;
    if (name == "avx2") return Isa::Avx2;
    throw Error(ErrorKind::InvalidParams, "unknown ISA '" + std::string(name) + "'");
}

const KernelTable* avx2_kernels() {
#if defined(TOKRECOVER_HAVE_AVX2)
    return &avx2_kernels_impl();
#else
    return nullptr;
#endif
}

bool cpu_supports(Isa isa) {
    switch (isa) {
    case Isa::Scalar:
        return true;
    case Isa::Avx2:
#if defined(TOKRECOVER_HAVE_AVX2)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::Scalar};
    if (avx2_kernels() != nullptr && cpu_supports(Isa::Avx2)) {
        out.push_back(Isa::Avx2);
    }
    return out;
}

namespace {

const KernelTable* table_for(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return &scalar_kernels();
    case Isa::Avx2: return cpu_supports(Isa::Avx2) ? avx2_kernels() : nullptr;
    }
    return nullptr;
}

const KernelTable* pick_default() {
    if (const char* env = std::getenv("TOKRECOVER_ISA"); env != nullptr && *env != '\0') {
        const KernelTable* forced = table_for(isa_from_string(env));
        if (forced == nullptr) {
            throw Error(ErrorKind::InvalidParams, std::string("ISA '") + env + "' not available on this CPU");
        }
        return forced;
    }
    return table_for(available_isas().back());
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& active() {
    const KernelTable* table = g_active.load(std::memory_order_acquire);
    if (table == nullptr) {
        const KernelTable* chosen = pick_default();
        g_active.compare_exchange_strong(table, chosen, std::memory_order_acq_rel);
        table = g_active.load(std::memory_order_acquire);
    }
    return *table;
}

void set_active(Isa isa) {
    const KernelTable* table = table_for(isa);
    if (table == nullptr) {
        throw Error(ErrorKind::InvalidParams, std::string("ISA '") + to_string(isa) + "' not available");
    }
    g_active.store(table, std::memory_order_release);
}

}  // namespace tokrecover::simd
