// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace tokrecover::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitOracle = 4;

/// Entry point behind the `tokrecover` executable; usable in-process.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tokrecover::cli
