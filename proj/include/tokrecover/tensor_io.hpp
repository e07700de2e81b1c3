// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tokrecover/types.hpp"

// TKB1 bundle container:
//
//   bytes 0..3   magic "TKB1"
//   bytes 4..11  header length H, unsigned 64-bit little-endian
//   next H bytes UTF-8 JSON header
//   remainder    payload of little-endian float32 tensors, row-major
//
// The header lists each tensor as {"name", "shape", "offset", "dtype"} with
// offsets relative to the payload start. "tokens" [N, D] and "cls" [D] are
// required; "text" [Dt], "proj_w" [Dt, D] and "proj_b" [Dt] are optional.
// "original_indices" (default 0..N-1), "grid" [rows, cols] and a string map
// "metadata" are optional top-level keys.

namespace tokrecover::io {

inline constexpr char kBundleMagic[4] = {'T', 'K', 'B', '1'};

std::string encode_bundle(const TokenBundle& bundle);
TokenBundle decode_bundle(std::string_view bytes);

TokenBundle read_bundle(const std::filesystem::path& path);
void write_bundle(const TokenBundle& bundle, const std::filesystem::path& path);

/// Comma-separated rows of numbers, no quoting. Blank lines are skipped.
Matrix parse_csv_matrix(std::string_view text);
Matrix read_csv_matrix(const std::filesystem::path& path);

/// Flat "key: value" text with a fixed key order. FLOPs and byte counts use
/// scientific notation with 6 significant digits.
std::string format_report(const CompressionReport& report);
void write_report(const CompressionReport& report, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace tokrecover::io
