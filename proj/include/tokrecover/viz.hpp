// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "tokrecover/types.hpp"

// Binary portable graymap (P5, maxval 255) renderings of per-token data laid
// out on the patch grid. Pixel (r, c) is original index r * cols + c.

namespace tokrecover::viz {

enum class Mode { Heat, Mask };

inline constexpr std::uint8_t kMaskVisual = 255;
inline constexpr std::uint8_t kMaskText = 160;
inline constexpr std::uint8_t kMaskMerged = 64;

/// Values in [0, 1] map to round(255 * v); values outside are clamped.
std::string render_heat(std::span<const double> values, const std::optional<GridShape>& grid);

/// Three gray levels: visual-kept, text-recovered, merged background.
std::string render_mask(const SelectionResult& selection, const std::optional<GridShape>& grid);

void write_heat(std::span<const double> values, const std::optional<GridShape>& grid,
                const std::filesystem::path& path);
void write_mask(const SelectionResult& selection, const std::optional<GridShape>& grid,
                const std::filesystem::path& path);

}  // namespace tokrecover::viz
