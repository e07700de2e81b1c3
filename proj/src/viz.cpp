// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/viz.hpp"

#include <algorithm>
#include <cmath>

#include "tokrecover/tensor_io.hpp"

namespace tokrecover::viz {

namespace {

const GridShape& require_grid(const std::optional<GridShape>& grid) {
    if (!grid) {
        throw Error(ErrorKind::MissingGrid, "bundle has no patch grid");
    }
    return *grid;
}

std::string header(const GridShape& grid) {
    return "P5\n" + std::to_string(grid.cols) + " " + std::to_string(grid.rows) + "\n255\n";
}

}  // namespace

std::string render_heat(std::span<const double> values, const std::optional<GridShape>& grid) {
    const GridShape& g = require_grid(grid);
    if (g.rows * g.cols != values.size()) {
        throw Error(ErrorKind::SizeMismatch, "grid " + std::to_string(g.rows) + "x" + std::to_string(g.cols) +
                                                 " does not match " + std::to_string(values.size()) + " values");
    }
    std::string out = header(g);
    for (double v : values) {
        const double clamped = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
        out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(clamped * 255.0))));
    }
    return out;
}

std::string render_mask(const SelectionResult& selection, const std::optional<GridShape>& grid) {
    const GridShape& g = require_grid(grid);
    const std::size_t cells = g.rows * g.cols;
    const std::size_t covered =
        selection.visual_kept.size() + selection.text_recovered.size() + selection.clustered.size();
    if (covered != cells) {
        throw Error(ErrorKind::SizeMismatch, "selection covers " + std::to_string(covered) + " tokens, grid has " +
                                                 std::to_string(cells) + " cells");
    }
    std::string raster(cells, '\0');
    auto paint = [&](std::span<const std::uint64_t> indices, std::uint8_t level) {
        for (std::uint64_t idx : indices) {
            if (idx >= cells) {
                throw Error(ErrorKind::SizeMismatch, "original index " + std::to_string(idx) + " outside the grid");
            }
            raster[idx] = static_cast<char>(level);
        }
    };
    paint(selection.clustered, kMaskMerged);
    paint(selection.text_recovered, kMaskText);
    paint(selection.visual_kept, kMaskVisual);
    return header(g) + raster;
}

void write_heat(std::span<const double> values, const std::optional<GridShape>& grid,
                const std::filesystem::path& path) {
    io::write_file(path, render_heat(values, grid));
}

void write_mask(const SelectionResult& selection, const std::optional<GridShape>& grid,
                const std::filesystem::path& path) {
    io::write_file(path, render_mask(selection, grid));
}

}  // namespace tokrecover::viz
