// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace tokrecover::io {

using nlohmann::json;

namespace {

constexpr std::size_t kPreambleSize = 12;

void put_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

std::uint64_t get_u64_le(std::string_view bytes) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]);
    }
    return v;
}

void put_floats_le(std::string& out, std::span<const float> values) {
    for (float f : values) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
        for (int i = 0; i < 4; ++i) {
            out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
        }
    }
}

std::vector<float> get_floats_le(std::string_view bytes, std::size_t count) {
    std::vector<float> out(count);
    for (std::size_t e = 0; e < count; ++e) {
        std::uint32_t bits = 0;
        for (int i = 3; i >= 0; --i) {
            bits = (bits << 8) | static_cast<unsigned char>(bytes[4 * e + static_cast<std::size_t>(i)]);
        }
        out[e] = std::bit_cast<float>(bits);
    }
    return out;
}

struct TensorEntry {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::uint64_t offset = 0;
    std::uint64_t bytes = 0;
};

bool default_indices(const std::vector<std::uint64_t>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] != i) return false;
    }
    return true;
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::MalformedHeader, what); }

std::vector<TensorEntry> parse_tensor_table(const json& header, std::uint64_t payload_len) {
    const auto it = header.find("tensors");
    if (it == header.end() || !it->is_array()) {
        malformed("header has no tensor table");
    }
    std::vector<TensorEntry> entries;
    for (const json& t : *it) {
        if (!t.is_object()) malformed("tensor entry is not an object");
        TensorEntry e;
        const auto name = t.find("name");
        const auto shape = t.find("shape");
        const auto offset = t.find("offset");
        if (name == t.end() || !name->is_string()) malformed("tensor entry without a name");
        e.name = name->get<std::string>();
        if (const auto dtype = t.find("dtype"); dtype != t.end() && *dtype != "float32") {
            malformed("tensor '" + e.name + "' has unsupported dtype");
        }
        if (shape == t.end() || !shape->is_array()) malformed("tensor '" + e.name + "' has no shape");
        if (offset == t.end() || !offset->is_number_unsigned()) {
            malformed("tensor '" + e.name + "' has no valid offset");
        }
        e.offset = offset->get<std::uint64_t>();
        std::uint64_t elements = 1;
        for (const json& dim : *shape) {
            if (!dim.is_number_unsigned()) malformed("tensor '" + e.name + "' has a bad dimension");
            const auto v = dim.get<std::uint64_t>();
            if (v != 0 && elements > std::numeric_limits<std::uint64_t>::max() / 4 / v) {
                throw Error(ErrorKind::TruncatedPayload, "tensor '" + e.name + "' is larger than the payload");
            }
            elements *= v;
            e.shape.push_back(v);
        }
        e.bytes = elements * 4;
        if (e.offset > payload_len || e.bytes > payload_len - e.offset) {
            throw Error(ErrorKind::TruncatedPayload,
                        "tensor '" + e.name + "' spans " + std::to_string(e.bytes) + " bytes at offset " +
                            std::to_string(e.offset) + " but the payload holds " + std::to_string(payload_len));
        }
        for (const TensorEntry& other : entries) {
            if (other.name == e.name) malformed("tensor '" + e.name + "' listed twice");
        }
        entries.push_back(std::move(e));
    }

    std::vector<const TensorEntry*> by_offset;
    for (const auto& e : entries) by_offset.push_back(&e);
    std::ranges::sort(by_offset, [](auto* a, auto* b) { return a->offset < b->offset; });
    for (std::size_t i = 1; i < by_offset.size(); ++i) {
        if (by_offset[i - 1]->offset + by_offset[i - 1]->bytes > by_offset[i]->offset) {
            malformed("tensors '" + by_offset[i - 1]->name + "' and '" + by_offset[i]->name + "' overlap");
        }
    }
    return entries;
}

const TensorEntry* find_entry(const std::vector<TensorEntry>& entries, std::string_view name) {
    for (const auto& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

const TensorEntry& require_rank(const TensorEntry* e, std::string_view name, std::size_t rank) {
    if (e == nullptr) malformed("required tensor '" + std::string(name) + "' missing");
    if (e->shape.size() != rank) {
        malformed("tensor '" + std::string(name) + "' must have rank " + std::to_string(rank));
    }
    return *e;
}

}  // namespace

std::string encode_bundle(const TokenBundle& bundle) {
    validate_bundle(bundle);
    if (!bundle.has_cls()) {
        throw Error(ErrorKind::MissingCls, "TKB1 bundles always carry a class token");
    }
    std::string payload;
    json tensors = json::array();
    auto add = [&](const char* name, std::vector<std::uint64_t> shape, std::span<const float> values) {
        tensors.push_back({{"name", name}, {"shape", shape}, {"offset", payload.size()}, {"dtype", "float32"}});
        put_floats_le(payload, values);
    };
    add("tokens", {bundle.size(), bundle.dim()}, bundle.tokens.data());
    add("cls", {bundle.cls.size()}, bundle.cls);
    if (bundle.text) {
        add("text", {bundle.text->size()}, *bundle.text);
    }
    if (bundle.proj) {
        add("proj_w", {bundle.proj->out_dim(), bundle.proj->in_dim()}, bundle.proj->weight.data());
        if (bundle.proj->bias) {
            add("proj_b", {bundle.proj->bias->size()}, *bundle.proj->bias);
        }
    }

    json header = {{"tensors", tensors}};
    if (!default_indices(bundle.original_indices)) {
        header["original_indices"] = bundle.original_indices;
    }
    if (bundle.grid) {
        header["grid"] = {bundle.grid->rows, bundle.grid->cols};
    }
    if (!bundle.metadata.empty()) {
        header["metadata"] = bundle.metadata;
    }
    const std::string header_text = header.dump();

    std::string out(kBundleMagic, 4);
    put_u64_le(out, header_text.size());
    out += header_text;
    out += payload;
    return out;
}

TokenBundle decode_bundle(std::string_view bytes) {
    if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4, kBundleMagic)) {
        throw Error(ErrorKind::BadMagic, "not a TKB1 file");
    }
    if (bytes.size() < kPreambleSize) {
        malformed("file ends inside the header length field");
    }
    const std::uint64_t header_len = get_u64_le(bytes.substr(4, 8));
    if (header_len > bytes.size() - kPreambleSize) {
        malformed("declared header length exceeds the file");
    }
    const std::string_view header_text = bytes.substr(kPreambleSize, header_len);
    const std::string_view payload = bytes.substr(kPreambleSize + header_len);

    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::parse_error& e) {
        malformed(std::string("header is not valid JSON: ") + e.what());
    }
    if (!header.is_object()) malformed("header is not a JSON object");

    const std::vector<TensorEntry> entries = parse_tensor_table(header, payload.size());
    for (const auto& e : entries) {
        static constexpr std::string_view known[] = {"tokens", "cls", "text", "proj_w", "proj_b"};
        if (std::ranges::find(known, e.name) == std::end(known)) {
            malformed("unknown tensor '" + e.name + "'");
        }
    }
    auto load = [&](const TensorEntry& e) {
        return get_floats_le(payload.substr(e.offset, e.bytes), e.bytes / 4);
    };

    const TensorEntry& tok = require_rank(find_entry(entries, "tokens"), "tokens", 2);
    const TensorEntry& cls = require_rank(find_entry(entries, "cls"), "cls", 1);
    TokenBundle bundle;
    bundle.tokens = Matrix(tok.shape[0], tok.shape[1], load(tok));
    bundle.cls = load(cls);
    if (const TensorEntry* text = find_entry(entries, "text")) {
        bundle.text = load(require_rank(text, "text", 1));
    }
    const TensorEntry* proj_w = find_entry(entries, "proj_w");
    const TensorEntry* proj_b = find_entry(entries, "proj_b");
    if (proj_b != nullptr && proj_w == nullptr) malformed("proj_b without proj_w");
    if (proj_w != nullptr) {
        require_rank(proj_w, "proj_w", 2);
        ProjectionMap proj{Matrix(proj_w->shape[0], proj_w->shape[1], load(*proj_w)), std::nullopt};
        if (proj_b != nullptr) proj.bias = load(require_rank(proj_b, "proj_b", 1));
        bundle.proj = std::move(proj);
    }

    try {
        if (const auto it = header.find("original_indices"); it != header.end()) {
            bundle.original_indices = it->get<std::vector<std::uint64_t>>();
        } else {
            bundle.original_indices.resize(bundle.size());
            for (std::size_t i = 0; i < bundle.size(); ++i) bundle.original_indices[i] = i;
        }
        if (const auto it = header.find("grid"); it != header.end()) {
            const auto g = it->get<std::vector<std::size_t>>();
            if (g.size() != 2) malformed("grid must be [rows, cols]");
            bundle.grid = GridShape{g[0], g[1]};
        }
        if (const auto it = header.find("metadata"); it != header.end()) {
            bundle.metadata = it->get<std::map<std::string, std::string>>();
        }
    } catch (const json::exception& e) {
        malformed(std::string("bad header field: ") + e.what());
    }

    validate_bundle(bundle);
    return bundle;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw Error(ErrorKind::IoFailure, "read failed on " + path.string());
    }
    return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
        throw Error(ErrorKind::IoFailure, "write failed on " + path.string());
    }
}

TokenBundle read_bundle(const std::filesystem::path& path) { return decode_bundle(read_file(path)); }

void write_bundle(const TokenBundle& bundle, const std::filesystem::path& path) {
    write_file(path, encode_bundle(bundle));
}

Matrix parse_csv_matrix(std::string_view text) {
    std::vector<float> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        std::size_t row_cols = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            std::string cell(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
            const auto first = cell.find_first_not_of(" \t");
            const auto last = cell.find_last_not_of(" \t");
            cell = first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1);
            char* end = nullptr;
            errno = 0;
            const float v = cell.empty() ? 0.0f : std::strtof(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE) {
                throw Error(ErrorKind::NonNumericCell,
                            "line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
            }
            values.push_back(v);
            ++row_cols;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows > 0 && row_cols != cols) {
            throw Error(ErrorKind::RaggedRows, "line " + std::to_string(line_no) + " has " +
                                                   std::to_string(row_cols) + " cells, expected " +
                                                   std::to_string(cols));
        }
        cols = row_cols;
        ++rows;
    }
    return Matrix(rows, cols, std::move(values));
}

Matrix read_csv_matrix(const std::filesystem::path& path) { return parse_csv_matrix(read_file(path)); }

namespace {

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string sci_or_none(const std::optional<double>& v) { return v ? sci(*v) : "none"; }

}  // namespace

std::string format_report(const CompressionReport& r) {
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) {
        out.append(key).append(": ").append(value).push_back('\n');
    };
    line("n_input", std::to_string(r.n_input));
    line("n_visual_kept", std::to_string(r.n_visual_kept));
    line("n_text_recovered", std::to_string(r.n_text_recovered));
    line("n_merged", std::to_string(r.n_merged));
    line("n_output", std::to_string(r.n_output));
    line("retention_ratio", general(r.retention_ratio));
    line("flops_before", sci_or_none(r.flops_before));
    line("flops_after", sci_or_none(r.flops_after));
    line("flops_reduction",
         r.flops_before && r.flops_after ? general(1.0 - *r.flops_after / *r.flops_before) : "none");
    line("kv_bytes_before", sci_or_none(r.kv_bytes_before));
    line("kv_bytes_after", sci_or_none(r.kv_bytes_after));
    line("wall_time_s", r.wall_time ? sci(*r.wall_time) : "none");
    line("params.k_lof", std::to_string(r.params_used.k_lof));
    line("params.tau", general(r.params_used.tau));
    line("params.fallback_keep", std::to_string(r.params_used.fallback_keep));
    line("params.k_lof2", std::to_string(r.params_used.k_lof2));
    line("params.tau2", general(r.params_used.tau2));
    line("params.text_tokens", std::to_string(r.params_used.text_tokens));
    return out;
}

void write_report(const CompressionReport& report, const std::filesystem::path& path) {
    write_file(path, format_report(report));
}

}  // namespace tokrecover::io
