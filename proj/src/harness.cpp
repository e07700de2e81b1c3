// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace tokrecover::harness {

double Rng::uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t bound) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(bound));
}

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

Synthetic gen_synthetic(const SyntheticSpec& spec) {
    if (spec.n == 0 || spec.d < 2) {
        throw Error(ErrorKind::InvalidCounts, "synthetic bundles need n >= 1 and d >= 2");
    }
    if (spec.n_visual_salient + spec.n_text_salient > spec.n) {
        throw Error(ErrorKind::InvalidCounts, "more planted tokens than tokens");
    }
    if (spec.dt == 0 && spec.n_text_salient > 0) {
        throw Error(ErrorKind::InvalidCounts, "text-salient tokens need a text embedding (dt > 0)");
    }
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
        throw Error(ErrorKind::InvalidCounts, "noise sigma must be finite and non-negative");
    }
    if (spec.prototypes == 0) {
        throw Error(ErrorKind::InvalidCounts, "at least one background prototype is needed");
    }

    Rng rng(spec.seed);
    const std::size_t n = spec.n;
    const std::size_t d = spec.d;
    // Column blocks: [0, text_end) text, [text_end, cls_end) class, rest noise.
    const std::size_t text_end = std::max<std::size_t>(1, d / 8);
    const std::size_t cls_end = std::min(d, text_end + std::max<std::size_t>(1, d / 4));

    // Class token of norm sqrt(d): a prototype drawn N(0, 1) on the class
    // block then has a visual logit ~ N(0, 1).
    std::vector<double> cls(d, 0.0);
    for (std::size_t j = text_end; j < cls_end; ++j) cls[j] = rng.normal();
    {
        const double scale = std::sqrt(static_cast<double>(d)) / norm(cls);
        for (double& c : cls) c *= scale;
    }
    std::vector<double> cls_dir(d);
    const double cls_norm = norm(cls);
    for (std::size_t j = 0; j < d; ++j) cls_dir[j] = cls[j] / cls_norm;

    // Planted positions: a shuffled prefix.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    GroundTruth truth;
    truth.visual.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(spec.n_visual_salient));
    truth.text.assign(perm.begin() + static_cast<std::ptrdiff_t>(spec.n_visual_salient),
                      perm.begin() + static_cast<std::ptrdiff_t>(spec.n_visual_salient + spec.n_text_salient));
    std::ranges::sort(truth.visual);
    std::ranges::sort(truth.text);

    std::optional<ProjectionMap> proj;
    std::optional<std::vector<float>> text;
    std::vector<double> text_pre;  // direction in token space that the text reads
    double text_pre_gain = 0.0;    // text logit per unit length along text_pre
    if (spec.dt > 0) {
        const std::size_t dt = spec.dt;
        const std::size_t text_rows = std::max<std::size_t>(1, dt / 4);
        const double w_scale = 1.0 / std::sqrt(static_cast<double>(d));
        ProjectionMap p;
        p.weight = Matrix(dt, d);
        for (std::size_t r = 0; r < dt; ++r) {
            const std::size_t cols_end = r < text_rows ? text_end : d;
            for (std::size_t j = 0; j < cols_end; ++j) {
                p.weight(r, j) = static_cast<float>(rng.normal() * w_scale);
            }
        }
        std::vector<float> bias(dt);
        for (float& b : bias) b = static_cast<float>(0.1 * rng.normal());
        p.bias = std::move(bias);

        std::vector<float> t(dt, 0.0f);
        for (std::size_t r = 0; r < text_rows; ++r) t[r] = static_cast<float>(rng.normal());

        text_pre.assign(d, 0.0);
        for (std::size_t r = 0; r < text_rows; ++r) {
            for (std::size_t j = 0; j < text_end; ++j) {
                text_pre[j] += static_cast<double>(t[r]) * static_cast<double>(p.weight(r, j));
            }
        }
        const double pre_norm = norm(text_pre);
        if (pre_norm > 0.0) {
            for (double& v : text_pre) v /= pre_norm;
        }
        text_pre_gain = pre_norm / std::sqrt(static_cast<double>(dt));
        proj = std::move(p);
        text = std::move(t);
    }

    // Background prototypes on the class block. Common ones are weighted
    // 1..4, rare ones are capped at a handful of members.
    const std::size_t n_proto = spec.prototypes + spec.rare_prototypes;
    Matrix protos(n_proto, cls_end - text_end);
    for (float& v : protos.data()) v = static_cast<float>(rng.normal());
    std::vector<double> weights(spec.prototypes);
    double weight_sum = 0.0;
    for (double& w : weights) {
        w = 1.0 + 3.0 * rng.uniform();
        weight_sum += w;
    }
    std::vector<std::size_t> proto_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform() * weight_sum;
        std::size_t p = 0;
        while (p + 1 < weights.size() && u >= weights[p]) {
            u -= weights[p];
            ++p;
        }
        proto_of[i] = p;
    }
    for (std::size_t r = 0; r < spec.rare_prototypes; ++r) {
        const std::size_t members = 2 + rng.below(spec.rare_max_members > 1 ? spec.rare_max_members - 1 : 1);
        for (std::size_t m = 0; m < members; ++m) {
            proto_of[rng.below(n)] = spec.prototypes + r;
        }
    }

    Matrix tokens(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = tokens.row(i);
        std::ranges::copy(protos.row(proto_of[i]), row.begin() + static_cast<std::ptrdiff_t>(text_end));
        for (std::size_t j = cls_end; j < d; ++j) {
            row[j] = static_cast<float>(spec.noise_sigma * rng.normal());
        }
    }
    for (std::size_t i : truth.visual) {
        // visual logit boost = amount * |cls| / sqrt(d) = amount
        const double amount = spec.visual_gain * (1.0 + rng.uniform());
        auto row = tokens.row(i);
        for (std::size_t j = text_end; j < cls_end; ++j) {
            row[j] = static_cast<float>(static_cast<double>(row[j]) + amount * cls_dir[j]);
        }
    }
    for (std::size_t i : truth.text) {
        const double boost = spec.text_gain * (1.0 + rng.uniform());
        const double amount = text_pre_gain > 0.0 ? boost / text_pre_gain : 0.0;
        auto row = tokens.row(i);
        for (std::size_t j = 0; j < text_end; ++j) {
            row[j] = static_cast<float>(amount * text_pre[j]);
        }
    }

    Synthetic out;
    std::vector<float> cls_f(d);
    for (std::size_t j = 0; j < d; ++j) cls_f[j] = static_cast<float>(cls[j]);
    out.bundle = make_bundle(std::move(tokens), std::move(cls_f));
    out.bundle.text = std::move(text);
    out.bundle.proj = std::move(proj);
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side * side == n) {
        out.bundle.grid = GridShape{side, side};
    }
    out.bundle.metadata["generator"] = kGeneratorId;
    out.bundle.metadata["seed"] = std::to_string(spec.seed);
    out.truth = std::move(truth);
    return out;
}

LofTable oracle_lof(std::span<const double> scores, std::size_t k) {
    const std::size_t n = scores.size();
    if (k == 0 || n <= k) {
        throw Error(ErrorKind::TooFewPoints, "oracle LOF needs more than k points");
    }
    LofTable t;
    t.k_distance.resize(n);
    t.neighborhoods.resize(n);
    t.lrd.resize(n);
    t.lof.resize(n);
    t.degenerate.assign(n, 0);

    for (std::size_t p = 0; p < n; ++p) {
        std::vector<double> dist;
        for (std::size_t o = 0; o < n; ++o) {
            if (o != p) dist.push_back(std::abs(scores[p] - scores[o]));
        }
        std::ranges::sort(dist);
        t.k_distance[p] = dist[k - 1];
        for (std::size_t o = 0; o < n; ++o) {
            if (o != p && std::abs(scores[p] - scores[o]) <= t.k_distance[p]) {
                t.neighborhoods[p].push_back(o);
            }
        }
        t.degenerate[p] = t.k_distance[p] == 0.0;
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (t.degenerate[p]) {
            t.lrd[p] = std::numeric_limits<double>::infinity();
            continue;
        }
        double sum = 0.0;
        for (std::size_t o : t.neighborhoods[p]) {
            sum += std::max(t.k_distance[o], std::abs(scores[o] - scores[p]));
        }
        t.lrd[p] = 1.0 / (sum / static_cast<double>(t.neighborhoods[p].size()));
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (t.degenerate[p]) {
            t.lof[p] = 1.0;
            continue;
        }
        double ratio_sum = 0.0;
        for (std::size_t o : t.neighborhoods[p]) {
            ratio_sum += t.lrd[o] / t.lrd[p];
        }
        t.lof[p] = ratio_sum / static_cast<double>(t.neighborhoods[p].size());
    }
    return t;
}

std::vector<std::size_t> oracle_assign(const Matrix& tokens, std::span<const std::size_t> seeds) {
    std::vector<std::size_t> out(tokens.rows());
    for (std::size_t r = 0; r < tokens.rows(); ++r) {
        if (std::ranges::find(seeds, r) != seeds.end()) {
            out[r] = r;
            continue;
        }
        std::size_t best = 0;
        double best_dot = -std::numeric_limits<double>::infinity();
        bool first = true;
        for (std::size_t s : seeds) {
            double dot = 0.0;
            for (std::size_t j = 0; j < tokens.cols(); ++j) {
                dot += static_cast<double>(tokens(r, j)) * static_cast<double>(tokens(s, j));
            }
            if (first || dot > best_dot || (dot == best_dot && s < best)) {
                best = s;
                best_dot = dot;
                first = false;
            }
        }
        out[r] = best;
    }
    return out;
}

MergedClusters oracle_merge(const Matrix& tokens, std::span<const std::size_t> assignment,
                            std::span<const std::size_t> seeds, std::span<const std::uint64_t> original_indices) {
    MergedClusters out;
    out.tokens = Matrix(seeds.size(), tokens.cols());
    for (std::size_t c = 0; c < seeds.size(); ++c) {
        std::vector<std::size_t> members;
        for (std::size_t r = 0; r < tokens.rows(); ++r) {
            if (assignment[r] == seeds[c]) members.push_back(r);
        }
        std::ranges::sort(members, [&](std::size_t a, std::size_t b) {
            return original_indices[a] < original_indices[b];
        });
        for (std::size_t j = 0; j < tokens.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t r : members) sum += static_cast<double>(tokens(r, j));
            out.tokens(c, j) = static_cast<float>(sum / static_cast<double>(members.size()));
        }
        out.placement.push_back(original_indices[seeds[c]]);
    }
    return out;
}

namespace {

bool close(double actual, double expected, double tol) {
    if (std::isinf(expected) || std::isinf(actual)) return actual == expected;
    return std::abs(actual - expected) <= tol * std::max(1.0, std::abs(expected));
}

}  // namespace

bool lof_tables_match(const LofTable& actual, const LofTable& expected, double tol) {
    const std::size_t n = expected.size();
    if (actual.size() != n || actual.k_distance.size() != n || actual.neighborhoods.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (actual.neighborhoods[i] != expected.neighborhoods[i]) return false;
        if (actual.degenerate[i] != expected.degenerate[i]) return false;
        if (!close(actual.k_distance[i], expected.k_distance[i], tol)) return false;
        if (!close(actual.lrd[i], expected.lrd[i], tol)) return false;
        if (!close(actual.lof[i], expected.lof[i], tol)) return false;
    }
    return true;
}

namespace {

/// Score vectors that exercise ties, clusters and spikes as well as
/// plain uniform draws.
std::vector<double> random_scores(Rng& rng, std::size_t n) {
    std::vector<double> s(n);
    switch (rng.below(4)) {
    case 0:
        for (double& v : s) v = rng.uniform();
        break;
    case 1:  // quantized: many exact duplicates
        for (double& v : s) v = static_cast<double>(rng.below(12)) / 11.0;
        break;
    case 2:  // dense background with a few spikes
        for (double& v : s) v = 0.05 * rng.uniform();
        for (std::size_t i = 0; i < 1 + n / 30; ++i) s[rng.below(n)] = 0.3 + 0.7 * rng.uniform();
        break;
    default:  // skewed, like normalized softmax output
        for (double& v : s) v = std::exp(2.0 * rng.normal());
        break;
    }
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    const double lo_v = *lo;
    const double range = *hi - lo_v;
    for (double& v : s) v = range > 0.0 ? (v - lo_v) / range : 0.0;
    return s;
}

}  // namespace

OracleCheckSummary run_oracle_checks(std::uint64_t seed, std::size_t cases) {
    static constexpr std::size_t kValues[] = {5, 20, 30, 90};
    Rng rng(seed);
    OracleCheckSummary summary;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t k = kValues[rng.below(std::size(kValues))];
        const std::size_t n = k + 1 + rng.below(600 - k);
        const std::vector<double> scores = random_scores(rng, n);
        LofParams params;
        params.k = k;
        ++summary.lof_cases;
        if (!lof_tables_match(build_lof_table(scores, params), oracle_lof(scores, k), 1e-9)) {
            ++summary.lof_failures;
        }

        const std::size_t rows = 1 + rng.below(80);
        const std::size_t d = 1 + rng.below(40);
        Matrix tokens(rows, d);
        for (float& v : tokens.data()) v = static_cast<float>(rng.normal());
        std::vector<std::size_t> seeds;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == 0 || rng.uniform() < 0.15) seeds.push_back(r);
        }
        ++summary.assign_cases;
        const std::vector<std::size_t> assignment = assign_clusters(tokens, seeds);
        if (assignment != oracle_assign(tokens, seeds)) {
            ++summary.assign_failures;
        }

        std::vector<std::uint64_t> original(rows);
        std::iota(original.begin(), original.end(), std::uint64_t{0});
        for (std::size_t i = rows - 1; i > 0; --i) std::swap(original[i], original[rng.below(i + 1)]);
        ++summary.merge_cases;
        const MergedClusters got = merge_clusters(tokens, assignment, seeds, original);
        const MergedClusters want = oracle_merge(tokens, assignment, seeds, original);
        if (got.tokens.data().size() != want.tokens.data().size() ||
            !std::equal(got.tokens.data().begin(), got.tokens.data().end(), want.tokens.data().begin()) ||
            got.placement != want.placement) {
            ++summary.merge_failures;
        }
    }
    return summary;
}

}  // namespace tokrecover::harness
