// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "test_support.hpp"
#include "tokrecover/harness.hpp"
#include "tokrecover/pipeline.hpp"
#include "tokrecover/scoring.hpp"
#include "tokrecover/tensor_io.hpp"

using namespace tokrecover;
using namespace tokrecover::harness;

TEST_CASE("the engine sequence is the standard one") {
    Rng rng(5489);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = rng.next();
    CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("uniforms and bounded draws stay in range") {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.below(7) < 7);
    }
}

TEST_CASE("normals have unit scale") {
    Rng rng(2);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.01).scale(1.0));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("a fixed seed gives a bitwise identical bundle") {
    SyntheticSpec spec;
    spec.seed = 123;
    const Synthetic a = gen_synthetic(spec);
    const Synthetic b = gen_synthetic(spec);
    CHECK(io::encode_bundle(a.bundle) == io::encode_bundle(b.bundle));
    CHECK(a.truth.visual == b.truth.visual);
    spec.seed = 124;
    CHECK(io::encode_bundle(gen_synthetic(spec).bundle) != io::encode_bundle(a.bundle));
}

TEST_CASE("default bundle shape and ground truth") {
    const Synthetic s = gen_synthetic({});
    CHECK(s.bundle.size() == 576);
    CHECK(s.bundle.dim() == 64);
    CHECK(s.bundle.text->size() == 32);
    CHECK(s.bundle.grid == GridShape{24, 24});
    CHECK(s.bundle.metadata.at("generator") == kGeneratorId);
    CHECK_NOTHROW(validate_bundle(s.bundle));
    CHECK(s.truth.visual.size() == 20);
    CHECK(s.truth.text.size() == 20);
    IndexSet both;
    std::ranges::set_intersection(s.truth.visual, s.truth.text, std::back_inserter(both));
    CHECK(both.empty());
    CHECK(std::ranges::is_sorted(s.truth.visual));
}

TEST_CASE("planted visual tokens hold the top visual scores") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        const Synthetic s = gen_synthetic(spec);
        const ScoreVector v = visual_score(s.bundle);
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return v.raw[a] > v.raw[b]; });
        IndexSet top(order.begin(), order.begin() + 20);
        std::ranges::sort(top);
        CAPTURE(seed);
        CHECK(top == s.truth.visual);
    }
}

TEST_CASE("planted text tokens hold the top text scores") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        const Synthetic s = gen_synthetic(spec);
        const ScoreVector t = text_score(s.bundle);
        const double floor = *std::ranges::min_element(t.raw);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const bool planted = std::ranges::binary_search(s.truth.text, i);
            CHECK((t.raw[i] > floor) == planted);
        }
    }
}

TEST_CASE("without text-salient tokens nothing is recovered by text") {
    std::size_t empty = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.n_text_salient = 0;
        empty += compress(gen_synthetic(spec).bundle).selection.text_recovered.empty() ? 1 : 0;
    }
    CHECK(empty >= 95);
}

TEST_CASE("invalid generator settings") {
    SyntheticSpec spec;
    spec.n_visual_salient = 400;
    spec.n_text_salient = 400;
    CHECK(testing::error_kind([&] { gen_synthetic(spec); }) == ErrorKind::InvalidCounts);
    spec = {};
    spec.dt = 0;
    CHECK(testing::error_kind([&] { gen_synthetic(spec); }) == ErrorKind::InvalidCounts);
    spec.n_text_salient = 0;
    CHECK_NOTHROW(gen_synthetic(spec));
    spec.d = 1;
    CHECK(testing::error_kind([&] { gen_synthetic(spec); }) == ErrorKind::InvalidCounts);
}

TEST_CASE("non-square token counts have no grid") {
    SyntheticSpec spec;
    spec.n = 50;
    spec.n_visual_salient = 2;
    spec.n_text_salient = 2;
    CHECK_FALSE(gen_synthetic(spec).bundle.grid.has_value());
}

TEST_CASE("oracle table comparison notices differences") {
    const std::vector<double> s = {0.0, 0.1, 0.2, 0.9};
    const LofTable t = oracle_lof(s, 2);
    CHECK(lof_tables_match(t, t, 0.0));
    LofTable off = t;
    off.lof[3] *= 1.0 + 1e-6;
    CHECK_FALSE(lof_tables_match(off, t, 1e-9));
    CHECK(lof_tables_match(off, t, 1e-5));
    off = t;
    off.neighborhoods[0] = {1, 3};
    CHECK_FALSE(lof_tables_match(off, t, 1e-5));
}

TEST_CASE("randomized oracle checks pass") {
    const OracleCheckSummary s = run_oracle_checks(9, 40);
    CHECK(s.lof_cases == 40);
    CHECK(s.assign_cases > 0);
    CHECK(s.merge_cases > 0);
    CHECK(s.ok());
}
