// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "test_support.hpp"
#include "tokrecover/harness.hpp"
#include "tokrecover/outlier_filter.hpp"

using namespace tokrecover;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<double> kSmall = {0.0, 0.1, 0.2, 0.9};

}  // namespace

TEST_CASE("hand-checked LOF table") {
    const LofTable t = build_lof_table(kSmall, {2, 1.0, 1});
    const std::vector<double> kdist = {0.2, 0.1, 0.2, 0.8};
    const std::vector<double> lrd = {20.0 / 3.0, 5.0, 20.0 / 3.0, 4.0 / 3.0};
    const std::vector<double> lof = {0.875, 4.0 / 3.0, 0.875, 4.375};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(t.k_distance[i] == doctest::Approx(kdist[i]).epsilon(1e-12));
        CHECK(t.lrd[i] == doctest::Approx(lrd[i]).epsilon(1e-12));
        CHECK(t.lof[i] == doctest::Approx(lof[i]).epsilon(1e-12));
        CHECK_FALSE(t.degenerate[i]);
    }
    const std::vector<std::vector<std::size_t>> hoods = {{1, 2}, {0, 2}, {0, 1}, {1, 2}};
    CHECK(t.neighborhoods == hoods);
    CHECK(harness::lof_tables_match(t, harness::oracle_lof(kSmall, 2), 1e-12));
}

TEST_CASE("constant scores give LOF 1 everywhere") {
    const std::vector<double> c(30, 0.4);
    const LofTable t = build_lof_table(c, {5, 1.0, 1});
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(t.lof[i] == 1.0);
        CHECK(t.degenerate[i]);
        CHECK(t.k_distance[i] == 0.0);
        CHECK(t.lrd[i] == kInf);
        CHECK(t.neighborhoods[i].size() == 29);
    }
}

TEST_CASE("a non-degenerate point next to duplicates has infinite LOF") {
    const std::vector<double> s = {0.0, 0.5, 0.5, 0.5, 1.0};
    const LofTable t = build_lof_table(s, {2, 1.0, 1});
    CHECK(t.lof == std::vector<double>{kInf, 1.0, 1.0, 1.0, kInf});
    CHECK(harness::lof_tables_match(t, harness::oracle_lof(s, 2), 1e-12));
}

TEST_CASE("ties extend the neighbourhood beyond k") {
    const std::vector<double> s = {0.5, 0.4, 0.6, 0.0, 1.0};
    const LofTable t = build_lof_table(s, {1, 1.0, 1});
    CHECK(t.neighborhoods[0] == std::vector<std::size_t>{1, 2});
    CHECK(t.k_distance[0] == doctest::Approx(0.1));
}

TEST_CASE("600 uniform scores match the oracle") {
    std::mt19937_64 rng(600);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(600);
    for (double& x : s) x = u(rng);
    CHECK(harness::lof_tables_match(build_lof_table(s, {20, 1.0, 1}), harness::oracle_lof(s, 20), 1e-9));
}

TEST_CASE("quantized scores with heavy ties match the oracle") {
    std::mt19937_64 rng(7);
    for (std::size_t k : {1u, 3u, 5u, 20u}) {
        for (int rep = 0; rep < 10; ++rep) {
            std::uniform_int_distribution<int> level(0, 1 + rep);
            std::vector<double> s(k + 1 + static_cast<std::size_t>(rep) * 13);
            for (double& x : s) x = level(rng) / 8.0;
            CAPTURE(k);
            CHECK(harness::lof_tables_match(build_lof_table(s, {k, 1.0, 1}), harness::oracle_lof(s, k), 1e-9));
        }
    }
}

TEST_CASE("table construction needs more than k points and finite input") {
    CHECK(testing::error_kind([] { build_lof_table(kSmall, {4, 1.0, 1}); }) == ErrorKind::TooFewPoints);
    const std::vector<double> bad = {0.0, NAN, 1.0};
    CHECK(testing::error_kind([&] { build_lof_table(bad, {1, 1.0, 1}); }) == ErrorKind::NonFiniteValue);
}

TEST_CASE("median") {
    CHECK(median(std::vector<double>{3.0, 1.0, 2.0}) == 2.0);
    CHECK(median(std::vector<double>{0.0, 0.1, 0.2, 0.9}) == doctest::Approx(0.15));
    CHECK_THROWS_AS(median(std::vector<double>{}), Error);
}

TEST_CASE("count_salient") {
    const LofParams p{2, 1.0, 1};
    CHECK(count_salient(kSmall, build_lof_table(kSmall, p), p) == 1);

    const std::vector<double> c(10, 0.3);
    CHECK(count_salient(c, build_lof_table(c, p), p) == 0);

    // Spikes at both ends of a mid cluster: only the high one counts.
    const std::vector<double> two_sided = {0.0, 0.4, 0.45, 0.5, 0.55, 0.6, 1.0};
    const LofParams p3{3, 1.0, 1};
    const LofTable t = build_lof_table(two_sided, p3);
    CHECK(t.lof.front() > 1.0);
    CHECK(t.lof.back() > 1.0);
    CHECK(count_salient(two_sided, t, p3) == 1);
}

TEST_CASE("a higher tau counts fewer points") {
    const LofParams loose{2, 1.0, 1};
    const LofParams strict{2, 5.0, 1};
    CHECK(count_salient(kSmall, build_lof_table(kSmall, loose), loose) == 1);
    CHECK(count_salient(kSmall, build_lof_table(kSmall, strict), strict) == 0);
}

TEST_CASE("top_scoring breaks ties toward lower positions") {
    const std::vector<double> s = {0.5, 0.9, 0.5, 0.9, 0.1};
    CHECK(top_scoring(s, 1) == IndexSet{1});
    CHECK(top_scoring(s, 3) == IndexSet{0, 1, 3});
    CHECK(top_scoring(s, 9) == IndexSet{0, 1, 2, 3, 4});
}

TEST_CASE("dynamic_select") {
    const LofParams p{2, 1.0, 1};
    CHECK(dynamic_select(kSmall, p, true) == IndexSet{3});
    const std::vector<double> c(6, 0.2);
    CHECK(dynamic_select(c, p, true) == IndexSet{0});
    CHECK(dynamic_select(c, p, false).empty());
    CHECK(dynamic_select(c, LofParams{2, 1.0, 3}, true) == IndexSet{0, 1, 2});
    // Too few points for the filter: everything is kept.
    CHECK(dynamic_select(std::vector<double>{0.3, 0.1}, p, false) == IndexSet{0, 1});
}
