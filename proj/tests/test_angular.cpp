// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include "blockbeam/angular.hpp"
#include "blockbeam/rng.hpp"

using namespace blockbeam;

TEST_CASE("set_union merges overlapping intervals")
{
    const AngularSet s = set_union({{0.0, 1.0}, {0.5, 2.0}});
    REQUIRE(s.intervals().size() == 1);
    CHECK(s.lower() == 0.0);
    CHECK(s.upper() == 2.0);
}

TEST_CASE("set_union of nothing is empty")
{
    CHECK(set_union({}).empty());
    CHECK(AngularSet::empty_set().measure() == 0.0);
}

TEST_CASE("set_union membership matches per-interval OR oracle")
{
    Rng rng = make_rng(11);
    std::vector<AngularInterval> raw;
    for (int i = 0; i < 1000; ++i) {
        const double lo = uniform(rng, -3.0, 3.0);
        raw.push_back({lo, lo + uniform(rng, 0.0, 0.3)});
    }
    const AngularSet merged = set_union(raw);
    for (int p = 0; p < 10000; ++p) {
        const double x = uniform(rng, -3.2, 3.2);
        bool oracle = false;
        for (const auto &iv : raw)
            oracle |= iv.contains(x);
        REQUIRE(merged.contains(x) == oracle);
    }
}

TEST_CASE("set_subtract with empty blocked is identity")
{
    const AngularSet fov = AngularSet::interval(-1.5, 1.5);
    const AngularSet out = set_subtract(fov, AngularSet::empty_set());
    REQUIRE(out.intervals().size() == 1);
    CHECK(out.lower() == -1.5);
    CHECK(out.upper() == 1.5);
}

TEST_CASE("set_subtract splits around an interior hole")
{
    const AngularSet out =
        set_subtract(AngularSet::interval(0.0, 1.0), AngularSet::interval(0.2, 0.4));
    REQUIRE(out.intervals().size() == 2);
    CHECK(out.intervals()[0].lo == 0.0);
    CHECK(out.intervals()[0].hi == 0.2);
    CHECK(out.intervals()[1].lo == 0.4);
    CHECK(out.intervals()[1].hi == 1.0);
}

TEST_CASE("set_subtract and set_intersect match membership oracles")
{
    Rng rng = make_rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<AngularInterval> f, b;
        for (int i = 0; i < 30; ++i) {
            double lo = uniform(rng, -2.0, 2.0);
            f.push_back({lo, lo + uniform(rng, 0.0, 0.5)});
            lo = uniform(rng, -2.0, 2.0);
            b.push_back({lo, lo + uniform(rng, 0.0, 0.5)});
        }
        const AngularSet fov(f), blocked(b);
        const AngularSet diff = set_subtract(fov, blocked);
        const AngularSet inter = set_intersect(fov, blocked);
        for (int p = 0; p < 500; ++p) {
            const double x = uniform(rng, -2.5, 2.5);
            REQUIRE(diff.contains(x) == (fov.contains(x) && !blocked.contains(x)));
            REQUIRE(inter.contains(x) == (fov.contains(x) && blocked.contains(x)));
        }
        // measure partition: diff + (blocked within fov) = fov
        CHECK_THAT(diff.measure() + inter.measure(),
                   Catch::Matchers::WithinAbs(fov.measure(), 1e-9));
    }
}

TEST_CASE("grid_sample tags all samples in_sector when sector covers fov")
{
    const AngularSet fov = AngularSet::interval(-1.0, 1.0);
    const AngularGrid g = grid_sample(fov, AngularSet::empty_set(), fov, 64.0);
    REQUIRE(g.size() > 0);
    for (auto t : g.tags)
        REQUIRE(t == RegionTag::in_sector);
}

TEST_CASE("grid_sample leaves no in_sector samples for an empty sector")
{
    const AngularSet fov = AngularSet::interval(-1.0, 1.0);
    const AngularGrid g = grid_sample(AngularSet::empty_set(), AngularSet::empty_set(), fov, 64.0);
    CHECK(g.indices(RegionTag::in_sector).empty());
    CHECK(g.indices(RegionTag::sidelobe).size() == g.size());
}

TEST_CASE("grid_sample count tracks density times fov measure")
{
    const AngularSet fov = AngularSet::interval(-1.0, 1.0);
    const double density = 8.0 * 64 / fov.measure();
    const AngularGrid g = grid_sample(fov, AngularSet::empty_set(), fov, density);
    CHECK(std::llabs(static_cast<long long>(g.size()) -
                     static_cast<long long>(std::llround(density * fov.measure()))) <= 1);
}

TEST_CASE("grid_sample tags are exhaustive, exclusive, and region-consistent")
{
    const AngularSet fov = AngularSet::interval(-1.0, 1.0);
    const AngularSet sector = AngularSet::interval(-0.25, 0.5);
    const AngularSet blocked = set_union({{0.1, 0.3}, {-0.9, -0.6}});
    const AngularGrid g = grid_sample(sector, blocked, fov, 512.0);
    REQUIRE(g.samples.size() == g.tags.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = g.samples[i];
        if (blocked.contains(u))
            REQUIRE(g.tags[i] == RegionTag::blocked);
        else if (sector.contains(u))
            REQUIRE(g.tags[i] == RegionTag::in_sector);
        else
            REQUIRE(g.tags[i] == RegionTag::sidelobe);
        if (i > 0)
            REQUIRE(g.samples[i] > g.samples[i - 1]); // strictly increasing
    }
    CHECK(g.indices(RegionTag::in_sector).size() + g.indices(RegionTag::blocked).size() +
              g.indices(RegionTag::sidelobe).size() ==
          g.size());
}

TEST_CASE("grid_sample rejects bad inputs")
{
    const AngularSet fov = AngularSet::interval(-1.0, 1.0);
    CHECK_THROWS(grid_sample(fov, AngularSet::empty_set(), fov, 0.0));
    CHECK_THROWS(grid_sample(fov, AngularSet::empty_set(), AngularSet::empty_set(), 8.0));
}
