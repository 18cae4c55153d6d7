// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include "blockbeam/scenario.hpp"

using namespace blockbeam;

namespace {

Scenario small_scenario()
{
    Scenario sc;
    sc.system.array_elements = 8;
    sc.system.ris_elements = 16;
    sc.system.paths_bs_ris = 4;
    sc.system.paths_ris_ue = 3;
    sc.stage1.snapshots = 8;
    sc.stage1.iterations = 40;
    sc.stage1.restarts = 2;
    sc.gs.max_iter = 12;
    sc.trials = 2;
    sc.seed = 5;
    return sc;
}

std::string rows_to_csv(const std::vector<TrialRow> &rows)
{
    std::string out = trial_csv_header() + "\n";
    for (const auto &row : rows)
        out += to_csv(row) + "\n";
    return out;
}

} // namespace

TEST_CASE("scenario JSON round trip is lossless")
{
    Scenario sc = small_scenario();
    sc.blockage.density = 0.25;
    sc.blockage.guard_angle = 0.02;
    sc.blockage.scene.push_back({{3.0, 2.0, 1.0}, 0.4});
    const nlohmann::json j = scenario_to_json(sc);
    const Scenario back = scenario_from_json(j);
    const nlohmann::json j2 = scenario_to_json(back);
    CHECK(j == j2);
    CHECK(back.system.array_elements == 8);
    CHECK_THAT(back.blockage.guard_angle, Catch::Matchers::WithinRel(0.02, 1e-12));
    REQUIRE(back.blockage.scene.size() == 1);
    CHECK(back.blockage.scene[0].radius == 0.4);
}

TEST_CASE("config validation reports field errors")
{
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"system", {{"array_elements", 7}}}}),
                    ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"trials", 0}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"blockage", {{"density", 1.5}}}}),
                    ConfigError);
    // UE count must match users
    nlohmann::json j;
    j["geometry"]["ue_positions_m"] = {{15.0, 2.0, 1.0}};
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
}

TEST_CASE("trial CSV header is stable")
{
    CHECK(trial_csv_header() ==
          "trial,seed,method,density,snr_db,evaluations,rate_bps_hz,outage,moves,overhead,"
          "ee_bits_per_joule");
}

TEST_CASE("run_scenario is deterministic byte for byte")
{
    const Scenario sc = small_scenario();
    const std::string a = rows_to_csv(run_scenario(sc, 1));
    const std::string b = rows_to_csv(run_scenario(sc, 1));
    CHECK(a == b);
    // parallel execution preserves row order
    const std::string c = rows_to_csv(run_scenario(sc, 2));
    CHECK(a == c);
}

TEST_CASE("zero density makes proposed and traditional selections identical")
{
    Scenario sc = small_scenario();
    sc.blockage.density = 0.0;
    sc.trials = 3;
    const auto rows = run_scenario(sc, 1);
    for (int t = 0; t < sc.trials; ++t) {
        const TrialRow *prop = nullptr, *trad = nullptr;
        for (const auto &row : rows) {
            if (row.trial != t)
                continue;
            if (row.method == "proposed")
                prop = &row;
            if (row.method == "traditional")
                trad = &row;
        }
        REQUIRE(prop != nullptr);
        REQUIRE(trad != nullptr);
        CHECK(prop->rate_bps_hz == trad->rate_bps_hz);
        CHECK(prop->evaluations == trad->evaluations);
        CHECK(prop->density == 0.0);
    }
}

TEST_CASE("full blockage yields hierarchical outage on every trial")
{
    Scenario sc = small_scenario();
    sc.blockage.density = 1.0;
    const auto rows = run_scenario(sc, 1);
    for (const auto &row : rows)
        if (row.method == "proposed" || row.method == "traditional")
            CHECK(row.outage);
}

TEST_CASE("sweep spec validation and axis parsing")
{
    SweepSpec spec;
    spec.values = {};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.values = {3.0, 1.0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.values = {1.0, 3.0};
    spec.validate();
    CHECK(sweep_axis_from_string("snr_db") == SweepAxis::snr_db);
    CHECK(sweep_axis_from_string("blockage_density") == SweepAxis::blockage_density);
    CHECK_THROWS_AS(sweep_axis_from_string("bogus"), ConfigError);
    CHECK(to_string(SweepAxis::tx_power_dbm) == "tx_power_dbm");
}

TEST_CASE("sweep tags rows with the axis value and filters methods")
{
    Scenario sc = small_scenario();
    sc.trials = 1;
    SweepSpec spec;
    spec.axis = SweepAxis::snr_db;
    spec.values = {20.0, 30.0};
    spec.methods = {"proposed"};
    const auto rows = sweep(sc, spec, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].axis_value == 20.0);
    CHECK(rows[1].axis_value == 30.0);
    for (const auto &row : rows) {
        CHECK(row.method == "proposed");
        // snr axis pins tx power at noise + value
        CHECK_THAT(row.snr_db, Catch::Matchers::WithinAbs(row.axis_value, 1e-9));
    }
}

TEST_CASE("sweep summary aggregates by axis value and method")
{
    std::vector<TrialRow> rows;
    for (int i = 0; i < 4; ++i) {
        TrialRow r;
        r.axis_value = 1.0;
        r.method = "proposed";
        r.rate_bps_hz = 1.0 + i;
        r.overhead = 2;
        r.ee_bits_per_joule = 10.0;
        r.outage = i == 0;
        rows.push_back(r);
    }
    const auto summary = summarize_sweep(rows);
    REQUIRE(summary.size() == 1);
    CHECK_THAT(summary[0].mean_rate, Catch::Matchers::WithinRel(2.5, 1e-12));
    CHECK_THAT(summary[0].median_rate, Catch::Matchers::WithinRel(2.5, 1e-12));
    CHECK_THAT(summary[0].outage_fraction, Catch::Matchers::WithinRel(0.25, 1e-12));
    CHECK_THAT(summary[0].mean_overhead, Catch::Matchers::WithinRel(2.0, 1e-12));
}

TEST_CASE("figure schemas are stable and empty input yields header only")
{
    std::vector<TrialRow> empty;
    CHECK(emit_figure_data(empty, "fig8") == "snr_db,method,rate_gbps_mean,rate_gbps_ci\n");
    CHECK(emit_figure_data(empty, "fig9") == "overhead_budget,method,rate_gbps_mean\n");
    CHECK(emit_figure_data(empty, "fig10") == "snr_db,method,ee_mbits_per_joule_mean\n");
    CHECK(emit_figure_data(empty, "fig11") ==
          "blockage_density,method,mean_overhead,ee_mbits_per_joule_mean\n");
    CHECK_THROWS_AS(emit_figure_data(empty, "fig99"), ConfigError);

    TrialRow r;
    r.axis_value = 25.0;
    r.method = "proposed";
    r.rate_bps_hz = 4.0;
    const std::string csv = emit_figure_data({r}, "fig8");
    CHECK(csv.find("25,proposed,4") != std::string::npos);
}

TEST_CASE("generated scenes land on the target blocked fraction")
{
    const Scenario sc = small_scenario();
    const AngularSet fov = sc.fov_azimuth();
    Rng rng = make_rng(81);
    for (double density : {0.1, 0.3, 0.5}) {
        const BlockageScene scene = generate_scene(density, sc.geometry, fov, rng);
        const double blocked =
            1.0 - available_angles(sc.geometry.array_origin, fov, scene).measure() / fov.measure();
        CHECK_THAT(blocked, Catch::Matchers::WithinAbs(density, 0.011));
    }
    CHECK(generate_scene(0.0, sc.geometry, fov, rng).count() == 0);
    // full-blockage request swallows the array in one disc
    const BlockageScene full = generate_scene(1.0, sc.geometry, fov, rng);
    CHECK(available_angles(sc.geometry.array_origin, fov, full).empty());
}

TEST_CASE("convergence traces start at one and honor layer cycling")
{
    Scenario sc = small_scenario();
    const auto traces = convergence_experiment(sc, {0.0, 0.3}, 4, 25, 1e-3, 1);
    REQUIRE(traces.size() == 8);
    const int depth = 3; // M = 8
    for (const auto &trace : traces) {
        REQUIRE_FALSE(trace.r.empty());
        CHECK_THAT(trace.r.front(), Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK(trace.layer >= 1);
        CHECK(trace.layer <= depth);
        CHECK(trace.iterations_to_threshold >= 0);
        CHECK(trace.iterations_to_threshold <= 25);
    }
    CHECK_THROWS_AS(convergence_experiment(sc, {1.0}, 1, 10, 1e-3, 1), ConfigError);

    const std::string csv = convergence_csv(traces);
    CHECK(csv.rfind("density,realization,layer,t,r\n", 0) == 0);
    const std::string iters = convergence_iters_csv(traces);
    CHECK(iters.rfind("density,realization,layer,iterations_to_threshold\n", 0) == 0);
}
