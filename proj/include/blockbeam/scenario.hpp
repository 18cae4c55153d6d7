// SPDX-License-Identifier: Apache-2.0
//
// blockbeam: blockage-aware hierarchical beamforming for RIS-assisted
// movable-antenna arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Scenario configuration, seeded Monte-Carlo harness, sweeps, and the
// convergence experiment. All outputs are deterministic functions of
// (config, seed); trial-level parallelism preserves output order.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "blockbeam/blockage.hpp"
#include "blockbeam/channel.hpp"
#include "blockbeam/energy.hpp"
#include "blockbeam/gs.hpp"
#include "blockbeam/stage1.hpp"
#include "blockbeam/training.hpp"

namespace blockbeam {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SystemConfig {
    int array_elements = 64;  // M
    int ris_elements = 256;   // N
    int users = 2;            // K
    int paths_bs_ris = 9;     // L_g
    int paths_ris_ue = 5;     // L_b
    double carrier_hz = 60e9;
    double bandwidth_hz = 1e9;
    double noise_dbm = -90.0;
    double tx_power_dbm = 30.0;

    double noise_w() const { return 1e-3 * std::pow(10.0, noise_dbm / 10.0); }
    double tx_power_w() const { return 1e-3 * std::pow(10.0, tx_power_dbm / 10.0); }

    LinkBudget budget() const
    {
        LinkBudget b;
        b.tx_power_w = tx_power_w();
        b.noise_power_w = noise_w();
        b.bandwidth_hz = bandwidth_hz;
        b.carrier_hz = carrier_hz;
        return b;
    }

    double wavelength() const { return 299792458.0 / carrier_hz; }

    void validate() const
    {
        if (array_elements < 2 || !is_power_of_two(array_elements))
            throw ConfigError("system.array_elements: power of two >= 2 required");
        if (ris_elements < 1 || users < 1 || paths_bs_ris < 1 || paths_ris_ue < 1)
            throw ConfigError("system: counts must be positive");
        if (carrier_hz <= 0.0 || bandwidth_hz <= 0.0)
            throw ConfigError("system: carrier_ghz and bandwidth_ghz must be positive");
    }
};

struct GeometryConfig {
    Eigen::Vector3d array_origin{0.0, 0.0, 1.0};
    Eigen::Vector3d ris_center{10.0, 5.0, 1.0};
    std::vector<Eigen::Vector3d> ue_positions{{15.0, 2.0, 1.0}, {14.0, 8.0, 1.0}};

    void validate() const
    {
        if (ue_positions.empty())
            throw ConfigError("geometry.ue_positions_m: at least one UE required");
    }
};

struct BlockageConfig {
    double density = 0.3;      // target blocked fraction of the fov
    double guard_angle = 0.0;  // radians
    std::vector<Blockage> scene; // explicit scene overrides density

    bool use_density() const { return scene.empty(); }

    void validate() const
    {
        if (density < 0.0 || density > 1.0)
            throw ConfigError("blockage.density: value in [0, 1] required");
        if (guard_angle < 0.0)
            throw ConfigError("blockage.guard_angle_deg: nonnegative value required");
    }
};

struct Stage1Config {
    int snapshots = 64;
    int iterations = 200;
    int restarts = 8;
    CovarianceOptions covariance;
};

struct Scenario {
    SystemConfig system;
    GeometryConfig geometry;
    BlockageConfig blockage;
    PathLossModel pathloss;
    GsConfig gs;
    EnergyModel energy;
    TrainingBudget training;
    Stage1Config stage1;
    int trials = 100;
    std::uint64_t seed = 1;

    void validate() const
    {
        system.validate();
        geometry.validate();
        blockage.validate();
        pathloss.validate();
        gs.validate();
        energy.validate();
        training.validate();
        if (trials < 1)
            throw ConfigError("trials: at least 1 required");
        if (static_cast<int>(geometry.ue_positions.size()) != system.users)
            throw ConfigError("geometry.ue_positions_m: count must equal system.users");
    }

    AngularSet fov_azimuth() const { return AngularSet::interval(0.0, std::numbers::pi); }
};

namespace detail {

inline Eigen::Vector3d vec3_from_json(const nlohmann::json &j, const char *path)
{
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(std::string(path) + ": expected [x, y, z]");
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

} // namespace detail

inline Scenario scenario_from_json(const nlohmann::json &j)
{
    Scenario sc;
    try {
        if (j.contains("system")) {
            const auto &s = j.at("system");
            sc.system.array_elements = s.value("array_elements", sc.system.array_elements);
            sc.system.ris_elements = s.value("ris_elements", sc.system.ris_elements);
            sc.system.users = s.value("users", sc.system.users);
            sc.system.paths_bs_ris = s.value("paths_bs_ris", sc.system.paths_bs_ris);
            sc.system.paths_ris_ue = s.value("paths_ris_ue", sc.system.paths_ris_ue);
            sc.system.carrier_hz = s.value("carrier_ghz", sc.system.carrier_hz / 1e9) * 1e9;
            sc.system.bandwidth_hz = s.value("bandwidth_ghz", sc.system.bandwidth_hz / 1e9) * 1e9;
            sc.system.noise_dbm = s.value("noise_dbm", sc.system.noise_dbm);
            sc.system.tx_power_dbm = s.value("tx_power_dbm", sc.system.tx_power_dbm);
        }
        if (j.contains("geometry")) {
            const auto &g = j.at("geometry");
            if (g.contains("array_origin_m"))
                sc.geometry.array_origin = detail::vec3_from_json(g.at("array_origin_m"), "geometry.array_origin_m");
            if (g.contains("ris_center_m"))
                sc.geometry.ris_center = detail::vec3_from_json(g.at("ris_center_m"), "geometry.ris_center_m");
            if (g.contains("ue_positions_m")) {
                sc.geometry.ue_positions.clear();
                for (const auto &p : g.at("ue_positions_m"))
                    sc.geometry.ue_positions.push_back(detail::vec3_from_json(p, "geometry.ue_positions_m[]"));
            }
        }
        if (j.contains("blockage")) {
            const auto &b = j.at("blockage");
            sc.blockage.density = b.value("density", sc.blockage.density);
            sc.blockage.guard_angle = b.value("guard_angle_deg", 0.0) * std::numbers::pi / 180.0;
            if (b.contains("scene"))
                for (const auto &o : b.at("scene"))
                    sc.blockage.scene.push_back(
                        {detail::vec3_from_json(o.at("center_m"), "blockage.scene[].center_m"),
                         o.at("radius_m").get<double>()});
        }
        if (j.contains("pathloss")) {
            const auto &p = j.at("pathloss");
            sc.pathloss.k_los = p.value("k_los", sc.pathloss.k_los);
            sc.pathloss.k_nlos = p.value("k_nlos", sc.pathloss.k_nlos);
            sc.pathloss.beta_los = p.value("beta_los", sc.pathloss.beta_los);
            sc.pathloss.beta_nlos = p.value("beta_nlos", sc.pathloss.beta_nlos);
            sc.pathloss.los_scale = p.value("los_scale_m", sc.pathloss.los_scale);
        }
        if (j.contains("gs")) {
            const auto &g = j.at("gs");
            sc.gs.max_iter = g.value("max_iter", sc.gs.max_iter);
            sc.gs.tikhonov = g.value("tikhonov", sc.gs.tikhonov);
            sc.gs.rel_tol = g.value("rel_tol", sc.gs.rel_tol);
            sc.gs.sidelobe_weight = g.value("sidelobe_weight", sc.gs.sidelobe_weight);
            sc.gs.blocked_weight = g.value("blocked_weight", sc.gs.blocked_weight);
            sc.gs.sidelobe_cap_db = g.value("sidelobe_cap_db", sc.gs.sidelobe_cap_db);
            sc.gs.blocked_cap_db = g.value("blocked_cap_db", sc.gs.blocked_cap_db);
            sc.gs.grid_density_factor = g.value("grid_density_factor", sc.gs.grid_density_factor);
        }
        if (j.contains("energy")) {
            const auto &e = j.at("energy");
            sc.energy.motion_power_w = e.value("motion_power_w", sc.energy.motion_power_w);
            sc.energy.dynamic_power_per_antenna_w =
                e.value("dynamic_power_per_antenna_w", sc.energy.dynamic_power_per_antenna_w);
            sc.energy.static_power_w = e.value("static_power_w", sc.energy.static_power_w);
            sc.energy.amp_efficiency = e.value("amp_efficiency", sc.energy.amp_efficiency);
            sc.energy.move_time_s = e.value("tau_ms", sc.energy.move_time_s * 1e3) * 1e-3;
            sc.energy.slot_s = e.value("slot_ms", sc.energy.slot_s * 1e3) * 1e-3;
        }
        if (j.contains("training")) {
            const auto &t = j.at("training");
            sc.training.pilot_length = t.value("pilot_length", sc.training.pilot_length);
            sc.training.slot_duration_s = t.value("slot_ms", sc.training.slot_duration_s * 1e3) * 1e-3;
            sc.training.move_time_s = t.value("move_time_ms", sc.training.move_time_s * 1e3) * 1e-3;
        }
        if (j.contains("stage1")) {
            const auto &s = j.at("stage1");
            sc.stage1.snapshots = s.value("snapshots", sc.stage1.snapshots);
            sc.stage1.iterations = s.value("iterations", sc.stage1.iterations);
            sc.stage1.restarts = s.value("restarts", sc.stage1.restarts);
            sc.stage1.covariance.sector_count =
                s.value("sector_count", sc.stage1.covariance.sector_count);
            sc.stage1.covariance.drop_threshold =
                s.value("drop_threshold", sc.stage1.covariance.drop_threshold);
        }
        sc.trials = j.value("trials", sc.trials);
        sc.seed = j.value("seed", sc.seed);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    sc.validate();
    return sc;
}

inline nlohmann::json scenario_to_json(const Scenario &sc)
{
    nlohmann::json j;
    j["system"] = {{"array_elements", sc.system.array_elements},
                   {"ris_elements", sc.system.ris_elements},
                   {"users", sc.system.users},
                   {"paths_bs_ris", sc.system.paths_bs_ris},
                   {"paths_ris_ue", sc.system.paths_ris_ue},
                   {"carrier_ghz", sc.system.carrier_hz / 1e9},
                   {"bandwidth_ghz", sc.system.bandwidth_hz / 1e9},
                   {"noise_dbm", sc.system.noise_dbm},
                   {"tx_power_dbm", sc.system.tx_power_dbm}};
    j["geometry"] = {{"array_origin_m",
                      {sc.geometry.array_origin.x(), sc.geometry.array_origin.y(), sc.geometry.array_origin.z()}},
                     {"ris_center_m",
                      {sc.geometry.ris_center.x(), sc.geometry.ris_center.y(), sc.geometry.ris_center.z()}}};
    nlohmann::json ues = nlohmann::json::array();
    for (const auto &p : sc.geometry.ue_positions)
        ues.push_back({p.x(), p.y(), p.z()});
    j["geometry"]["ue_positions_m"] = std::move(ues);
    j["blockage"] = {{"density", sc.blockage.density},
                     {"guard_angle_deg", sc.blockage.guard_angle * 180.0 / std::numbers::pi}};
    if (!sc.blockage.scene.empty()) {
        nlohmann::json scene = nlohmann::json::array();
        for (const auto &b : sc.blockage.scene)
            scene.push_back({{"center_m", {b.center.x(), b.center.y(), b.center.z()}},
                             {"radius_m", b.radius}});
        j["blockage"]["scene"] = std::move(scene);
    }
    j["pathloss"] = {{"k_los", sc.pathloss.k_los},
                     {"k_nlos", sc.pathloss.k_nlos},
                     {"beta_los", sc.pathloss.beta_los},
                     {"beta_nlos", sc.pathloss.beta_nlos},
                     {"los_scale_m", sc.pathloss.los_scale}};
    j["gs"] = {{"max_iter", sc.gs.max_iter},
               {"tikhonov", sc.gs.tikhonov},
               {"rel_tol", sc.gs.rel_tol},
               {"sidelobe_weight", sc.gs.sidelobe_weight},
               {"blocked_weight", sc.gs.blocked_weight},
               {"sidelobe_cap_db", sc.gs.sidelobe_cap_db},
               {"blocked_cap_db", sc.gs.blocked_cap_db},
               {"grid_density_factor", sc.gs.grid_density_factor}};
    j["energy"] = {{"motion_power_w", sc.energy.motion_power_w},
                   {"dynamic_power_per_antenna_w", sc.energy.dynamic_power_per_antenna_w},
                   {"static_power_w", sc.energy.static_power_w},
                   {"amp_efficiency", sc.energy.amp_efficiency},
                   {"tau_ms", sc.energy.move_time_s * 1e3},
                   {"slot_ms", sc.energy.slot_s * 1e3}};
    j["training"] = {{"pilot_length", sc.training.pilot_length},
                     {"slot_ms", sc.training.slot_duration_s * 1e3},
                     {"move_time_ms", sc.training.move_time_s * 1e3}};
    j["stage1"] = {{"snapshots", sc.stage1.snapshots},
                   {"iterations", sc.stage1.iterations},
                   {"restarts", sc.stage1.restarts},
                   {"sector_count", sc.stage1.covariance.sector_count},
                   {"drop_threshold", sc.stage1.covariance.drop_threshold}};
    j["trials"] = sc.trials;
    j["seed"] = sc.seed;
    return j;
}

/// Random disc placement until the blocked fraction of the fov lands
/// within +-1% of the target. The last disc's radius is bisected onto
/// the band, so the construction terminates for any target < 1.
inline BlockageScene generate_scene(double density, const GeometryConfig &geo, const AngularSet &fov,
                                    Rng &rng)
{
    BlockageScene scene;
    if (density <= 0.0)
        return scene;
    const Eigen::Vector3d &origin = geo.array_origin;
    if (density > 0.99) {
        // full blockage: a disc enclosing the array blocks every direction
        scene.blockages.push_back({origin, 1.0});
        return scene;
    }
    const double tol = 0.01;
    auto blocked_fraction = [&](const BlockageScene &s) {
        return 1.0 - available_angles(origin, fov, s).measure() / fov.measure();
    };

    const double lo_az = fov.lower(), hi_az = fov.upper();
    for (int attempt = 0; attempt < 4096; ++attempt) {
        const double f = blocked_fraction(scene);
        if (f >= density - tol)
            break;
        const double az = uniform(rng, lo_az + 0.05, hi_az - 0.05);
        const double dist = uniform(rng, 2.0, 8.0);
        const double r_max = std::min(uniform(rng, 0.2, 0.8), 0.9 * dist);
        Blockage blk{origin + dist * Eigen::Vector3d(std::cos(az), std::sin(az), 0.0), r_max};

        scene.blockages.push_back(blk);
        if (blocked_fraction(scene) > density + tol) {
            // too much: bisect this disc's radius onto the band
            double lo = 0.0, hi = r_max;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                scene.blockages.back().radius = mid;
                const double fm = blocked_fraction(scene);
                if (fm > density + tol)
                    hi = mid;
                else if (fm < density - tol)
                    lo = mid;
                else
                    break;
            }
            break;
        }
    }
    return scene;
}

struct TrialRow {
    int trial = 0;
    std::uint64_t seed = 0;
    std::string method;
    double density = 0.0;
    double snr_db = 0.0;
    int evaluations = 0;
    double rate_bps_hz = 0.0;
    bool outage = false;
    int moves = 0;
    int overhead = 0; // evaluations to reach the 80% target, budget-clipped
    double ee_bits_per_joule = 0.0;
    double axis_value = 0.0;
};

inline std::string trial_csv_header()
{
    return "trial,seed,method,density,snr_db,evaluations,rate_bps_hz,outage,moves,overhead,"
           "ee_bits_per_joule";
}

inline std::string to_csv(const TrialRow &row)
{
    std::ostringstream out;
    out << row.trial << ',' << row.seed << ',' << row.method << ',' << std::setprecision(10)
        << row.density << ',' << row.snr_db << ',' << row.evaluations << ',' << row.rate_bps_hz
        << ',' << (row.outage ? 1 : 0) << ',' << row.moves << ',' << row.overhead << ','
        << row.ee_bits_per_joule;
    return out.str();
}

namespace detail {

template <typename Fn> inline void parallel_for(int n, int threads, Fn &&fn)
{
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                fn(i);
        });
    for (auto &th : pool)
        th.join();
}

} // namespace detail

/// One Monte-Carlo trial: scene, blockage detection, Stage-I phases,
/// aware and traditional codebooks, all searches, metrics. The
/// traditional codebook is scene-independent and passed in prebuilt.
inline std::vector<TrialRow> run_trial(const Scenario &sc, int trial,
                                       const HierarchicalCodebook &traditional_book)
{
    const std::uint64_t trial_seed = derive_seed(sc.seed, static_cast<std::uint64_t>(trial));
    Rng scene_rng = make_rng(trial_seed, 1);

    const int m = sc.system.array_elements;
    const double lambda = sc.system.wavelength();
    const ArrayLayout layout = ArrayLayout::ula(m, lambda, sc.geometry.array_origin);
    const RisGeometry ris = RisGeometry::ula(sc.system.ris_elements, lambda, sc.geometry.ris_center);
    const AngularSet fov_az = sc.fov_azimuth();

    BlockageScene scene = sc.blockage.scene.empty()
                              ? generate_scene(sc.blockage.density, sc.geometry, fov_az, scene_rng)
                              : BlockageScene{sc.blockage.scene};
    const BlockageReport report = detect_blockage(layout, ris, scene, fov_az, sc.blockage.guard_angle);
    const double density = 1.0 - report.available.measure() / fov_az.measure();
    const AngularSet blocked_az = set_subtract(fov_az, report.available);
    const AngularSet available_u = azimuth_to_u(report.available);

    const LinkBudget budget = sc.system.budget();
    const double snr_db = 10.0 * std::log10(budget.tx_power_w / budget.noise_power_w);
    const UeGeometry ues{sc.geometry.ue_positions};

    // Stage-I: statistical CSI over a snapshot window, then fixed-point
    // phase optimization of the quadratic surrogate.
    std::vector<ChannelRealization> snapshots;
    snapshots.reserve(static_cast<std::size_t>(sc.stage1.snapshots));
    for (int i = 0; i < sc.stage1.snapshots; ++i)
        snapshots.push_back(synthesize_channels(layout, ris, ues, sc.pathloss, sc.system.paths_bs_ris,
                                                sc.system.paths_ris_ue,
                                                derive_seed(trial_seed, 1000 + static_cast<std::uint64_t>(i)),
                                                fov_az, &blocked_az));
    const StatCsi csi = estimate_covariances(snapshots, sc.stage1.snapshots, sc.stage1.covariance);
    const QuadSurrogate q = build_q(csi);
    const RisPhase phi = optimize_phases(q, sc.stage1.iterations, 1e-10, sc.stage1.restarts,
                                         derive_seed(trial_seed, 2))
                             .phi;

    // evaluation channel, distinct from the Stage-I window
    const ChannelRealization channel =
        synthesize_channels(layout, ris, ues, sc.pathloss, sc.system.paths_bs_ris,
                            sc.system.paths_ris_ue, derive_seed(trial_seed, 3), fov_az, &blocked_az);

    // reference: perfect-CSI best rate over the flat scanning codebook
    const auto rows = detail::cascade_rows(channel, phi);
    const CMatrix dft = dft_codebook(m);
    double reference_rate = 0.0;
    for (int b = 0; b < m; ++b)
        reference_rate = std::max(reference_rate, detail::true_sum_rate(rows, dft.col(b), budget));

    std::vector<TrialRow> out;
    auto push_result = [&](const std::string &method, const TrainingResult &r, int budget_evals) {
        TrialRow row;
        row.trial = trial;
        row.seed = trial_seed;
        row.method = method;
        row.density = density;
        row.snr_db = snr_db;
        row.evaluations = r.evaluations;
        row.outage = r.outage;
        row.moves = 1; // single positioning move per slot
        double sum_rate = 0.0;
        for (double v : r.measured_rates)
            sum_rate += v;
        row.rate_bps_hz = sum_rate;
        const int oh = overhead_to_target(r.best_rate_curve, reference_rate, 0.8);
        row.overhead = oh == overhead_unreached ? budget_evals : oh;
        row.ee_bits_per_joule =
            energy_efficiency(sc.energy, m, sum_rate * budget.bandwidth_hz, row.moves,
                              budget.tx_power_w);
        out.push_back(std::move(row));
    };

    // Synthesis carries a per-element power convention; over the air every
    // beam is applied at unit gain so the budget's transmit power is the
    // radiated power for all methods alike.
    auto unit_gain = [](HierarchicalCodebook book) {
        for (auto &layer : book.layers)
            for (auto &cw : layer) {
                const double nrm = cw.weights.norm();
                if (!cw.pruned && nrm > 0.0)
                    cw.weights /= nrm;
            }
        return book;
    };

    const int depth = static_cast<int>(std::log2(m));
    const bool full_outage = report.available.measure() <= 1e-12;
    // The aware build shares the traditional book's init seed so a
    // blockage-free scene reproduces the traditional tree exactly.
    Rng search_rng = make_rng(trial_seed, 4);
    try {
        const HierarchicalCodebook aware_book =
            unit_gain(build_hierarchy(available_u, m, sc.gs, derive_seed(sc.seed, 0xfeed)));
        const TrainingResult prop = hierarchical_search(aware_book, channel, phi, budget,
                                                        sc.training.pilot_length, true, search_rng);
        push_result("proposed", prop, 2 * depth);
    } catch (const OutageError &) {
        TrainingResult r;
        r.outage = true;
        push_result("proposed", r, 2 * depth);
    }

    Rng trad_rng = make_rng(trial_seed, 4);
    TrainingResult trad = hierarchical_search(unit_gain(traditional_book), channel, phi, budget,
                                              sc.training.pilot_length, false, trad_rng);
    trad.outage |= full_outage; // nothing reachable, whatever the tree says
    push_result("traditional", trad, 2 * depth);

    Rng ex_rng = make_rng(trial_seed, 7);
    std::vector<CVector> beams;
    beams.reserve(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b)
        beams.push_back(dft.col(b));
    const TrainingResult ex =
        exhaustive_search(beams, channel, phi, budget, sc.training.pilot_length, ex_rng);
    push_result("dft_exhaustive", ex, m);

    return out;
}

inline HierarchicalCodebook build_traditional_book(const Scenario &sc)
{
    return build_hierarchy(AngularSet::interval(-1.0, 1.0), sc.system.array_elements, sc.gs,
                           derive_seed(sc.seed, 0xfeed));
}

inline std::vector<TrialRow> run_scenario(const Scenario &sc, int parallel = 1)
{
    sc.validate();
    const HierarchicalCodebook traditional = build_traditional_book(sc);
    std::vector<std::vector<TrialRow>> per_trial(static_cast<std::size_t>(sc.trials));
    detail::parallel_for(sc.trials, parallel, [&](int i) {
        per_trial[static_cast<std::size_t>(i)] = run_trial(sc, i, traditional);
    });
    std::vector<TrialRow> rows;
    for (auto &tr : per_trial)
        for (auto &row : tr)
            rows.push_back(std::move(row));
    return rows;
}

enum class SweepAxis { snr_db, tx_power_dbm, blockage_density, overhead_budget };

struct SweepSpec {
    SweepAxis axis = SweepAxis::snr_db;
    std::vector<double> values;
    std::vector<std::string> methods{"proposed", "traditional", "dft_exhaustive"};

    void validate() const
    {
        if (values.empty())
            throw ConfigError("sweep.values: nonempty required");
        if (!std::is_sorted(values.begin(), values.end()))
            throw ConfigError("sweep.values: sorted required");
    }
};

inline SweepAxis sweep_axis_from_string(const std::string &s)
{
    if (s == "snr_db")
        return SweepAxis::snr_db;
    if (s == "tx_power_dbm")
        return SweepAxis::tx_power_dbm;
    if (s == "blockage_density")
        return SweepAxis::blockage_density;
    if (s == "overhead_budget")
        return SweepAxis::overhead_budget;
    throw ConfigError("sweep.axis: unknown axis '" + s + "'");
}

inline std::string to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::snr_db: return "snr_db";
    case SweepAxis::tx_power_dbm: return "tx_power_dbm";
    case SweepAxis::blockage_density: return "blockage_density";
    case SweepAxis::overhead_budget: return "overhead_budget";
    }
    return "unknown";
}

inline std::vector<TrialRow> sweep(const Scenario &base, const SweepSpec &spec, int parallel = 1)
{
    spec.validate();
    std::vector<TrialRow> all;
    for (double value : spec.values) {
        Scenario sc = base;
        switch (spec.axis) {
        case SweepAxis::snr_db:
            sc.system.tx_power_dbm = sc.system.noise_dbm + value;
            break;
        case SweepAxis::tx_power_dbm:
            sc.system.tx_power_dbm = value;
            break;
        case SweepAxis::blockage_density:
            sc.blockage.density = value;
            sc.blockage.scene.clear();
            break;
        case SweepAxis::overhead_budget:
            break; // handled per-row below
        }
        std::vector<TrialRow> rows = run_scenario(sc, parallel);
        for (auto &row : rows) {
            row.axis_value = value;
            if (spec.axis == SweepAxis::overhead_budget)
                row.evaluations = std::min(row.evaluations, static_cast<int>(value));
            if (std::find(spec.methods.begin(), spec.methods.end(), row.method) !=
                spec.methods.end())
                all.push_back(std::move(row));
        }
    }
    return all;
}

struct SweepSummaryRow {
    double axis_value = 0.0;
    std::string method;
    double mean_rate = 0.0;
    double median_rate = 0.0;
    double iqr_rate = 0.0;
    double mean_overhead = 0.0;
    double mean_ee = 0.0;
    double outage_fraction = 0.0;
};

inline std::vector<SweepSummaryRow> summarize_sweep(const std::vector<TrialRow> &rows)
{
    std::vector<SweepSummaryRow> summary;
    std::vector<std::pair<double, std::string>> keys;
    for (const auto &row : rows) {
        std::pair<double, std::string> key{row.axis_value, row.method};
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            keys.push_back(std::move(key));
    }
    for (const auto &[value, method] : keys) {
        std::vector<double> rates;
        double sum_rate = 0.0, sum_oh = 0.0, sum_ee = 0.0;
        int n = 0, outages = 0;
        for (const auto &row : rows) {
            if (row.axis_value != value || row.method != method)
                continue;
            rates.push_back(row.rate_bps_hz);
            sum_rate += row.rate_bps_hz;
            sum_oh += row.overhead;
            sum_ee += row.ee_bits_per_joule;
            ++n;
            if (row.outage)
                ++outages;
        }
        std::sort(rates.begin(), rates.end());
        auto quantile = [&](double q) {
            const double pos = q * (rates.size() - 1);
            const std::size_t i = static_cast<std::size_t>(pos);
            const double frac = pos - i;
            return i + 1 < rates.size() ? rates[i] * (1.0 - frac) + rates[i + 1] * frac : rates[i];
        };
        SweepSummaryRow s;
        s.axis_value = value;
        s.method = method;
        s.mean_rate = sum_rate / n;
        s.median_rate = quantile(0.5);
        s.iqr_rate = quantile(0.75) - quantile(0.25);
        s.mean_overhead = sum_oh / n;
        s.mean_ee = sum_ee / n;
        s.outage_fraction = static_cast<double>(outages) / n;
        summary.push_back(std::move(s));
    }
    return summary;
}

struct ConvergenceTrace {
    double density = 0.0;
    int realization = 0;
    int layer = 1;
    std::vector<double> r; // normalized masked residual, r[0] = 1
    int iterations_to_threshold = 0;
};

/// Per-(density, realization) normalized residual traces of single-node
/// synthesis runs, layers cycled so every layer is represented.
inline std::vector<ConvergenceTrace> convergence_experiment(const Scenario &sc,
                                                            const std::vector<double> &densities,
                                                            int realizations_per_density,
                                                            int trace_iters = 100,
                                                            double threshold = 1e-3,
                                                            int parallel = 1)
{
    for (double d : densities)
        if (d < 0.0 || d >= 1.0)
            throw ConfigError("convergence.densities: values in [0, 1) required");

    const int m = sc.system.array_elements;
    const int depth = static_cast<int>(std::log2(m));
    GsConfig cfg = sc.gs;
    cfg.max_iter = trace_iters;
    cfg.rel_tol = 0.0; // full-length traces, no early stop

    struct Job {
        double density;
        int realization;
    };
    std::vector<Job> jobs;
    for (double d : densities)
        for (int i = 0; i < realizations_per_density; ++i)
            jobs.push_back({d, i});

    std::vector<ConvergenceTrace> traces(jobs.size());
    const AngularSet fov_az = sc.fov_azimuth();
    const AngularSet fov_u = AngularSet::interval(-1.0, 1.0);

    detail::parallel_for(static_cast<int>(jobs.size()), parallel, [&](int jidx) {
        const Job &job = jobs[static_cast<std::size_t>(jidx)];
        const std::uint64_t job_seed =
            derive_seed(sc.seed, 0x1000 + static_cast<std::uint64_t>(jidx));
        Rng rng = make_rng(job_seed);

        AngularSet available_u = fov_u;
        if (job.density > 0.0) {
            const BlockageScene scene = generate_scene(job.density, sc.geometry, fov_az, rng);
            available_u =
                azimuth_to_u(available_angles(sc.geometry.array_origin, fov_az, scene));
        }
        const AngularSet blocked_u = set_subtract(fov_u, available_u);

        ConvergenceTrace trace;
        trace.density = job.density;
        trace.realization = job.realization;
        trace.layer = 1 + job.realization % depth;

        // random sector at this layer with nonempty available overlap
        const int count = 1 << trace.layer;
        const double width = 2.0 / count;
        AngularSet active;
        for (int tries = 0; tries < 64 && active.measure() <= 1e-9; ++tries) {
            const int idx = static_cast<int>(uniform(rng, 0.0, count)) % count;
            active = set_intersect(AngularSet::interval(-1.0 + idx * width, -1.0 + (idx + 1) * width),
                                   available_u);
        }
        if (active.measure() <= 1e-9) {
            trace.r = {1.0};
            trace.iterations_to_threshold = 0;
            traces[static_cast<std::size_t>(jidx)] = std::move(trace);
            return;
        }

        // Stress construction, deliberately stricter than the production
        // hierarchy: hard zeros across the entire blocked set (transition
        // bands included) and the dictionary at half-beamwidth spacing.
        // This measures the loop against the full infeasible mask, where
        // the residual settles onto a plateau instead of vanishing.
        const SectorSpec spec = make_sector_spec(active, blocked_u, fov_u, m, cfg);
        const NullSpaceProjector proj =
            build_projector(steering_dictionary(m, stress_blocked_samples(blocked_u, m)));

        CVector w0(m);
        for (int i = 0; i < m; ++i)
            w0(i) = random_phase(rng);
        auto [cw, gs_trace] = gs_iterate(w0, spec, proj, cfg);
        (void)cw;

        const double e0 = gs_trace.e.empty() ? 1.0 : gs_trace.e.front();
        trace.r.reserve(gs_trace.e.size());
        for (double e : gs_trace.e)
            trace.r.push_back(e0 > 0.0 ? e / e0 : 1.0);

        // step size measured against the initial error: a fixed yardstick
        // keeps deep-stalled runs (tiny residual) comparable to slow ones
        trace.iterations_to_threshold = static_cast<int>(gs_trace.e.size());
        for (std::size_t t = 1; t < gs_trace.e.size(); ++t) {
            if (e0 > 0.0 && (gs_trace.e[t - 1] - gs_trace.e[t]) / e0 < threshold) {
                trace.iterations_to_threshold = static_cast<int>(t);
                break;
            }
        }
        traces[static_cast<std::size_t>(jidx)] = std::move(trace);
    });
    return traces;
}

inline std::string convergence_csv(const std::vector<ConvergenceTrace> &traces)
{
    std::ostringstream out;
    out << "density,realization,layer,t,r\n";
    for (const auto &trace : traces)
        for (std::size_t t = 0; t < trace.r.size(); ++t)
            out << std::setprecision(10) << trace.density << ',' << trace.realization << ','
                << trace.layer << ',' << t << ',' << trace.r[t] << '\n';
    return out.str();
}

inline std::string convergence_iters_csv(const std::vector<ConvergenceTrace> &traces)
{
    std::ostringstream out;
    out << "density,realization,layer,iterations_to_threshold\n";
    for (const auto &trace : traces)
        out << std::setprecision(10) << trace.density << ',' << trace.realization << ','
            << trace.layer << ',' << trace.iterations_to_threshold << '\n';
    return out.str();
}

/// Plot-ready CSV for a target figure's axes; aggregation only, no
/// plotting.
inline std::string emit_figure_data(const std::vector<TrialRow> &rows, const std::string &figure_id)
{
    const auto summary = summarize_sweep(rows);
    std::ostringstream out;
    out << std::setprecision(10);
    if (figure_id == "fig8") {
        out << "snr_db,method,rate_gbps_mean,rate_gbps_ci\n";
        for (const auto &s : summary)
            out << s.axis_value << ',' << s.method << ',' << s.mean_rate << ','
                << 1.96 * s.iqr_rate / 1.349 << '\n'; // normal-equivalent CI from IQR
    } else if (figure_id == "fig9") {
        out << "overhead_budget,method,rate_gbps_mean\n";
        for (const auto &s : summary)
            out << s.axis_value << ',' << s.method << ',' << s.mean_rate << '\n';
    } else if (figure_id == "fig10") {
        out << "snr_db,method,ee_mbits_per_joule_mean\n";
        for (const auto &s : summary)
            out << s.axis_value << ',' << s.method << ',' << s.mean_ee / 1e6 << '\n';
    } else if (figure_id == "fig11") {
        out << "blockage_density,method,mean_overhead,ee_mbits_per_joule_mean\n";
        for (const auto &s : summary)
            out << s.axis_value << ',' << s.method << ',' << s.mean_overhead << ','
                << s.mean_ee / 1e6 << '\n';
    } else {
        throw ConfigError("figure_id: unknown '" + figure_id + "'");
    }
    return out.str();
}

} // namespace blockbeam
