// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Acceptance gate: eleven end-to-end criteria, one pass/fail line each.
// Exits nonzero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "blockbeam/scenario.hpp"

using namespace blockbeam;

namespace {

constexpr double pi = std::numbers::pi;

double mean(const std::vector<double> &v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// least-squares slope of y against x
double fit_slope(const std::vector<double> &x, const std::vector<double> &y)
{
    const double mx = mean(x), my = mean(y);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

struct SynthInstance {
    SectorSpec spec;
    NullSpaceProjector proj;
    CVector w0;
};

// Scene density for one synthesis instance: blocked operation is the
// production regime, so heavier densities are drawn more often.
double draw_density(Rng &rng)
{
    const double u = uniform(rng, 0.0, 1.0);
    if (u < 0.1)
        return 0.0;
    if (u < 0.3)
        return 0.1;
    if (u < 0.6)
        return 0.3;
    return 0.5;
}

// Uniformly random node of a depth-`depth` binary sector tree; layer s
// holds 2^s nodes, so deep (production) layers dominate the draw.
int draw_node_layer(Rng &rng, int depth)
{
    const int total = (2 << depth) - 2;
    int x = static_cast<int>(uniform(rng, 0.0, static_cast<double>(total)));
    for (int s = 1; s < depth; ++s) {
        x -= 1 << s;
        if (x < 0)
            return s;
    }
    return depth;
}

// Random dyadic sector plus a random blockage scene at the given target
// density, retried until the sector keeps an available part of at least
// min_active and (optionally) a usable in-sector target after the null
// projection. layer = 0 draws the layer uniformly.
SynthInstance random_instance(int m, double density, Rng &rng, const GsConfig &cfg,
                              bool require_blocked, int layer = 0, double min_active = 1e-9,
                              double min_projected = 0.0)
{
    const GeometryConfig geo;
    const AngularSet fov_az = AngularSet::interval(0.0, pi);
    const AngularSet fov_u = AngularSet::interval(-1.0, 1.0);
    const int depth = static_cast<int>(std::log2(m));

    for (;;) {
        AngularSet available = fov_u;
        if (density > 0.0) {
            const BlockageScene scene = generate_scene(density, geo, fov_az, rng);
            available = azimuth_to_u(available_angles(geo.array_origin, fov_az, scene));
        }
        const AngularSet blocked = set_subtract(fov_u, available);
        if (require_blocked && blocked.measure() < 0.05)
            continue;

        const int s = layer > 0 ? layer : 1 + static_cast<int>(uniform(rng, 0.0, depth)) % depth;
        const int count = 1 << s;
        const double width = 2.0 / count;
        AngularSet active;
        for (int tries = 0; tries < 64 && active.measure() < min_active; ++tries) {
            const int idx = static_cast<int>(uniform(rng, 0.0, count)) % count;
            active = set_intersect(
                AngularSet::interval(-1.0 + idx * width, -1.0 + (idx + 1) * width), available);
        }
        if (active.measure() < min_active || active.measure() <= 1e-9)
            continue;

        SynthInstance inst;
        inst.spec = make_sector_spec(active, blocked, fov_u, m, cfg);
        if (inst.spec.in_indices().empty())
            continue;
        std::vector<double> blocked_us;
        for (std::size_t i = 0; i < inst.spec.grid.size(); ++i)
            if (inst.spec.grid.tags[i] == RegionTag::blocked)
                blocked_us.push_back(inst.spec.grid.samples[i]);
        if (require_blocked && blocked_us.empty())
            continue;
        inst.proj = build_projector(steering_dictionary(m, blocked_us));
        if (min_projected > 0.0) {
            const CMatrix a = steering_dictionary(m, inst.spec.grid.samples);
            const CMatrix a_in = detail::submatrix(a, inst.spec.in_indices());
            double best = 0.0;
            for (Eigen::Index j = 0; j < a_in.cols(); ++j)
                best = std::max(best, (inst.proj.projector * a_in.col(j)).norm());
            if (best < min_projected)
                continue;
        }
        inst.w0 = CVector(m);
        for (int i = 0; i < m; ++i)
            inst.w0(i) = random_phase(rng);
        return inst;
    }
}

// Light Monte-Carlo scenario used by the training / energy criteria.
Scenario light_scenario()
{
    Scenario sc;
    sc.system.array_elements = 64;
    sc.system.ris_elements = 64;
    sc.stage1.snapshots = 16;
    sc.stage1.restarts = 2;
    sc.stage1.iterations = 100;
    sc.blockage.density = 0.3;
    return sc;
}

std::vector<double> rows_for(const std::vector<TrialRow> &rows, const std::string &method,
                             const std::function<double(const TrialRow &)> &get)
{
    std::vector<double> out;
    for (const auto &row : rows)
        if (row.method == method)
            out.push_back(get(row));
    return out;
}

// Exhaustive maximization of phi^H Q phi over 16 phase levels with the
// first element pinned (global phase invariance makes the pin lossless).
double quantized_best(const CMatrix &q)
{
    const int n = static_cast<int>(q.rows());
    constexpr int levels = 16;
    std::array<Complex, levels> lv;
    for (int l = 0; l < levels; ++l)
        lv[static_cast<std::size_t>(l)] = std::polar(1.0, 2.0 * pi * l / levels);

    std::vector<Complex> phi(static_cast<std::size_t>(n));
    phi[0] = Complex(1.0, 0.0);
    double best = -std::numeric_limits<double>::infinity();

    std::function<void(int, double)> rec = [&](int d, double acc) {
        Complex s(0.0, 0.0);
        for (int j = 0; j < d; ++j)
            s += q(d, j) * phi[static_cast<std::size_t>(j)];
        const double diag = q(d, d).real();
        if (d == n - 1) {
            for (const Complex &c : lv)
                best = std::max(best, acc + diag + 2.0 * std::real(std::conj(c) * s));
            return;
        }
        for (const Complex &c : lv) {
            phi[static_cast<std::size_t>(d)] = c;
            rec(d + 1, acc + diag + 2.0 * std::real(std::conj(c) * s));
        }
    };
    rec(1, q(0, 0).real());
    return best;
}

int g_failures = 0;

void report(int id, bool pass, const std::string &detail)
{
    if (!pass)
        ++g_failures;
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << " (" << detail << ")"
              << std::endl;
}

void run_criterion(int id, const std::function<std::pair<bool, std::string>()> &fn)
{
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        auto [p, d] = fn();
        pass = p;
        detail = d;
    } catch (const std::exception &e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream tagged;
    tagged << detail << ", " << std::fixed << std::setprecision(1) << secs << "s";
    report(id, pass, tagged.str());
}

// 1. Half-step monotonicity and iteration cap over 400 random nodes
// drawn as in production: uniformly over the 126 tree nodes, with scene
// densities weighted toward blocked operation.
std::pair<bool, std::string> criterion1()
{
    const auto start = std::chrono::steady_clock::now();
    const int m = 64;
    GsConfig cfg; // max_iter 40
    cfg.rel_tol = 0.0; // full traces; convergence judged on the recording
    Rng rng = make_rng(1001);

    int mono_violations = 0, converged = 0;
    const int total = 400;
    for (int i = 0; i < total; ++i) {
        const double density = draw_density(rng);
        const int layer = draw_node_layer(rng, 6);
        const SynthInstance inst = random_instance(m, density, rng, cfg, false, layer);
        const auto [cw, trace] = gs_iterate(inst.w0, inst.spec, inst.proj, cfg);
        (void)cw;
        for (std::size_t t = 0; t < trace.e_half.size(); ++t)
            if (trace.e_half[t] > trace.e[t] * (1.0 + 1e-9) + 1e-12)
                ++mono_violations;
        // converged: some step within the 40-iteration budget shrinks
        // below 1e-4 of the initial masked error
        for (std::size_t t = 1; t < trace.e.size() && t <= 40; ++t)
            if (trace.e0 > 0.0 && (trace.e[t - 1] - trace.e[t]) / trace.e0 < 1e-4) {
                ++converged;
                break;
            }
    }
    const double frac = static_cast<double>(converged) / total;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream msg;
    msg << "half-step violations=" << mono_violations << ", converged_by_40=" << frac;
    return {mono_violations == 0 && frac >= 0.95 && secs < 300.0, msg.str()};
}

// Shared traces for criteria 2 and 3.
const std::vector<double> conv_densities{0.0, 0.25, 0.5};
std::vector<ConvergenceTrace> g_traces;

std::vector<ConvergenceTrace> &conv_traces()
{
    if (g_traces.empty()) {
        Scenario sc;
        sc.seed = 2002;
        g_traces = convergence_experiment(sc, conv_densities, 240, 101, 1e-3, 1);
    }
    return g_traces;
}

// 2. Normalized residual level at t=20 and plateau through t=100 at the
// half-blocked operating density.
std::pair<bool, std::string> criterion2()
{
    std::vector<double> r20, r100;
    for (const auto &trace : conv_traces()) {
        if (trace.density != 0.5 || trace.r.size() < 101)
            continue;
        r20.push_back(trace.r[20]);
        r100.push_back(trace.r[100]);
    }
    const double m20 = median(r20), m100 = median(r100);
    std::ostringstream msg;
    msg << "n=" << r20.size() << ", median_r20=" << m20 << ", median_r100=" << m100;
    const bool pass =
        r20.size() >= 240 && m20 >= 0.5 && m20 <= 0.8 && std::abs(m100 - m20) < 0.05;
    return {pass, msg.str()};
}

// 3. Median iterations-to-threshold nonincreasing in density, per layer.
std::pair<bool, std::string> criterion3()
{
    const int depth = 6;
    bool pass = true;
    std::ostringstream msg;
    for (int layer = 1; layer <= depth; ++layer) {
        double prev = std::numeric_limits<double>::infinity();
        msg << "L" << layer << ":";
        for (double d : conv_densities) {
            std::vector<double> iters;
            for (const auto &trace : conv_traces())
                if (trace.layer == layer && trace.density == d && trace.r.size() >= 2)
                    iters.push_back(static_cast<double>(trace.iterations_to_threshold));
            const double med = median(iters);
            msg << " " << med;
            if (med > prev)
                pass = false;
            prev = med;
        }
        if (layer < depth)
            msg << ";";
    }
    return {pass, msg.str()};
}

// 4. Null depth before and after the constant-modulus projection.
std::pair<bool, std::string> criterion4()
{
    const int m = 64;
    GsConfig cfg;
    Rng rng = make_rng(4004);
    int pre_ok = 0, post_ok = 0;
    const int total = 100;
    double worst_pre = 0.0;
    for (int i = 0; i < total; ++i) {
        // guards skip degenerate draws: sectors thinner than a couple of
        // grid cells or almost fully annihilated by the null projector,
        // where any codeword reduces to rounding noise
        const int layer = draw_node_layer(rng, 6);
        const SynthInstance inst = random_instance(m, 0.3, rng, cfg, true, layer, 0.02, 0.1);
        const auto [cw, trace] = gs_iterate(inst.w0, inst.spec, inst.proj, cfg);
        (void)cw;
        worst_pre = std::max(worst_pre, trace.max_null_leakage_pre_cm);
        if (trace.max_null_leakage_pre_cm <= 1e-8)
            ++pre_ok;
        if (trace.final_blocked_leakage <= 1e-4 * (1.0 + 1e-9))
            ++post_ok;
    }
    std::ostringstream msg;
    msg << "pre_ok=" << pre_ok << "/" << total << ", worst_pre=" << worst_pre
        << ", post_ok=" << post_ok << "/" << total;
    return {pre_ok == total && post_ok >= 90, msg.str()};
}

// 5. Oracle equivalences: ray casting, reduced-basis solver, cascade.
std::pair<bool, std::string> criterion5()
{
    // (a) interval detector vs ray-casting oracle on 500 scenes
    const GeometryConfig geo;
    const AngularSet fov_az = AngularSet::interval(0.0, pi);
    const double tol = 0.1 * pi / 180.0;
    Rng rng = make_rng(5005);
    int ray_mismatches = 0;
    for (int s = 0; s < 500; ++s) {
        const double density = 0.1 + 0.1 * (s % 5);
        const BlockageScene scene = generate_scene(density, geo, fov_az, rng);
        const AngularSet avail = available_angles(geo.array_origin, fov_az, scene);
        for (int p = 0; p < 720; ++p) {
            const double az = (p + 0.5) * pi / 720.0;
            const bool oracle_blocked = oracle_is_blocked(geo.array_origin, az, scene);
            const bool set_blocked = !avail.contains(az);
            if (oracle_blocked == set_blocked)
                continue;
            bool near_edge = false;
            for (const auto &iv : avail.intervals())
                if (std::abs(az - iv.lo) < tol || std::abs(az - iv.hi) < tol)
                    near_edge = true;
            if (!near_edge)
                ++ray_mismatches;
        }
    }

    // (b) reduced-basis solve matches the full hard LS objective at M=32
    const int m = 32;
    int reduced_fail = 0;
    double worst_gap = 0.0;
    Rng rng_b = make_rng(5105);
    for (int i = 0; i < 20; ++i) {
        GsConfig cfg;
        cfg.tikhonov = 1e-8;
        cfg.sidelobe_weight = i % 2 == 0 ? 0.0 : 1.0;
        // min_active keeps at least a couple of in-sector grid samples;
        // min_projected skips sectors the null projector annihilates,
        // where the reduced basis is empty by declaration
        const SynthInstance inst = random_instance(m, 0.3, rng_b, cfg, true, 0, 0.02, 0.1);
        const CMatrix a_full = steering_dictionary(m, inst.spec.grid.samples);
        const CMatrix a_in = detail::submatrix(a_full, inst.spec.in_indices());
        const CMatrix a_sl = detail::submatrix(a_full, inst.spec.sidelobe_indices());
        CMatrix targets(m, a_in.cols() + (cfg.sidelobe_weight > 0.0 ? a_sl.cols() : 0));
        targets.leftCols(a_in.cols()) = a_in;
        if (cfg.sidelobe_weight > 0.0)
            targets.rightCols(a_sl.cols()) = a_sl;

        const Codeword hard = solve_hard_ls(inst.spec, inst.proj, cfg);
        const Codeword reduced = solve_reduced(gs_basis(inst.proj, targets), inst.spec, cfg);
        const CVector d = default_desired(inst.spec);
        const double obj_hard = design_objective(inst.spec, cfg, hard.weights, d, cfg.tikhonov);
        const double obj_red = design_objective(inst.spec, cfg, reduced.weights, d, cfg.tikhonov);
        const double gap = std::abs(obj_red - obj_hard) / std::max(1.0, obj_hard);
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-8)
            ++reduced_fail;
    }

    // (c) cascade vs triple-loop oracle
    Rng rng_c = make_rng(5205);
    int cascade_fail = 0;
    for (int i = 0; i < 10; ++i) {
        const int n = 16, mm = 8;
        CMatrix h_br(n, mm);
        CVector h_ru(n);
        RisPhase phi;
        phi.phases = CVector(n);
        for (int r = 0; r < n; ++r) {
            h_ru(r) = complex_gaussian(rng_c, 1.0);
            phi.phases(r) = random_phase(rng_c);
            for (int c = 0; c < mm; ++c)
                h_br(r, c) = complex_gaussian(rng_c, 1.0);
        }
        const CVector h = cascade(h_ru, phi, h_br);
        for (int c = 0; c < mm; ++c) {
            Complex acc(0.0, 0.0);
            for (int r = 0; r < n; ++r)
                acc += std::conj(h_ru(r)) * phi.phases(r) * h_br(r, c);
            if (std::abs(acc - h(c)) > 1e-12 * std::max(1.0, std::abs(acc)))
                ++cascade_fail;
        }
    }

    std::ostringstream msg;
    msg << "ray_mismatches=" << ray_mismatches << ", reduced_fail=" << reduced_fail
        << " (worst=" << worst_gap << "), cascade_fail=" << cascade_fail;
    return {ray_mismatches == 0 && reduced_fail == 0 && cascade_fail == 0, msg.str()};
}

// 6. Search overhead: per-trial evaluation bounds and the mean
// overhead-to-80%-target ratio against the scanning baseline.
std::pair<bool, std::string> criterion6()
{
    Scenario sc = light_scenario();
    sc.seed = 6006;

    // calibrate transmit power onto a moderate-rate operating point
    // (sum rate near 3 b/s/Hz) where the 80% target is selective
    const double target_sum_rate = 3.0;
    for (int it = 0; it < 3; ++it) {
        Scenario pilot = sc;
        pilot.trials = 6;
        pilot.seed = 6100 + static_cast<std::uint64_t>(it);
        const auto rows = run_scenario(pilot, 1);
        const double mean_ex =
            mean(rows_for(rows, "dft_exhaustive", [](const TrialRow &r) { return r.rate_bps_hz; }));
        if (mean_ex > 2.5 && mean_ex < 3.5)
            break;
        const double per_ue = std::max(mean_ex, 0.05) / sc.system.users;
        const double snr_cur = std::pow(2.0, per_ue) - 1.0;
        const double snr_tgt = std::pow(2.0, target_sum_rate / sc.system.users) - 1.0;
        sc.system.tx_power_dbm += 10.0 * std::log10(snr_tgt / snr_cur);
    }

    sc.trials = 40;
    const auto rows = run_scenario(sc, 1);

    const int depth = 6; // log2(64)
    int bound_violations = 0, non_outage = 0;
    for (const auto &row : rows) {
        if (row.method != "proposed" || row.outage)
            continue;
        ++non_outage;
        if (row.evaluations < depth || row.evaluations > 2 * depth)
            ++bound_violations;
    }
    const double oh_prop =
        mean(rows_for(rows, "proposed", [](const TrialRow &r) { return double(r.overhead); }));
    const double oh_ex =
        mean(rows_for(rows, "dft_exhaustive", [](const TrialRow &r) { return double(r.overhead); }));
    const double ratio = oh_ex > 0.0 ? oh_prop / oh_ex : 1.0;
    const double mean_rate =
        mean(rows_for(rows, "dft_exhaustive", [](const TrialRow &r) { return r.rate_bps_hz; }));

    std::ostringstream msg;
    msg << "bound_violations=" << bound_violations << "/" << non_outage
        << ", overhead_ratio=" << ratio << " (prop=" << oh_prop << ", ex=" << oh_ex
        << "), op_rate=" << mean_rate;
    return {non_outage > 0 && bound_violations == 0 && ratio <= 0.4, msg.str()};
}

// 7. High-SNR rate ordering and the absolute-rate band at the reference
// system size (M=64, N=256, K=2, 1 GHz bandwidth).
std::pair<bool, std::string> criterion7()
{
    Scenario sc;
    sc.system.array_elements = 64;
    sc.system.ris_elements = 256;
    sc.stage1.snapshots = 32;
    sc.stage1.restarts = 4;
    sc.blockage.density = 0.3;
    sc.trials = 16;
    sc.seed = 7007;

    const double snr_db = sc.system.tx_power_dbm - sc.system.noise_dbm;
    const auto rows = run_scenario(sc, 1);
    const double mean_ex =
        mean(rows_for(rows, "dft_exhaustive", [](const TrialRow &r) { return r.rate_bps_hz; }));
    const double mean_prop =
        mean(rows_for(rows, "proposed", [](const TrialRow &r) { return r.rate_bps_hz; }));
    const double gap = mean_ex > 0.0 ? (mean_ex - mean_prop) / mean_ex : 1.0;
    // 1 GHz bandwidth: spectral efficiency in b/s/Hz equals Gb/s numerically
    const double rate_gbps = mean_ex * sc.system.bandwidth_hz / 1e9;

    std::ostringstream msg;
    msg << "snr_db=" << snr_db << ", mean_ex=" << mean_ex << ", mean_prop=" << mean_prop
        << ", gap=" << gap << ", rate_gbps=" << rate_gbps;
    const bool pass = snr_db >= 30.0 && mean_ex >= mean_prop && gap <= 0.10 &&
                      rate_gbps >= 5.0 && rate_gbps <= 12.0;
    return {pass, msg.str()};
}

// 8. Energy-efficiency shape over a transmit-power sweep.
std::pair<bool, std::string> criterion8()
{
    Scenario sc = light_scenario();
    sc.trials = 12;
    sc.seed = 8008;

    SweepSpec spec;
    spec.axis = SweepAxis::tx_power_dbm;
    spec.values = {20.0, 30.0, 40.0, 50.0, 60.0};
    const auto rows = sweep(sc, spec, 1);
    const auto summary = summarize_sweep(rows);

    std::vector<double> ee_prop(spec.values.size(), 0.0), ee_trad(spec.values.size(), 0.0);
    for (const auto &s : summary) {
        const auto it = std::find(spec.values.begin(), spec.values.end(), s.axis_value);
        const std::size_t idx = static_cast<std::size_t>(it - spec.values.begin());
        if (s.method == "proposed")
            ee_prop[idx] = s.mean_ee;
        else if (s.method == "traditional")
            ee_trad[idx] = s.mean_ee;
    }
    const std::size_t argmax = static_cast<std::size_t>(
        std::max_element(ee_prop.begin(), ee_prop.end()) - ee_prop.begin());
    const bool interior = argmax > 0 && argmax + 1 < ee_prop.size();
    bool ordered = true;
    for (std::size_t i = 0; i < ee_prop.size(); ++i)
        if (ee_prop[i] < ee_trad[i])
            ordered = false;

    std::ostringstream msg;
    msg << "ee_prop_mbits_j=";
    for (double v : ee_prop)
        msg << " " << v / 1e6;
    msg << ", argmax_idx=" << argmax << ", ordered=" << (ordered ? "yes" : "no");
    return {interior && ordered, msg.str()};
}

// 9. Statistical-CSI estimation: sampling-error decay and the
// perturbation gap bound under the multi-start incumbent.
std::pair<bool, std::string> criterion9()
{
    // (a) covariance-error slope vs window length at N = 32
    const int m = 8, n = 32;
    const ArrayLayout layout = ArrayLayout::ula(m, 0.005);
    const RisGeometry ris = RisGeometry::ula(n, 0.005, {10.0, 5.0, 1.0});
    const UeGeometry ues{{{15.0, 2.0, 1.0}}};
    const PathLossModel model;
    const AngularSet fov = AngularSet::interval(0.0, pi);
    const std::vector<int> windows{8, 16, 32, 64, 128, 256, 512, 1024};

    std::vector<double> errs(windows.size(), 0.0);
    const int reps = 3;
    for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t base = 9009 + static_cast<std::uint64_t>(rep) * 100000;
        std::vector<ChannelRealization> pool, ref_pool;
        for (int i = 0; i < 1024; ++i)
            pool.push_back(synthesize_channels(layout, ris, ues, model, 4, 3,
                                               derive_seed(base, static_cast<std::uint64_t>(i)),
                                               fov));
        for (int i = 0; i < 4096; ++i)
            ref_pool.push_back(synthesize_channels(
                layout, ris, ues, model, 4, 3,
                derive_seed(base, 50000 + static_cast<std::uint64_t>(i)), fov));
        const StatCsi ref = estimate_covariances(ref_pool, 4096);
        const CMatrix r_ref = ref.gain_bs_ris * ref.cov_bs_ris;
        for (std::size_t wi = 0; wi < windows.size(); ++wi) {
            const StatCsi est = estimate_covariances(pool, windows[wi]);
            const CMatrix r_est = est.gain_bs_ris * est.cov_bs_ris;
            errs[wi] += (r_est - r_ref).norm() / reps;
        }
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        lx.push_back(std::log10(static_cast<double>(windows[i])));
        ly.push_back(std::log10(errs[i]));
    }
    const double slope = fit_slope(lx, ly);

    // (b) gap bound at N = 8 with a 64-restart incumbent
    Rng rng = make_rng(9109);
    int holds = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const int nn = 8;
        CMatrix b(nn, nn), p(nn, nn);
        for (int r = 0; r < nn; ++r)
            for (int c = 0; c < nn; ++c) {
                b(r, c) = complex_gaussian(rng, 1.0);
                p(r, c) = complex_gaussian(rng, 1.0);
            }
        const QuadSurrogate q_true{CMatrix(b * b.adjoint())};
        const double scale = uniform(rng, 0.01, 0.1) * q_true.q.norm() / p.norm();
        const CMatrix pert = 0.5 * scale * (p + p.adjoint());
        const QuadSurrogate q_est{CMatrix(q_true.q + pert)};
        const RisPhase phi_star = optimize_phases(q_true, 300, 1e-12, 64, 11 + t).phi;
        const RisPhase phi_hat = optimize_phases(q_est, 300, 1e-12, 16, 13 + t).phi;
        if (gap_bound_check(q_true, q_est, phi_star, phi_hat).holds)
            ++holds;
    }

    std::ostringstream msg;
    msg << "slope=" << slope << ", gap_bound_holds=" << holds << "/" << trials;
    return {slope >= -0.65 && slope <= -0.35 && holds == trials, msg.str()};
}

// 10. Phase-optimizer quality: rank-1 closed form and the quantized
// exhaustive oracle at N = 8.
std::pair<bool, std::string> criterion10()
{
    Rng rng = make_rng(10010);

    // rank-1: optimum is (sum |q_n|)^2
    const int n1 = 16;
    CVector qv(n1);
    for (int i = 0; i < n1; ++i)
        qv(i) = complex_gaussian(rng, 1.0);
    const QuadSurrogate q1{CMatrix(qv * qv.adjoint())};
    const double opt1 = std::pow(qv.cwiseAbs().sum(), 2.0);
    const double got1 = optimize_phases(q1, 300, 1e-14, 8, 17).objective;
    const double frac1 = got1 / opt1;

    // quantized exhaustive oracle at N = 8
    double worst_frac = 1.0;
    for (int inst = 0; inst < 2; ++inst) {
        const int n = 8;
        CMatrix b(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                b(r, c) = complex_gaussian(rng, 1.0);
        const QuadSurrogate q{CMatrix(b * b.adjoint())};
        const double oracle = quantized_best(q.q);
        const double got = optimize_phases(q, 500, 1e-14, 16, 19 + inst).objective;
        worst_frac = std::min(worst_frac, got / oracle);
    }

    std::ostringstream msg;
    msg << "rank1_frac=" << frac1 << ", worst_oracle_frac=" << worst_frac;
    return {frac1 >= 0.999 && worst_frac >= 0.98, msg.str()};
}

// 11. Complexity accounting: analytic run-time ratio and the
// instrumented multiply count against the synthesis envelope at M = 32.
std::pair<bool, std::string> criterion11()
{
    ComplexityModel cm64;
    ComplexityModel cm32 = cm64;
    cm32.array = 32;
    const double ratio = complexity_report(cm64).proposed_runtime /
                         complexity_report(cm32).proposed_runtime;

    const int m = 32;
    GsConfig cfg;
    GsCounters counters;
    build_hierarchy(AngularSet::interval(-1.0, 1.0), m, cfg, 11011, &counters);
    const double envelope = static_cast<double>(cfg.max_iter) * m * m * m +
                            static_cast<double>(m) * m * m * m;
    const double factor = static_cast<double>(counters.complex_multiplies) / envelope;

    std::ostringstream msg;
    msg << "runtime_ratio=" << ratio << ", measured/envelope=" << factor;
    const bool pass = std::abs(ratio - 1.2) < 1e-12 && factor <= 10.0 && factor >= 0.1;
    return {pass, msg.str()};
}

} // namespace

int main()
{
    std::cout << std::setprecision(4);
    run_criterion(1, criterion1);
    run_criterion(2, criterion2);
    run_criterion(3, criterion3);
    run_criterion(4, criterion4);
    run_criterion(5, criterion5);
    run_criterion(6, criterion6);
    run_criterion(7, criterion7);
    run_criterion(8, criterion8);
    run_criterion(9, criterion9);
    run_criterion(10, criterion10);
    run_criterion(11, criterion11);

    std::cout << (11 - g_failures) << " of 11 criteria passed" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
