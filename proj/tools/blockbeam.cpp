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
// Command-line simulator. Exit codes: 0 success, 2 configuration error,
// 3 outage-dominated run (more than half the trials in outage).

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "blockbeam/blockage.hpp"
#include "blockbeam/scenario.hpp"
#include "blockbeam/serialize.hpp"
#include "blockbeam/stage1.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_outage = 3;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::optional<int> trials;
    int parallel = 1;
};

void add_common(CLI::App *cmd, CommonArgs &args)
{
    cmd->add_option("--config", args.config_path, "scenario config JSON path");
    cmd->add_option("--seed", args.seed, "root RNG seed (overrides config)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--trials", args.trials, "Monte-Carlo trial count (overrides config)");
    cmd->add_option("--parallel", args.parallel, "worker thread count");
}

json load_config(const CommonArgs &args)
{
    if (args.config_path.empty())
        return json::object();
    std::ifstream in(args.config_path);
    if (!in)
        throw blockbeam::ConfigError("cannot open config file: " + args.config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw blockbeam::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return j;
}

blockbeam::Scenario load_scenario(const CommonArgs &args, const json &cfg)
{
    blockbeam::Scenario sc = blockbeam::scenario_from_json(cfg);
    if (args.seed)
        sc.seed = *args.seed;
    if (args.trials)
        sc.trials = *args.trials;
    sc.validate();
    return sc;
}

void write_file(const fs::path &path, const std::string &content)
{
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string rows_to_csv(const std::vector<blockbeam::TrialRow> &rows, bool with_axis)
{
    std::ostringstream out;
    out << (with_axis ? "axis_value," : "") << blockbeam::trial_csv_header() << '\n';
    for (const auto &row : rows) {
        if (with_axis)
            out << std::setprecision(10) << row.axis_value << ',';
        out << blockbeam::to_csv(row) << '\n';
    }
    return out.str();
}

double outage_fraction(const std::vector<blockbeam::TrialRow> &rows)
{
    if (rows.empty())
        return 0.0;
    int outages = 0;
    for (const auto &row : rows)
        if (row.outage)
            ++outages;
    return static_cast<double>(outages) / rows.size();
}

blockbeam::SweepSpec sweep_from_config(const json &cfg)
{
    blockbeam::SweepSpec spec;
    if (!cfg.contains("sweep"))
        throw blockbeam::ConfigError("sweep: section required for this subcommand");
    const auto &s = cfg.at("sweep");
    spec.axis = blockbeam::sweep_axis_from_string(s.value("axis", std::string("snr_db")));
    spec.values.clear();
    for (const auto &v : s.at("values"))
        spec.values.push_back(v.get<double>());
    if (s.contains("methods")) {
        spec.methods.clear();
        for (const auto &m : s.at("methods"))
            spec.methods.push_back(m.get<std::string>());
    }
    spec.validate();
    return spec;
}

int cmd_synth_codebook(const CommonArgs &args)
{
    const json cfg = load_config(args);
    const blockbeam::Scenario sc = load_scenario(args, cfg);

    const double lambda = sc.system.wavelength();
    const auto layout = blockbeam::ArrayLayout::ula(sc.system.array_elements, lambda, sc.geometry.array_origin);
    const auto ris = blockbeam::RisGeometry::ula(sc.system.ris_elements, lambda, sc.geometry.ris_center);
    const auto fov_az = sc.fov_azimuth();

    blockbeam::Rng rng = blockbeam::make_rng(sc.seed, 1);
    const blockbeam::BlockageScene scene =
        sc.blockage.scene.empty()
            ? blockbeam::generate_scene(sc.blockage.density, sc.geometry, fov_az, rng)
            : blockbeam::BlockageScene{sc.blockage.scene};
    const auto report = blockbeam::detect_blockage(layout, ris, scene, fov_az, sc.blockage.guard_angle);
    const auto available_u = blockbeam::azimuth_to_u(report.available);

    const auto book = blockbeam::build_hierarchy(available_u, sc.system.array_elements, sc.gs,
                                                 blockbeam::derive_seed(sc.seed, 5));
    json out = blockbeam::codebook_to_json(book);
    out["scenario"] = blockbeam::scenario_to_json(sc);
    write_file(fs::path(args.out_dir) / "codebook.json", out.dump(2) + "\n");

    const auto traditional = blockbeam::build_traditional_book(sc);
    json out_trad = blockbeam::codebook_to_json(traditional);
    out_trad["scenario"] = blockbeam::scenario_to_json(sc);
    write_file(fs::path(args.out_dir) / "codebook_traditional.json", out_trad.dump(2) + "\n");
    std::cout << "codebook: " << (fs::path(args.out_dir) / "codebook.json").string() << '\n';
    return exit_ok;
}

int cmd_detect_blockage(const CommonArgs &args)
{
    const json cfg = load_config(args);
    const blockbeam::Scenario sc = load_scenario(args, cfg);

    const double lambda = sc.system.wavelength();
    const auto layout = blockbeam::ArrayLayout::ula(sc.system.array_elements, lambda, sc.geometry.array_origin);
    const auto ris = blockbeam::RisGeometry::ula(sc.system.ris_elements, lambda, sc.geometry.ris_center);
    const auto fov_az = sc.fov_azimuth();

    blockbeam::Rng rng = blockbeam::make_rng(sc.seed, 1);
    const blockbeam::BlockageScene scene =
        sc.blockage.scene.empty()
            ? blockbeam::generate_scene(sc.blockage.density, sc.geometry, fov_az, rng)
            : blockbeam::BlockageScene{sc.blockage.scene};
    const auto report = blockbeam::detect_blockage(layout, ris, scene, fov_az, sc.blockage.guard_angle);

    json out;
    out["blocked_fraction"] = 1.0 - report.available.measure() / fov_az.measure();
    json avail = json::array();
    for (auto iv : report.available.intervals())
        avail.push_back({iv.lo, iv.hi});
    out["available_azimuth"] = std::move(avail);
    json avail_u = json::array();
    for (auto iv : blockbeam::azimuth_to_u(report.available).intervals())
        avail_u.push_back({iv.lo, iv.hi});
    out["available_u"] = std::move(avail_u);
    out["obstacles"] = scene.count();
    out["predicate_evals"] = report.stats.predicate_evals;
    out["blocked_links"] = report.link_blocked.sum();
    write_file(fs::path(args.out_dir) / "blockage.json", out.dump(2) + "\n");
    std::cout << out.dump(2) << '\n';
    return exit_ok;
}

int cmd_stage1(const CommonArgs &args)
{
    const json cfg = load_config(args);
    const blockbeam::Scenario sc = load_scenario(args, cfg);

    const double lambda = sc.system.wavelength();
    const auto layout = blockbeam::ArrayLayout::ula(sc.system.array_elements, lambda, sc.geometry.array_origin);
    const auto ris = blockbeam::RisGeometry::ula(sc.system.ris_elements, lambda, sc.geometry.ris_center);
    const auto fov_az = sc.fov_azimuth();
    const blockbeam::UeGeometry ues{sc.geometry.ue_positions};

    std::vector<blockbeam::ChannelRealization> snapshots;
    for (int i = 0; i < sc.stage1.snapshots; ++i)
        snapshots.push_back(blockbeam::synthesize_channels(
            layout, ris, ues, sc.pathloss, sc.system.paths_bs_ris, sc.system.paths_ris_ue,
            blockbeam::derive_seed(sc.seed, 1000 + static_cast<std::uint64_t>(i)), fov_az));
    const auto csi = blockbeam::estimate_covariances(snapshots, sc.stage1.snapshots, sc.stage1.covariance);
    const auto q = blockbeam::build_q(csi);
    const auto result = blockbeam::optimize_phases(q, sc.stage1.iterations, 1e-10, sc.stage1.restarts,
                                                   blockbeam::derive_seed(sc.seed, 2));

    json out;
    out["objective"] = result.objective;
    out["objective_trace"] = result.objective_trace;
    out["gain_bs_ris"] = csi.gain_bs_ris;
    out["gain_ris_ue"] = csi.gain_ris_ue;
    out["blockage_prob"] = csi.blockage_prob;
    json phases = json::array();
    for (Eigen::Index i = 0; i < result.phi.phases.size(); ++i) {
        phases.push_back(result.phi.phases(i).real());
        phases.push_back(result.phi.phases(i).imag());
    }
    out["phases"] = std::move(phases);
    write_file(fs::path(args.out_dir) / "stage1.json", out.dump(2) + "\n");
    std::cout << "stage1 objective: " << result.objective << '\n';
    return exit_ok;
}

int cmd_train(const CommonArgs &args)
{
    const json cfg = load_config(args);
    const blockbeam::Scenario sc = load_scenario(args, cfg);
    const auto rows = blockbeam::run_scenario(sc, args.parallel);
    write_file(fs::path(args.out_dir) / "trials.csv", rows_to_csv(rows, false));
    const double outage = outage_fraction(rows);
    std::cout << "trials: " << sc.trials << "  outage fraction: " << outage << '\n';
    return outage > 0.5 ? exit_outage : exit_ok;
}

int cmd_sweep(const CommonArgs &args)
{
    const json cfg = load_config(args);
    const blockbeam::Scenario sc = load_scenario(args, cfg);
    const auto spec = sweep_from_config(cfg);
    const auto rows = blockbeam::sweep(sc, spec, args.parallel);
    write_file(fs::path(args.out_dir) / "sweep.csv", rows_to_csv(rows, true));

    std::ostringstream summary;
    summary << "axis_value,method,mean_rate,median_rate,iqr_rate,mean_overhead,mean_ee,"
               "outage_fraction\n";
    for (const auto &s : blockbeam::summarize_sweep(rows))
        summary << std::setprecision(10) << s.axis_value << ',' << s.method << ',' << s.mean_rate
                << ',' << s.median_rate << ',' << s.iqr_rate << ',' << s.mean_overhead << ','
                << s.mean_ee << ',' << s.outage_fraction << '\n';
    write_file(fs::path(args.out_dir) / "sweep_summary.csv", summary.str());
    const double outage = outage_fraction(rows);
    std::cout << "sweep points: " << spec.values.size() << "  outage fraction: " << outage << '\n';
    return outage > 0.5 ? exit_outage : exit_ok;
}

int cmd_convergence(const CommonArgs &args)
{
    const json cfg = load_config(args);
    const blockbeam::Scenario sc = load_scenario(args, cfg);

    std::vector<double> densities{0.0, 0.1, 0.3, 0.5};
    int realizations = 60;
    int iters = 100;
    if (cfg.contains("convergence")) {
        const auto &c = cfg.at("convergence");
        if (c.contains("densities")) {
            densities.clear();
            for (const auto &d : c.at("densities"))
                densities.push_back(d.get<double>());
        }
        realizations = c.value("realizations_per_density", realizations);
        iters = c.value("iterations", iters);
    }
    const auto traces =
        blockbeam::convergence_experiment(sc, densities, realizations, iters, 1e-3, args.parallel);
    write_file(fs::path(args.out_dir) / "convergence_traces.csv", blockbeam::convergence_csv(traces));
    write_file(fs::path(args.out_dir) / "convergence_iters.csv",
               blockbeam::convergence_iters_csv(traces));
    std::cout << "traces: " << traces.size() << '\n';
    return exit_ok;
}

int cmd_figure_data(const CommonArgs &args)
{
    const json cfg = load_config(args);
    const blockbeam::Scenario sc = load_scenario(args, cfg);
    if (!cfg.contains("figure"))
        throw blockbeam::ConfigError("figure: section required for this subcommand");
    const std::string figure_id = cfg.at("figure").value("id", std::string());
    const auto spec = sweep_from_config(cfg);
    const auto rows = blockbeam::sweep(sc, spec, args.parallel);
    const std::string csv = blockbeam::emit_figure_data(rows, figure_id);
    write_file(fs::path(args.out_dir) / (figure_id + ".csv"), csv);
    std::cout << "wrote " << (fs::path(args.out_dir) / (figure_id + ".csv")).string() << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"blockage-aware hierarchical beam training simulator"};
    app.require_subcommand(1);

    CommonArgs args;
    auto *synth = app.add_subcommand("synth-codebook", "synthesize hierarchical codebooks");
    auto *detect = app.add_subcommand("detect-blockage", "run geometric blockage detection");
    auto *stage1 = app.add_subcommand("stage1", "optimize RIS phases on statistical CSI");
    auto *train = app.add_subcommand("train", "Monte-Carlo beam-training trials");
    auto *sweep_cmd = app.add_subcommand("sweep", "parameter sweep over an axis");
    auto *conv = app.add_subcommand("convergence", "synthesis residual traces");
    auto *figure = app.add_subcommand("figure-data", "plot-ready CSV for a figure schema");
    for (auto *cmd : {synth, detect, stage1, train, sweep_cmd, conv, figure})
        add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth_codebook(args);
        if (detect->parsed())
            return cmd_detect_blockage(args);
        if (stage1->parsed())
            return cmd_stage1(args);
        if (train->parsed())
            return cmd_train(args);
        if (sweep_cmd->parsed())
            return cmd_sweep(args);
        if (conv->parsed())
            return cmd_convergence(args);
        if (figure->parsed())
            return cmd_figure_data(args);
    } catch (const blockbeam::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const blockbeam::OutageError &e) {
        std::cerr << "outage: " << e.what() << '\n';
        return exit_outage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_ok;
}
