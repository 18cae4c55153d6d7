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
// JSON round-trip for hierarchical codebooks. Weights are stored as an
// interleaved [re0, im0, re1, im1, ...] array so the file format has no
// complex-number dependency.

#pragma once

#include <json.hpp>
#include <string>

#include "blockbeam/gs.hpp"

namespace blockbeam {

using Json = nlohmann::json;

inline Json config_to_json(const GsConfig &cfg)
{
    Json j;
    j["max_iter"] = cfg.max_iter;
    j["tikhonov"] = cfg.tikhonov;
    j["rel_tol"] = cfg.rel_tol;
    j["sidelobe_weight"] = cfg.sidelobe_weight;
    j["blocked_weight"] = cfg.blocked_weight;
    j["sidelobe_cap_db"] = cfg.sidelobe_cap_db;
    j["blocked_cap_db"] = cfg.blocked_cap_db;
    j["power_budget"] = cfg.power_budget;
    j["amplitude_mode"] =
        cfg.amplitude_mode == AmplitudeMode::constant_modulus ? "constant_modulus" : "total_power";
    j["null_mode"] = cfg.null_mode == NullMode::hard    ? "hard"
                     : cfg.null_mode == NullMode::soft ? "soft"
                                                       : "exclude";
    j["grid_density_factor"] = cfg.grid_density_factor;
    return j;
}

inline GsConfig config_from_json(const Json &j)
{
    GsConfig cfg;
    cfg.max_iter = j.value("max_iter", cfg.max_iter);
    cfg.tikhonov = j.value("tikhonov", cfg.tikhonov);
    cfg.rel_tol = j.value("rel_tol", cfg.rel_tol);
    cfg.sidelobe_weight = j.value("sidelobe_weight", cfg.sidelobe_weight);
    cfg.blocked_weight = j.value("blocked_weight", cfg.blocked_weight);
    cfg.sidelobe_cap_db = j.value("sidelobe_cap_db", cfg.sidelobe_cap_db);
    cfg.blocked_cap_db = j.value("blocked_cap_db", cfg.blocked_cap_db);
    cfg.power_budget = j.value("power_budget", cfg.power_budget);
    const std::string amp = j.value("amplitude_mode", std::string("constant_modulus"));
    cfg.amplitude_mode =
        amp == "total_power" ? AmplitudeMode::total_power : AmplitudeMode::constant_modulus;
    const std::string nm = j.value("null_mode", std::string("hard"));
    cfg.null_mode = nm == "soft" ? NullMode::soft : nm == "exclude" ? NullMode::exclude : NullMode::hard;
    cfg.grid_density_factor = j.value("grid_density_factor", cfg.grid_density_factor);
    return cfg;
}

inline Json codebook_to_json(const HierarchicalCodebook &book)
{
    Json j;
    j["array_size"] = book.array_size;
    j["config"] = config_to_json(book.config);
    Json avail = Json::array();
    for (auto iv : book.available.intervals())
        avail.push_back({iv.lo, iv.hi});
    j["available"] = std::move(avail);

    Json nodes = Json::array();
    for (const auto &layer : book.layers) {
        const double width = 2.0 / static_cast<double>(layer.size());
        for (const auto &cw : layer) {
            Json node;
            node["layer"] = cw.layer;
            node["index"] = cw.index;
            node["sector_lo"] = -1.0 + cw.index * width;
            node["sector_hi"] = -1.0 + (cw.index + 1) * width;
            node["pruned"] = cw.pruned;
            Json weights = Json::array();
            for (Eigen::Index i = 0; i < cw.weights.size(); ++i) {
                weights.push_back(cw.weights(i).real());
                weights.push_back(cw.weights(i).imag());
            }
            node["weights"] = std::move(weights);
            nodes.push_back(std::move(node));
        }
    }
    j["nodes"] = std::move(nodes);
    return j;
}

inline HierarchicalCodebook codebook_from_json(const Json &j)
{
    HierarchicalCodebook book;
    book.array_size = j.at("array_size").get<int>();
    book.config = config_from_json(j.at("config"));
    std::vector<AngularInterval> avail;
    for (const auto &iv : j.at("available"))
        avail.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
    book.available = AngularSet(std::move(avail));

    const int depth = static_cast<int>(std::log2(book.array_size));
    book.layers.resize(static_cast<std::size_t>(depth));
    for (int s = 1; s <= depth; ++s)
        book.layers[static_cast<std::size_t>(s - 1)].resize(static_cast<std::size_t>(1 << s));

    for (const auto &node : j.at("nodes")) {
        Codeword cw;
        cw.layer = node.at("layer").get<int>();
        cw.index = node.at("index").get<int>();
        cw.pruned = node.at("pruned").get<bool>();
        const auto &weights = node.at("weights");
        cw.weights = CVector(static_cast<Eigen::Index>(weights.size() / 2));
        for (Eigen::Index i = 0; i < cw.weights.size(); ++i)
            cw.weights(i) = Complex(weights.at(2 * i).get<double>(), weights.at(2 * i + 1).get<double>());
        if (cw.layer < 1 || cw.layer > depth ||
            cw.index < 0 || cw.index >= (1 << cw.layer))
            throw std::invalid_argument("codebook_from_json: node outside the tree");
        book.layers[static_cast<std::size_t>(cw.layer - 1)][static_cast<std::size_t>(cw.index)] =
            std::move(cw);
    }
    return book;
}

} // namespace blockbeam
