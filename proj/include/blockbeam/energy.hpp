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
// Energy-efficiency model and amortized complexity calculator.

#pragma once

#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>

namespace blockbeam {

struct EnergyModel {
    double motion_power_w = 5.0;              // P_M
    double dynamic_power_per_antenna_w = 0.3; // P_c
    double static_power_w = 0.1;              // P_s
    double amp_efficiency = 0.2;              // eta_amp
    double move_time_s = 5e-4;                // tau
    double slot_s = 0.2;                      // T

    void validate() const
    {
        if (amp_efficiency <= 0.0 || amp_efficiency > 1.0)
            throw std::invalid_argument("EnergyModel: amp_efficiency in (0, 1] required");
        if (move_time_s < 0.0 || move_time_s >= slot_s)
            throw std::invalid_argument("EnergyModel: need 0 <= move_time < slot");
        if (motion_power_w < 0.0 || dynamic_power_per_antenna_w < 0.0 || static_power_w < 0.0)
            throw std::invalid_argument("EnergyModel: powers must be nonnegative");
    }
};

/// Data-phase circuit power P_D = M P_c + P_s.
inline double data_power(const EnergyModel &model, int m)
{
    if (m < 1)
        throw std::invalid_argument("data_power: m >= 1 required");
    return m * model.dynamic_power_per_antenna_w + model.static_power_w;
}

/// Bits per Joule over one slot:
/// eta = (T - tau_tot) C / (tau_tot P_M + (T - tau_tot)(P_D + p)/eta_amp)
/// with tau_tot = moves * tau. The optional radiated power p charges the
/// transmit chain for the actual RF output; p = 0 reduces to the pure
/// circuit-power form.
inline double energy_efficiency(const EnergyModel &model, int m, double capacity_bps, int moves,
                                double tx_power_w = 0.0)
{
    model.validate();
    if (capacity_bps < 0.0 || moves < 0 || tx_power_w < 0.0)
        throw std::invalid_argument("energy_efficiency: nonnegative arguments required");
    const double tau_tot = moves * model.move_time_s;
    if (tau_tot >= model.slot_s)
        throw std::invalid_argument("energy_efficiency: motion time exhausts the slot");
    const double transmit = model.slot_s - tau_tot;
    const double energy =
        tau_tot * model.motion_power_w + transmit * (data_power(model, m) + tx_power_w) / model.amp_efficiency;
    return transmit * capacity_bps / energy;
}

struct ComplexityModel {
    int i_ris = 200;      // Stage-I fixed-point iterations
    int i_max = 40;       // GS iteration cap
    int refresh_cb = 1;   // slots between codebook rebuilds
    int refresh_ris = 1;  // slots between Stage-I reruns
    int refresh_blk = 1;  // slots between blockage re-detections
    int obstacles = 5;    // O
    int pilot_length = 16;
    int users = 2;
    int array = 64;  // M
    int ris = 256;   // N
    int evals = 12;  // B_method

    void validate() const
    {
        if (i_ris < 1 || i_max < 1 || refresh_cb < 1 || refresh_ris < 1 || refresh_blk < 1 ||
            obstacles < 1 || pilot_length < 1 || users < 1 || array < 1 || ris < 1 || evals < 1)
            throw std::invalid_argument("ComplexityModel: all fields must be positive");
    }
};

/// Per-slot amortized cost split: run-time training, codebook synthesis,
/// blockage detection, Stage-I phases, and beam application, plus the
/// proposed-method specialization with B <= 2 log2 M.
struct ComplexityReport {
    double training_runtime = 0.0;   // B K L_p
    double codebook_amortized = 0.0; // (I_max M^3 + M^4) / R_cb
    double blockage_amortized = 0.0; // (M N O + M O log O) / R_blk
    double stage1_amortized = 0.0;   // I_RIS N^3 / R_RIS
    double apply_beam = 0.0;         // M^2
    double proposed_runtime = 0.0;   // 2 log2(M) K L_p
    long long measured_gs_multiplies = -1; // instrumented counter, -1 if absent
    double gs_envelope = 0.0;        // I_max M^3 + M^4
};

inline ComplexityReport complexity_report(const ComplexityModel &cm,
                                          long long measured_gs_multiplies = -1)
{
    cm.validate();
    const double m = cm.array, n = cm.ris, o = cm.obstacles;
    ComplexityReport rep;
    rep.training_runtime = static_cast<double>(cm.evals) * cm.users * cm.pilot_length;
    rep.gs_envelope = cm.i_max * m * m * m + m * m * m * m;
    rep.codebook_amortized = rep.gs_envelope / cm.refresh_cb;
    rep.blockage_amortized = (m * n * o + m * o * std::log2(o)) / cm.refresh_blk;
    rep.stage1_amortized = cm.i_ris * n * n * n / cm.refresh_ris;
    rep.apply_beam = m * m;
    rep.proposed_runtime = 2.0 * std::log2(m) * cm.users * cm.pilot_length;
    rep.measured_gs_multiplies = measured_gs_multiplies;
    return rep;
}

inline nlohmann::json complexity_to_json(const ComplexityReport &rep)
{
    nlohmann::json j;
    j["training_runtime_ops"] = rep.training_runtime;
    j["codebook_amortized_ops"] = rep.codebook_amortized;
    j["blockage_amortized_ops"] = rep.blockage_amortized;
    j["stage1_amortized_ops"] = rep.stage1_amortized;
    j["apply_beam_ops"] = rep.apply_beam;
    j["proposed_runtime_ops"] = rep.proposed_runtime;
    j["gs_envelope_ops"] = rep.gs_envelope;
    if (rep.measured_gs_multiplies >= 0)
        j["measured_gs_multiplies"] = rep.measured_gs_multiplies;
    return j;
}

inline std::string complexity_table(const ComplexityReport &rep)
{
    std::ostringstream out;
    out << std::left << std::setw(28) << "term" << std::right << std::setw(18) << "scaled_ops" << '\n';
    auto row = [&](const char *name, double value) {
        out << std::left << std::setw(28) << name << std::right << std::setw(18) << std::scientific
            << std::setprecision(4) << value << '\n';
    };
    row("training_runtime", rep.training_runtime);
    row("codebook_amortized", rep.codebook_amortized);
    row("blockage_amortized", rep.blockage_amortized);
    row("stage1_amortized", rep.stage1_amortized);
    row("apply_beam", rep.apply_beam);
    row("proposed_runtime", rep.proposed_runtime);
    if (rep.measured_gs_multiplies >= 0)
        row("measured_gs_multiplies", static_cast<double>(rep.measured_gs_multiplies));
    return out.str();
}

} // namespace blockbeam
