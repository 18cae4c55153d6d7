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

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "blockbeam/angular.hpp"
#include "blockbeam/array.hpp"
#include "blockbeam/blockage.hpp"
#include "blockbeam/rng.hpp"

namespace blockbeam {

/// LOS/NLOS mixed path loss. k_* are linear power attenuations at 1 m,
/// beta_* the exponents, los_scale the decay length of the LOS
/// probability exp(-(d/L)^2).
struct PathLossModel {
    // Steering vectors are unit-norm here, so the aperture and element
    // gains that a physical array accrues (about 45 dB combined at these
    // panel sizes) are folded into the 1 m intercepts on top of the
    // 60 GHz free-space (lambda / 4 pi)^2 term.
    double k_los = 2.0e-2;
    double k_nlos = 2.0e-4; // 20 dB extra attenuation
    double beta_los = 2.0;
    double beta_nlos = 3.3;
    double los_scale = 50.0;
    // Extra power attenuation of paths that depart through an obstacle, on
    // top of the NLOS branch: mmWave blockers (bodies, foliage, walls) add
    // substantial diffraction/penetration loss, which is what makes blocked
    // directions not worth serving.
    double blockage_loss_db = 15.0;

    void validate() const
    {
        if (k_los <= 0.0 || k_nlos <= 0.0 || beta_los <= 0.0 || los_scale <= 0.0 ||
            beta_nlos < beta_los || blockage_loss_db < 0.0)
            throw std::invalid_argument("PathLossModel: invalid parameters");
    }
};

inline double los_probability(const PathLossModel &model, double distance)
{
    if (distance < 0.0)
        throw std::invalid_argument("los_probability: negative distance");
    const double x = distance / model.los_scale;
    return std::exp(-x * x);
}

struct PathGain {
    double gain = 0.0; // linear power gain
    bool los = false;
};

inline PathGain sample_path_gain(const PathLossModel &model, double distance, Rng &rng)
{
    if (distance <= 0.0)
        throw std::invalid_argument("sample_path_gain: distance must be positive");
    const bool los = uniform(rng, 0.0, 1.0) < los_probability(model, distance);
    if (los)
        return {model.k_los * std::pow(distance, -model.beta_los), true};
    return {model.k_nlos * std::pow(distance, -model.beta_nlos), false};
}

/// Deterministic NLOS branch, used for paths whose departure angle falls
/// inside the blocked set.
inline PathGain nlos_path_gain(const PathLossModel &model, double distance)
{
    if (distance <= 0.0)
        throw std::invalid_argument("nlos_path_gain: distance must be positive");
    return {model.k_nlos * std::pow(distance, -model.beta_nlos), false};
}

/// Unit-modulus RIS phase configuration.
struct RisPhase {
    CVector phases;

    static RisPhase ones(int n) { return {CVector::Ones(n)}; }

    void validate() const
    {
        for (Eigen::Index i = 0; i < phases.size(); ++i)
            if (std::abs(std::abs(phases(i)) - 1.0) > 1e-12)
                throw std::invalid_argument("RisPhase: entries must be unit modulus");
    }
};

struct LinkBudget {
    double tx_power_w = 1.0;
    double noise_power_w = 1e-12; // -90 dBm
    double bandwidth_hz = 1e9;
    double carrier_hz = 60e9;

    void validate() const
    {
        if (tx_power_w <= 0.0 || noise_power_w <= 0.0 || bandwidth_hz <= 0.0 || carrier_hz <= 0.0)
            throw std::invalid_argument("LinkBudget: all fields must be positive");
    }
};

/// One geometric channel draw: cascaded BS -> RIS -> UE with per-path
/// gains and angles. Deterministic given the seed.
struct ChannelRealization {
    CMatrix h_bs_ris;                  // N x M
    std::vector<CVector> h_ris_ue;     // K vectors of length N
    std::vector<double> aod_bs;        // L_g azimuths at the MA-BS
    std::vector<double> aoa_ris;       // L_g azimuths at the RIS
    std::vector<std::vector<double>> aod_ris; // per UE, L_b azimuths
    CVector gains_br;                  // L_g
    std::vector<CVector> gains_ru;     // per UE, L_b
    std::vector<bool> los_br;          // per BS->RIS path
    std::uint64_t seed = 0;
};

struct UeGeometry {
    std::vector<Eigen::Vector3d> positions;
};

/// Geometric channel synthesis. BS-side steering uses the u = cos(azimuth)
/// convention. Each link carries one primary path whose gain follows the
/// LOS/NLOS mixture at the link distance; the remaining scatter paths sit
/// on the NLOS branch. Paths departing into `blocked_aod` are forced onto
/// the NLOS branch regardless.
inline ChannelRealization synthesize_channels(const ArrayLayout &layout, const RisGeometry &ris,
                                              const UeGeometry &ues, const PathLossModel &model,
                                              int l_g, int l_b, std::uint64_t seed,
                                              const AngularSet &fov_azimuth,
                                              const AngularSet *blocked_aod = nullptr)
{
    if (l_g < 1 || l_b < 1)
        throw std::invalid_argument("synthesize_channels: need at least one path per link");
    model.validate();

    Rng rng = make_rng(seed);
    const int m = layout.count();
    const int n = ris.count();
    const double d_br = (ris.centroid() - layout.reference_point).norm();

    ChannelRealization ch;
    ch.seed = seed;
    ch.h_bs_ris = CMatrix::Zero(n, m);
    ch.gains_br = CVector(l_g);

    for (int l = 0; l < l_g; ++l) {
        const double fov_lo = fov_azimuth.lower(), fov_hi = fov_azimuth.upper();
        double phi = uniform(rng, fov_lo, fov_hi);
        const double theta = uniform(rng, fov_lo, fov_hi);
        const bool blocked = blocked_aod && blocked_aod->contains(phi);
        PathGain pg = blocked || l > 0 ? nlos_path_gain(model, d_br)
                                       : sample_path_gain(model, d_br, rng);
        if (blocked)
            pg.gain *= std::pow(10.0, -model.blockage_loss_db / 10.0);
        const Complex rho = std::sqrt(pg.gain) * random_phase(rng);

        ch.aod_bs.push_back(phi);
        ch.aoa_ris.push_back(theta);
        ch.gains_br(l) = rho;
        ch.los_br.push_back(pg.los);

        const CVector a_r = steering_ula(n, std::cos(theta));
        const CVector a_b = steering_ula(m, std::cos(phi));
        ch.h_bs_ris.noalias() += rho * a_r * a_b.adjoint();
    }

    for (const auto &ue : ues.positions) {
        const double d_ru = (ue - ris.centroid()).norm();
        CVector h = CVector::Zero(n);
        std::vector<double> aods;
        CVector gains(l_b);
        for (int l = 0; l < l_b; ++l) {
            const double phi = uniform(rng, -1.0, 1.0); // u-space departure from RIS
            const PathGain pg = l > 0 ? nlos_path_gain(model, d_ru) : sample_path_gain(model, d_ru, rng);
            const Complex rho = std::sqrt(pg.gain) * random_phase(rng);
            aods.push_back(phi);
            gains(l) = rho;
            h += rho * steering_ula(n, phi);
        }
        ch.h_ris_ue.push_back(std::move(h));
        ch.aod_ris.push_back(std::move(aods));
        ch.gains_ru.push_back(std::move(gains));
    }
    return ch;
}

/// Cascaded 1 x M channel row h_k = h_ru^H diag(phi) H_BR, stored as a
/// length-M vector of row entries.
inline CVector cascade(const CVector &h_ru_k, const RisPhase &phi, const CMatrix &h_br)
{
    if (h_ru_k.size() != h_br.rows() || phi.phases.size() != h_br.rows())
        throw std::invalid_argument("cascade: dimension mismatch");
    const CVector weighted = h_ru_k.conjugate().cwiseProduct(phi.phases);
    return (weighted.transpose() * h_br).transpose();
}

/// Received SNR p |h_k . w|^2 / sigma^2 with h_k a cascaded row vector.
inline double snr(const CVector &h_row, const CVector &w, const LinkBudget &budget)
{
    const Complex inner = h_row.transpose() * w;
    return budget.tx_power_w * std::norm(inner) / budget.noise_power_w;
}

inline double rate(double gamma)
{
    if (gamma < 0.0)
        throw std::invalid_argument("rate: gamma must be nonnegative");
    return std::log2(1.0 + gamma);
}

inline double capacity(double rate_bps_hz, double bandwidth_hz)
{
    return rate_bps_hz * bandwidth_hz;
}

} // namespace blockbeam
