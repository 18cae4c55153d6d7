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
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "blockbeam/channel.hpp"

namespace blockbeam {

/// Statistical CSI: RIS-side covariances, large-scale gains, service
/// weights and the sector-wise blockage occupancy map.
struct StatCsi {
    CMatrix cov_bs_ris;                 // N x N, trace-normalized
    std::vector<CMatrix> cov_ris_ue;    // per UE, N x N, trace-normalized
    double gain_bs_ris = 0.0;           // beta_BR
    std::vector<double> gain_ris_ue;    // beta_RU,k
    std::vector<double> user_weights;
    std::vector<double> blockage_prob;  // per sector
    int snapshots_used = 0;
    double window_s = 0.0;
};

struct CovarianceOptions {
    int sector_count = 16;
    double drop_threshold = 0.1; // fraction of the per-sector median energy
};

/// Sample covariances over S snapshots: R_hat = (1/S) sum_s H_s H_s^H,
/// split into a trace-normalized shape and a large-scale gain, plus a
/// sector occupancy map from persistent energy drops.
inline StatCsi estimate_covariances(const std::vector<ChannelRealization> &snapshots, int s,
                                    const CovarianceOptions &opts = {})
{
    if (s < 1 || snapshots.size() < static_cast<std::size_t>(s))
        throw std::invalid_argument("estimate_covariances: need at least one snapshot");

    const int n = static_cast<int>(snapshots.front().h_bs_ris.rows());
    const int m = static_cast<int>(snapshots.front().h_bs_ris.cols());
    const std::size_t k = snapshots.front().h_ris_ue.size();

    StatCsi csi;
    csi.snapshots_used = s;

    CMatrix r_br = CMatrix::Zero(n, n);
    std::vector<CMatrix> r_ru(k, CMatrix::Zero(n, n));
    for (int i = 0; i < s; ++i) {
        const auto &snap = snapshots[static_cast<std::size_t>(i)];
        r_br.noalias() += snap.h_bs_ris * snap.h_bs_ris.adjoint();
        for (std::size_t j = 0; j < k; ++j)
            r_ru[j].noalias() += snap.h_ris_ue[j] * snap.h_ris_ue[j].adjoint();
    }
    r_br /= static_cast<double>(s);
    for (auto &r : r_ru)
        r /= static_cast<double>(s);

    csi.gain_bs_ris = r_br.trace().real() / n;
    csi.cov_bs_ris = csi.gain_bs_ris > 0.0 ? CMatrix(r_br / csi.gain_bs_ris) : r_br;
    for (std::size_t j = 0; j < k; ++j) {
        const double beta = r_ru[j].trace().real() / n;
        csi.gain_ris_ue.push_back(beta);
        csi.cov_ris_ue.push_back(beta > 0.0 ? CMatrix(r_ru[j] / beta) : r_ru[j]);
        csi.user_weights.push_back(1.0);
    }

    // Sector occupancy: per-snapshot transmit-side energy toward each
    // sector center, flagged as a drop below a fraction of the median.
    csi.blockage_prob.assign(static_cast<std::size_t>(opts.sector_count), 0.0);
    for (int sec = 0; sec < opts.sector_count; ++sec) {
        const double u = -1.0 + (2.0 * sec + 1.0) / opts.sector_count;
        const CVector a_b = steering_ula(m, u);
        std::vector<double> energy(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i)
            energy[static_cast<std::size_t>(i)] =
                (snapshots[static_cast<std::size_t>(i)].h_bs_ris * a_b).squaredNorm();
        std::vector<double> sorted = energy;
        std::nth_element(sorted.begin(), sorted.begin() + s / 2, sorted.end());
        const double median = sorted[static_cast<std::size_t>(s / 2)];
        int drops = 0;
        for (double e : energy)
            if (e < opts.drop_threshold * median)
                ++drops;
        csi.blockage_prob[static_cast<std::size_t>(sec)] = static_cast<double>(drops) / s;
    }
    return csi;
}

/// Quadratic surrogate Q for the expected effective channel gain.
struct QuadSurrogate {
    CMatrix q;
};

/// Q = sum_k w_k beta_BR beta_RU,k (R_BR hadamard R_RU,k^T). Hermitian
/// PSD by the Schur product theorem for valid StatCsi.
inline QuadSurrogate build_q(const StatCsi &csi)
{
    const Eigen::Index n = csi.cov_bs_ris.rows();
    CMatrix q = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < csi.cov_ris_ue.size(); ++k) {
        const double scale = csi.user_weights[k] * csi.gain_bs_ris * csi.gain_ris_ue[k];
        q += scale * csi.cov_bs_ris.cwiseProduct(csi.cov_ris_ue[k].transpose());
    }
    // numerical cleanup
    q = 0.5 * (q + q.adjoint()).eval();
    return {std::move(q)};
}

inline double jstat(const RisPhase &phi, const QuadSurrogate &q)
{
    if (phi.phases.size() != q.q.rows())
        throw std::invalid_argument("jstat: dimension mismatch");
    const Complex v = phi.phases.adjoint() * q.q * phi.phases;
    return v.real();
}

struct PhaseOptResult {
    RisPhase phi;
    std::vector<double> objective_trace; // best restart, per iteration
    double objective = 0.0;
};

/// Unit-modulus maximization of phi^H Q phi by the fixed-point update
/// phi <- exp(j arg(Q phi)) with multi-start. The update is monotone for
/// PSD Q; an indefinite Q is shifted by -lambda_min I first, which leaves
/// the argmax unchanged on the unit-modulus torus.
inline PhaseOptResult optimize_phases(const QuadSurrogate &q, int max_iter = 200, double tol = 1e-10,
                                      int restarts = 8, std::uint64_t seed = 1)
{
    const Eigen::Index n = q.q.rows();
    CMatrix qs = 0.5 * (q.q + q.q.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(qs, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double shift = lmin < 0.0 ? -lmin + 1e-12 * std::abs(qs.trace().real()) : 0.0;
    if (shift > 0.0)
        qs += shift * CMatrix::Identity(n, n);
    const double shift_offset = shift * static_cast<double>(n);

    PhaseOptResult best;
    best.objective = -1.0;
    for (int r = 0; r < restarts; ++r) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
        CVector phi(n);
        if (r == 0)
            phi.setOnes();
        else
            for (Eigen::Index i = 0; i < n; ++i)
                phi(i) = random_phase(rng);

        std::vector<double> trace;
        double prev = (phi.adjoint() * qs * phi).value().real();
        trace.push_back(prev - shift_offset);
        for (int it = 0; it < max_iter; ++it) {
            CVector g = qs * phi;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double mag = std::abs(g(i));
                phi(i) = mag > 0.0 ? g(i) / mag : phi(i);
            }
            const double obj = (phi.adjoint() * qs * phi).value().real();
            trace.push_back(obj - shift_offset);
            if (obj - prev < tol * std::max(1.0, std::abs(prev)))
                break;
            prev = obj;
        }
        const double final_obj = trace.back();
        if (final_obj > best.objective) {
            best.objective = final_obj;
            best.phi.phases = phi;
            best.objective_trace = std::move(trace);
        }
    }
    return best;
}

struct GapReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Empirical check of the perturbation gap bound
/// J(phi*; Q) - J(phi_hat; Q) <= (N + 1) ||Q - Q_hat||_2.
inline GapReport gap_bound_check(const QuadSurrogate &q_true, const QuadSurrogate &q_est,
                                 const RisPhase &phi_star, const RisPhase &phi_hat)
{
    GapReport rep;
    rep.lhs = jstat(phi_star, q_true) - jstat(phi_hat, q_true);
    const CMatrix delta = q_true.q - q_est.q;
    Eigen::JacobiSVD<CMatrix> svd(delta);
    const double spectral = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    rep.rhs = (static_cast<double>(q_true.q.rows()) + 1.0) * spectral;
    rep.holds = rep.lhs <= rep.rhs + 1e-9;
    return rep;
}

} // namespace blockbeam
