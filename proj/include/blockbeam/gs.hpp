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
// Blockage-aware codeword synthesis: hard-null projector least squares,
// soft-penalty least squares, Gram-Schmidt reduced basis, and the
// iterative masked phase-retrieval loop (angular amplitude enforcement ->
// Tikhonov LS back-projection -> null-space projection -> constant-modulus
// projection), assembled into a binary-tree hierarchical codebook.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "blockbeam/angular.hpp"
#include "blockbeam/array.hpp"
#include "blockbeam/rng.hpp"

namespace blockbeam {

struct InfeasibleSectorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AmplitudeMode { constant_modulus, total_power };
enum class NullMode { hard, soft, exclude };

struct GsConfig {
    int max_iter = 40;
    double tikhonov = -1.0; // < 0: 1e-6 * trace(A A^H) / N_u
    double rel_tol = 1e-4;  // <= 0 disables early stopping
    double sidelobe_weight = 1.0;  // lambda_sl
    double blocked_weight = 1e3;   // lambda_blk (soft mode)
    // gamma_sl relative to the flat-top level. Constant-modulus flat-top
    // beams carry near-in ripple around -13 dB at best; a cap close to
    // that keeps the sidelobe term active without drowning the in-sector
    // fit in an unreachable demand.
    double sidelobe_cap_db = -15.0;
    double blocked_cap_db = -40.0;  // eps_blk relative to the flat-top level
    double power_budget = -1.0;     // < 0: P = M (unit element magnitude)
    AmplitudeMode amplitude_mode = AmplitudeMode::constant_modulus;
    NullMode null_mode = NullMode::hard;
    double grid_density_factor = 8.0; // N_u = factor * M over the fov
    Eigen::VectorXd sidelobe_weighting; // per-sidelobe-sample weights; empty = 1

    void validate() const
    {
        if (max_iter < 1 || power_budget == 0.0)
            throw std::invalid_argument("GsConfig: invalid parameters");
    }

    double power(int m) const { return power_budget > 0.0 ? power_budget : static_cast<double>(m); }
};

/// Per-node synthesis target: sector/blocked/sidelobe partition of the
/// fov grid with the piecewise desired magnitude profile.
struct SectorSpec {
    AngularSet sector;
    AngularSet blocked;
    AngularSet fov;
    AngularGrid grid;
    Eigen::VectorXd desired_in;   // per-sample desired power G_in(u), 0 off sector
    Eigen::VectorXd sidelobe_cap; // per-sample power cap G_sl(u)
    double flat_level = 0.0;      // g0

    std::vector<std::size_t> in_indices() const { return grid.indices(RegionTag::in_sector); }
    std::vector<std::size_t> blocked_indices() const { return grid.indices(RegionTag::blocked); }
    std::vector<std::size_t> sidelobe_indices() const { return grid.indices(RegionTag::sidelobe); }
};

/// Energy-conserving flat-top: the array factor energy of a power-P
/// codeword over u in [-1,1] is 2P/M, so a flat sector level of
/// g0 = 2P / (M * measure(sector)) is exactly realizable. Sectors
/// narrower than the array resolution 2/M are capped at the peak power
/// gain P, the most any codeword can concentrate in one direction.
inline double flat_top_level(int m, double power, double sector_measure)
{
    return std::min(2.0 * power / (static_cast<double>(m) * sector_measure), power);
}

inline SectorSpec make_sector_spec(const AngularSet &sector, const AngularSet &blocked,
                                   const AngularSet &fov, int m, const GsConfig &cfg)
{
    if (sector.empty())
        throw InfeasibleSectorError("make_sector_spec: empty sector");
    SectorSpec spec;
    spec.sector = set_subtract(sector, blocked);
    spec.blocked = set_intersect(blocked, fov);
    spec.fov = fov;
    if (spec.sector.empty())
        throw InfeasibleSectorError("make_sector_spec: sector fully blocked");

    const double density = cfg.grid_density_factor * m / fov.measure();
    spec.grid = grid_sample(spec.sector, spec.blocked, fov, density);

    spec.flat_level = flat_top_level(m, cfg.power(m), spec.sector.measure());
    const double cap = spec.flat_level * std::pow(10.0, cfg.sidelobe_cap_db / 10.0);
    const auto n_u = static_cast<Eigen::Index>(spec.grid.size());
    spec.desired_in = Eigen::VectorXd::Zero(n_u);
    spec.sidelobe_cap = Eigen::VectorXd::Constant(n_u, cap);
    for (std::size_t i = 0; i < spec.grid.size(); ++i)
        if (spec.grid.tags[i] == RegionTag::in_sector)
            spec.desired_in(static_cast<Eigen::Index>(i)) = spec.flat_level;
    return spec;
}

/// Beamforming weight vector covering one node of the hierarchy.
struct Codeword {
    CVector weights;
    int layer = 0;
    int index = 0;
    AngularSet coverage;
    std::vector<double> residual_trace; // best-so-far masked fit, nonincreasing
    bool pruned = false;
};

/// Per-iteration diagnostics of the masked phase-retrieval loop.
struct GsTrace {
    std::vector<double> e;      // masked fit E_t at each full iterate
    std::vector<double> e_half; // after the LS half-step, same mask
    double e0 = 0.0;
    bool converged = false;
    int iterations_to_tol = -1; // first t with relative decrease < rel_tol
    double max_null_leakage_pre_cm = 0.0;  // max_t max_v |a(v)^H w| / ||w||, post-projection
    double final_blocked_leakage = 0.0;    // mean_v |F(v)|^2 / g0 at the returned codeword
};

struct GsCounters {
    long long complex_multiplies = 0;

    void add_product(long long rows, long long inner, long long cols)
    {
        complex_multiplies += rows * inner * cols;
    }
};

/// Orthogonal projector onto the null space of the blocked-angle
/// dictionary, built from a rank-revealing QR of A_blk.
struct NullSpaceProjector {
    CMatrix projector;          // M x M, I - Q Q^H
    CMatrix blocked_dictionary; // M x N_blk
    CMatrix ortho_basis;        // M x rank

    Eigen::Index rank() const { return ortho_basis.cols(); }
};

/// Nyquist-rate sampling of a blocked angular set for the projector
/// dictionary: endpoint-anchored samples at spacing <= 2/M per interval.
/// An M-element ULA cannot resolve finer structure, and oversampling the
/// dictionary only inflates its numerical rank with transition-band
/// content, starving the feasible null space that codewords live in.
inline std::vector<double> nyquist_blocked_samples(const AngularSet &blocked, int m)
{
    const double spacing = 2.0 / static_cast<double>(m);
    // Nulls begin one full beamwidth inside each blocked interval, the
    // same transition band the target mask concedes: a beamwidth-limited
    // array cannot place a null closer to a served direction without
    // dragging that direction down with it.
    const double inset = 2.0 / static_cast<double>(m);
    std::vector<double> us;
    for (const auto &iv : blocked.intervals()) {
        // A blocker narrower than one beamwidth cannot be nulled
        // selectively: the null necessarily covers everything within a
        // resolution cell of it, including directions aliased across the
        // u = +/-1 seam (steering correlation is 2-periodic in u).
        if (iv.measure() < spacing)
            continue;
        const double lo = std::min(iv.lo + inset, (iv.lo + iv.hi) / 2.0);
        const double hi = std::max(iv.hi - inset, (iv.lo + iv.hi) / 2.0);
        const double width = hi - lo;
        if (width <= 0.0) {
            us.push_back((iv.lo + iv.hi) / 2.0);
            continue;
        }
        const int n = std::max(2, static_cast<int>(std::ceil(width / spacing)) + 1);
        for (int i = 0; i < n; ++i)
            us.push_back(lo + width * static_cast<double>(i) / (n - 1));
    }
    return us;
}

/// Endpoint-anchored samples of the blocked set at spacing <= 1/M, twice
/// the density of nyquist_blocked_samples, with no edge inset and no
/// narrow-interval exemption. This is the stress dictionary used by the
/// convergence experiment: it demands zeros across the entire blocked set
/// including the transition bands, the regime where the masked residual
/// plateaus at its infeasibility floor instead of vanishing.
inline std::vector<double> stress_blocked_samples(const AngularSet &blocked, int m)
{
    const double spacing = 1.0 / static_cast<double>(m);
    std::vector<double> us;
    for (const auto &iv : blocked.intervals()) {
        const double width = iv.measure();
        const int n = std::max(2, static_cast<int>(std::ceil(width / spacing)) + 1);
        for (int i = 0; i < n; ++i)
            us.push_back(iv.lo + width * static_cast<double>(i) / (n - 1));
    }
    return us;
}

inline NullSpaceProjector build_projector(const CMatrix &blocked_dictionary,
                                          GsCounters *counters = nullptr)
{
    NullSpaceProjector proj;
    proj.blocked_dictionary = blocked_dictionary;
    const Eigen::Index m = blocked_dictionary.rows();
    if (blocked_dictionary.cols() == 0) {
        proj.projector = CMatrix::Identity(m, m);
        proj.ortho_basis = CMatrix(m, 0);
        return proj;
    }
    Eigen::ColPivHouseholderQR<CMatrix> qr(blocked_dictionary);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    CMatrix q = qr.householderQ() * CMatrix::Identity(m, rank);
    proj.ortho_basis = q;
    proj.projector = CMatrix::Identity(m, m) - q * q.adjoint();
    if (counters) {
        counters->add_product(m, blocked_dictionary.cols(), blocked_dictionary.cols());
        counters->add_product(m, rank, m);
    }
    return proj;
}

namespace detail {

inline CMatrix submatrix(const CMatrix &a, const std::vector<std::size_t> &cols)
{
    CMatrix out(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = a.col(static_cast<Eigen::Index>(cols[i]));
    return out;
}

inline Eigen::VectorXd sidelobe_weights(const GsConfig &cfg, Eigen::Index n_sl)
{
    if (cfg.sidelobe_weighting.size() == 0)
        return Eigen::VectorXd::Ones(n_sl);
    if (cfg.sidelobe_weighting.size() != n_sl)
        throw std::invalid_argument("GsConfig: sidelobe_weighting size mismatch");
    return cfg.sidelobe_weighting;
}

inline double auto_tikhonov(const GsConfig &cfg, const CMatrix &a)
{
    if (cfg.tikhonov >= 0.0)
        return cfg.tikhonov;
    // trace(A A^H) = sum of squared column norms
    return 1e-6 * a.squaredNorm() / static_cast<double>(a.cols());
}

inline CVector amplitude_project(const CVector &w, AmplitudeMode mode, double power)
{
    const Eigen::Index m = w.size();
    if (mode == AmplitudeMode::constant_modulus) {
        const double mag = std::sqrt(power / static_cast<double>(m));
        CVector out(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double a = std::abs(w(i));
            out(i) = a > 0.0 ? Complex(mag * w(i).real() / a, mag * w(i).imag() / a) : Complex(mag, 0.0);
        }
        return out;
    }
    const double nrm = w.norm();
    return nrm > 0.0 ? CVector(std::sqrt(power) / nrm * w) : w;
}

/// Phase-only null repair: the constant-modulus projection smears the
/// exact nulls of a projected iterate, so minimize the blocked-sample
/// energy w^H B B^H w over the element phases by cyclic coordinate
/// descent (closed-form per-phase minimizer), with a few deterministic
/// perturbation restarts to escape shallow local minima. Stops once the
/// mean blocked power meets the cap (relative to the flat-top level).
inline CVector null_polish(const CVector &w_in, const CMatrix &b, const CMatrix &projector,
                           double flat_level, double cap_rel, double mag,
                           GsCounters *counters = nullptr)
{
    const Eigen::Index m = w_in.size();
    const Eigen::Index n_blk = b.cols();
    const double cap = cap_rel * flat_level * static_cast<double>(n_blk);
    auto blocked_energy = [&](const CVector &w) { return (b.adjoint() * w).squaredNorm(); };

    const CMatrix q_mat = b * b.adjoint();
    if (counters)
        counters->add_product(m, n_blk, m);

    auto descend = [&](CVector w, int sweeps) {
        CVector q = q_mat * w;
        if (counters)
            counters->add_product(m, m, 1);
        for (int s = 0; s < sweeps && blocked_energy(w) > cap; ++s) {
            for (Eigen::Index d = 0; d < m; ++d) {
                const Complex r = q(d) - q_mat(d, d) * w(d);
                if (std::abs(r) < 1e-300)
                    continue;
                const Complex wn = -mag * r / std::abs(r);
                q += q_mat.col(d) * (wn - w(d));
                w(d) = wn;
            }
            if (counters)
                counters->add_product(m, m, 1);
        }
        return w;
    };

    CVector best = w_in;
    double best_e = blocked_energy(best);
    // two deterministic inits: the re-projected iterate and the iterate itself
    const CVector reproj =
        amplitude_project(projector * w_in, AmplitudeMode::constant_modulus,
                          mag * mag * static_cast<double>(m));
    if (counters)
        counters->add_product(m, m, 1);
    for (const CVector &init : {reproj, w_in}) {
        const CVector cand = descend(init, 400);
        const double e = blocked_energy(cand);
        if (e < best_e) {
            best_e = e;
            best = cand;
        }
        if (best_e <= cap)
            return best;
    }
    Rng rng = make_rng(0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(m));
    const double perturb[] = {0.2, 0.4, 0.8, 1.5, 3.0, 6.0};
    for (double scale : perturb) {
        CVector w = best;
        for (Eigen::Index d = 0; d < m; ++d) {
            const Complex p = w(d) + scale * mag * random_phase(rng);
            w(d) = std::abs(p) > 0.0 ? Complex(mag * p.real() / std::abs(p), mag * p.imag() / std::abs(p))
                                     : Complex(mag, 0.0);
        }
        w = descend(w, 400);
        const double e = blocked_energy(w);
        if (e < best_e) {
            best_e = e;
            best = w;
        }
        if (best_e <= cap)
            break;
    }
    return best;
}

} // namespace detail

/// Default complex desired response on the in-sector samples: flat-top
/// magnitude with zero phase.
inline CVector default_desired(const SectorSpec &spec)
{
    const auto in = spec.in_indices();
    CVector d(static_cast<Eigen::Index>(in.size()));
    for (std::size_t i = 0; i < in.size(); ++i)
        d(static_cast<Eigen::Index>(i)) =
            std::sqrt(spec.desired_in(static_cast<Eigen::Index>(in[i])));
    return d;
}

/// Fit + sidelobe + Tikhonov objective of a candidate codeword, used to
/// compare the projector and reduced-basis solution paths.
inline double design_objective(const SectorSpec &spec, const GsConfig &cfg, const CVector &w,
                               const CVector &d, double mu)
{
    const int m = static_cast<int>(w.size());
    const CMatrix a_in = detail::submatrix(steering_dictionary(m, spec.grid.samples), spec.in_indices());
    const CMatrix a_sl = detail::submatrix(steering_dictionary(m, spec.grid.samples), spec.sidelobe_indices());
    const Eigen::VectorXd w_sl = detail::sidelobe_weights(cfg, a_sl.cols());
    const CVector sl = a_sl.adjoint() * w;
    double obj = (a_in.adjoint() * w - d).squaredNorm();
    for (Eigen::Index i = 0; i < sl.size(); ++i)
        obj += cfg.sidelobe_weight * w_sl(i) * w_sl(i) * std::norm(sl(i));
    obj += mu * w.squaredNorm();
    return obj;
}

/// Hard-null design: Tikhonov-regularized LS over the null space of the
/// blocked dictionary, w* = P_N z. Returned pre amplitude projection.
inline Codeword solve_hard_ls(const SectorSpec &spec, const NullSpaceProjector &proj,
                              const GsConfig &cfg, std::optional<CVector> desired = std::nullopt,
                              GsCounters *counters = nullptr)
{
    const Eigen::Index m = proj.projector.rows();
    const CMatrix a_full = steering_dictionary(static_cast<int>(m), spec.grid.samples);
    const CMatrix a_in = detail::submatrix(a_full, spec.in_indices());
    const CMatrix a_sl = detail::submatrix(a_full, spec.sidelobe_indices());
    if (a_in.cols() == 0)
        throw InfeasibleSectorError("solve_hard_ls: no in-sector samples");

    const CVector d = desired ? *desired : default_desired(spec);
    if (d.size() != a_in.cols())
        throw std::invalid_argument("solve_hard_ls: desired vector size mismatch");

    const double mu = detail::auto_tikhonov(cfg, a_full);
    const CMatrix at_in = proj.projector.adjoint() * a_in;
    const CMatrix at_sl = proj.projector.adjoint() * a_sl;
    const Eigen::VectorXd w_sl = detail::sidelobe_weights(cfg, a_sl.cols());

    CMatrix g = at_in * at_in.adjoint();
    if (at_sl.cols() > 0)
        g.noalias() += cfg.sidelobe_weight *
                       (at_sl * w_sl.array().square().matrix().asDiagonal() * at_sl.adjoint());
    g += mu * CMatrix::Identity(m, m);
    if (counters) {
        counters->add_product(m, at_in.cols(), m);
        counters->add_product(m, at_sl.cols(), m);
        counters->complex_multiplies += m * m * m / 3;
    }

    Eigen::LDLT<CMatrix> ldlt(g);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("solve_hard_ls: singular normal matrix, increase tikhonov");
    const CVector z = ldlt.solve(at_in * d);

    Codeword cw;
    cw.weights = proj.projector * z;
    return cw;
}

/// Soft-penalized design: blocked leakage discouraged by lambda_blk
/// instead of exact nulls; power capped at the budget.
inline Codeword solve_soft_ls(int m, const SectorSpec &spec, const GsConfig &cfg,
                              std::optional<CVector> desired = std::nullopt)
{
    const CMatrix a_full = steering_dictionary(m, spec.grid.samples);
    const CMatrix a_in = detail::submatrix(a_full, spec.in_indices());
    const CMatrix a_blk = detail::submatrix(a_full, spec.blocked_indices());
    const CMatrix a_sl = detail::submatrix(a_full, spec.sidelobe_indices());
    const CVector d = desired ? *desired : default_desired(spec);
    const double mu = detail::auto_tikhonov(cfg, a_full);
    const Eigen::VectorXd w_sl = detail::sidelobe_weights(cfg, a_sl.cols());

    CMatrix g = a_in * a_in.adjoint();
    if (a_blk.cols() > 0)
        g.noalias() += cfg.blocked_weight * (a_blk * a_blk.adjoint());
    if (a_sl.cols() > 0)
        g.noalias() += cfg.sidelobe_weight *
                       (a_sl * w_sl.array().square().matrix().asDiagonal() * a_sl.adjoint());
    g += mu * CMatrix::Identity(m, m);

    Codeword cw;
    cw.weights = Eigen::LDLT<CMatrix>(g).solve(a_in * d);
    const double p = cfg.power(m);
    if (cw.weights.squaredNorm() > p)
        cw.weights *= std::sqrt(p / cw.weights.squaredNorm());
    return cw;
}

/// Modified Gram-Schmidt orthonormalization of the projected target
/// dictionary with rank-revealing column drops.
inline CMatrix gs_basis(const NullSpaceProjector &proj, const CMatrix &target_dictionary,
                        GsCounters *counters = nullptr)
{
    const CMatrix projected = proj.projector * target_dictionary;
    if (counters)
        counters->add_product(projected.rows(), proj.projector.cols(), target_dictionary.cols());

    // Tolerance relative to the unprojected columns: residuals below it are
    // annihilated content plus rounding noise, not usable directions.
    double leading = 0.0;
    for (Eigen::Index j = 0; j < target_dictionary.cols(); ++j)
        leading = std::max(leading, target_dictionary.col(j).norm());
    const double tol = 1e-10 * leading;

    std::vector<CVector> basis;
    for (Eigen::Index j = 0; j < projected.cols(); ++j) {
        CVector v = projected.col(j);
        for (int pass = 0; pass < 2; ++pass) // reorthogonalize for stability
            for (const auto &b : basis)
                v -= (b.adjoint() * v).value() * b;
        // scrub rounding components that escaped the feasible subspace
        v = proj.projector * v;
        const double nrm = v.norm();
        if (nrm > tol)
            basis.push_back(v / nrm);
    }
    if (basis.empty())
        throw InfeasibleSectorError("gs_basis: sector fully annihilated by blockage projector");

    CMatrix u(projected.rows(), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i)
        u.col(static_cast<Eigen::Index>(i)) = basis[i];
    return u;
}

/// Reduced-dimension LS in the Gram-Schmidt basis: w = U c with c from
/// an r x r system. Matches solve_hard_ls when span(U) covers the
/// projected target and sidelobe dictionaries.
inline Codeword solve_reduced(const CMatrix &u, const SectorSpec &spec, const GsConfig &cfg,
                              std::optional<CVector> desired = std::nullopt)
{
    const int m = static_cast<int>(u.rows());
    const Eigen::Index r = u.cols();
    if (r < 1)
        throw InfeasibleSectorError("solve_reduced: empty basis");
    const CMatrix a_full = steering_dictionary(m, spec.grid.samples);
    const CMatrix b_in = detail::submatrix(a_full, spec.in_indices()).adjoint() * u;  // N_in x r
    const CMatrix b_sl = detail::submatrix(a_full, spec.sidelobe_indices()).adjoint() * u;
    const CVector d = desired ? *desired : default_desired(spec);
    const double mu = detail::auto_tikhonov(cfg, a_full);
    const Eigen::VectorXd w_sl = detail::sidelobe_weights(cfg, b_sl.rows());

    CMatrix g = b_in.adjoint() * b_in;
    if (b_sl.rows() > 0)
        g.noalias() += cfg.sidelobe_weight *
                       (b_sl.adjoint() * w_sl.array().square().matrix().asDiagonal() * b_sl);
    g += mu * CMatrix::Identity(r, r);

    Codeword cw;
    cw.weights = u * Eigen::LDLT<CMatrix>(g).solve(b_in.adjoint() * d);
    return cw;
}

/// Blockage-aware amplitude enforcement: prescribed magnitude on
/// in-sector samples, zero (hard) or passthrough (exclude) on blocked
/// samples, clamped magnitude on sidelobe samples; phases retained.
inline CVector masked_target(const SectorSpec &spec, const CVector &current, NullMode null_mode)
{
    if (current.size() != static_cast<Eigen::Index>(spec.grid.size()))
        throw std::invalid_argument("masked_target: spectrum size mismatch");
    CVector target(current.size());
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const Complex f = current(idx);
        const double mag = std::abs(f);
        const Complex phase = mag > 0.0 ? f / mag : Complex(1.0, 0.0);
        switch (spec.grid.tags[i]) {
        case RegionTag::in_sector:
            target(idx) = std::sqrt(spec.desired_in(idx)) * phase;
            break;
        case RegionTag::blocked:
            target(idx) = null_mode == NullMode::exclude ? f : Complex(0.0, 0.0);
            break;
        case RegionTag::sidelobe:
            target(idx) = std::min(mag, std::sqrt(spec.sidelobe_cap(idx))) * phase;
            break;
        }
    }
    return target;
}

/// Prefactored back-projection system. The Gram matrix A W A^H + mu I
/// depends on the sampling grid but not on the per-node tags, so one
/// factorization serves every node of a hierarchy (hard/soft modes).
struct GsWorkspace {
    CMatrix a; // M x N_u steering dictionary on the shared grid
    Eigen::LDLT<CMatrix> ldlt;
    double mu = 0.0;
};

inline GsWorkspace make_workspace(int m, const std::vector<double> &grid_samples,
                                  const GsConfig &cfg, GsCounters *counters = nullptr)
{
    GsWorkspace ws;
    ws.a = steering_dictionary(m, grid_samples);
    ws.mu = detail::auto_tikhonov(cfg, ws.a);
    const Eigen::Index n_u = ws.a.cols();
    const CMatrix g = (ws.a * ws.a.adjoint() + ws.mu * CMatrix::Identity(m, m)).eval();
    ws.ldlt.compute(g);
    if (counters) {
        counters->add_product(m, n_u, m);
        counters->complex_multiplies += static_cast<long long>(m) * m * m / 3;
    }
    return ws;
}

/// The composed masked phase-retrieval loop: forward map, blockage-aware
/// amplitude enforcement, Tikhonov LS back-projection, null-space
/// projection, and element-wise amplitude projection. Returns the
/// best-residual iterate plus the full residual trace. The instrumented
/// counter tracks the solver-side complex multiplies (Gram build,
/// factorization, triangular solves, projector application); the O(M N_u)
/// spectrum evaluations are excluded by convention.
inline std::pair<Codeword, GsTrace> gs_iterate(const CVector &w0, const SectorSpec &spec,
                                               const NullSpaceProjector &proj, const GsConfig &cfg,
                                               GsCounters *counters = nullptr,
                                               const GsWorkspace *shared = nullptr)
{
    cfg.validate();
    if (w0.size() == 0 || w0.norm() == 0.0)
        throw std::invalid_argument("gs_iterate: w0 must be nonzero");

    const int m = static_cast<int>(w0.size());
    const double power = cfg.power(m);
    const bool excl = cfg.null_mode == NullMode::exclude;
    if (shared && (excl || shared->a.cols() != static_cast<Eigen::Index>(spec.grid.size())))
        throw std::invalid_argument("gs_iterate: workspace does not match the grid");

    GsWorkspace local;
    if (!shared) {
        if (!excl) {
            local = make_workspace(m, spec.grid.samples, cfg, counters);
        } else {
            local.a = steering_dictionary(m, spec.grid.samples);
            local.mu = detail::auto_tikhonov(cfg, local.a);
            Eigen::VectorXd sw = Eigen::VectorXd::Ones(local.a.cols());
            for (std::size_t i : spec.blocked_indices())
                sw(static_cast<Eigen::Index>(i)) = 0.0;
            const CMatrix g = (local.a * sw.asDiagonal() * local.a.adjoint() +
                               local.mu * CMatrix::Identity(m, m))
                                  .eval();
            local.ldlt.compute(g);
            if (counters) {
                counters->add_product(m, local.a.cols(), m);
                counters->complex_multiplies += static_cast<long long>(m) * m * m / 3;
            }
        }
    }
    const GsWorkspace &ws = shared ? *shared : local;
    const CMatrix &a = ws.a;
    const Eigen::Index n_u = a.cols();

    Eigen::VectorXd sample_w = Eigen::VectorXd::Ones(n_u);
    if (excl)
        for (std::size_t i : spec.blocked_indices())
            sample_w(static_cast<Eigen::Index>(i)) = 0.0;
    const Eigen::LDLT<CMatrix> &ldlt = ws.ldlt;

    const bool hard = cfg.null_mode == NullMode::hard;
    const auto blocked_idx = spec.blocked_indices();

    auto masked_fit = [&](const CVector &f, const CVector &target) {
        double e = 0.0;
        for (Eigen::Index i = 0; i < n_u; ++i)
            e += sample_w(i) * std::norm(f(i) - target(i));
        return e;
    };

    GsTrace trace;
    CVector w = detail::amplitude_project(w0, cfg.amplitude_mode, power);
    CVector best_w = w;
    double best_e = std::numeric_limits<double>::infinity();
    double prev_e = std::numeric_limits<double>::infinity();

    for (int t = 0; t < cfg.max_iter; ++t) {
        const CVector f = a.adjoint() * w;
        const CVector target = masked_target(spec, f, cfg.null_mode);
        const double e = masked_fit(f, target);
        trace.e.push_back(e);
        if (t == 0)
            trace.e0 = e;
        if (e < best_e) {
            best_e = e;
            best_w = w;
        }
        if (t > 0 && prev_e > 0.0 && cfg.rel_tol > 0.0 &&
            (prev_e - e) / prev_e < cfg.rel_tol) {
            trace.converged = true;
            if (trace.iterations_to_tol < 0)
                trace.iterations_to_tol = t;
            break;
        }
        prev_e = e;

        // Tikhonov LS back-projection
        CVector rhs = a * (sample_w.asDiagonal() * target);
        CVector w_half = ldlt.solve(rhs);
        if (counters)
            counters->add_product(m, m, 2); // forward and backward substitution
        trace.e_half.push_back(masked_fit(a.adjoint() * w_half, target));

        if (hard && proj.rank() > 0) {
            w_half = proj.projector * w_half;
            if (counters)
                counters->add_product(m, m, 1);
            if (!blocked_idx.empty()) {
                double leak = 0.0;
                for (std::size_t i : blocked_idx)
                    leak = std::max(leak, std::abs((a.col(static_cast<Eigen::Index>(i)).adjoint() * w_half).value()));
                const double nrm = w_half.norm();
                if (nrm > 0.0)
                    trace.max_null_leakage_pre_cm =
                        std::max(trace.max_null_leakage_pre_cm, leak / nrm);
            }
        }
        w = detail::amplitude_project(w_half, cfg.amplitude_mode, power);
    }

    if (trace.iterations_to_tol < 0 && cfg.rel_tol > 0.0)
        trace.iterations_to_tol = cfg.max_iter;

    // CM projection smears the exact nulls; repair at the declared soft cap.
    if (hard && proj.rank() > 0 && !blocked_idx.empty() && spec.flat_level > 0.0 &&
        cfg.amplitude_mode == AmplitudeMode::constant_modulus) {
        const CMatrix b = detail::submatrix(a, blocked_idx);
        const double cap = std::pow(10.0, cfg.blocked_cap_db / 10.0);
        const double mag = std::sqrt(power / static_cast<double>(m));
        best_w = detail::null_polish(best_w, b, proj.projector, spec.flat_level, cap, mag, counters);
    }

    Codeword cw;
    cw.weights = best_w;
    cw.residual_trace.reserve(trace.e.size());
    double running = std::numeric_limits<double>::infinity();
    for (double e : trace.e) {
        running = std::min(running, e);
        cw.residual_trace.push_back(running);
    }

    // coverage and final blocked leakage of the returned iterate
    const CVector f_best = a.adjoint() * best_w;
    if (!blocked_idx.empty() && spec.flat_level > 0.0) {
        double leak = 0.0;
        for (std::size_t i : blocked_idx)
            leak += std::norm(f_best(static_cast<Eigen::Index>(i)));
        trace.final_blocked_leakage =
            leak / static_cast<double>(blocked_idx.size()) / spec.flat_level;
    }
    std::vector<AngularInterval> covered;
    const double threshold = spec.flat_level / 2.0; // -3 dB edge
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        if (std::norm(f_best(static_cast<Eigen::Index>(i))) > threshold) {
            const double u = spec.grid.samples[i];
            const double half = i + 1 < spec.grid.size()
                                    ? (spec.grid.samples[i + 1] - spec.grid.samples[i]) / 2.0
                                    : (i > 0 ? (spec.grid.samples[i] - spec.grid.samples[i - 1]) / 2.0 : 0.0);
            covered.push_back({u - half, u + half});
        }
    }
    cw.coverage = AngularSet(std::move(covered));
    return {std::move(cw), std::move(trace)};
}

/// Beam rotation: elementwise phase ramp shifting the coverage of a ULA
/// codeword by delta_u in spatial frequency.
inline Codeword rotate_codeword(const Codeword &cw, double delta_u)
{
    Codeword out = cw;
    const Eigen::Index m = cw.weights.size();
    for (Eigen::Index i = 0; i < m; ++i) {
        const double phase = std::numbers::pi * static_cast<double>(i) * delta_u;
        out.weights(i) = cw.weights(i) * Complex(std::cos(phase), std::sin(phase));
    }
    std::vector<AngularInterval> shifted;
    for (auto iv : cw.coverage.intervals())
        shifted.push_back({iv.lo + delta_u, iv.hi + delta_u});
    out.coverage = AngularSet(std::move(shifted));
    return out;
}

/// Binary-tree hierarchical codebook: layer s holds 2^s codewords
/// halving the coverage of the layer above, S = log2(M) layers total.
struct HierarchicalCodebook {
    std::vector<std::vector<Codeword>> layers;
    AngularSet available;
    GsConfig config;
    int array_size = 0;

    int depth() const { return static_cast<int>(layers.size()); }

    const Codeword &node(int layer, int index) const
    {
        return layers[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(index)];
    }
};

inline bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

/// Quadratic-phase (chirp) start for wide sectors: the aperture is split
/// into contiguous element blocks, one per active fragment and sized by
/// its measure, and each block sweeps its fragment linearly in spatial
/// frequency. The result is exactly constant modulus and close to a
/// flat-top over fragmented sectors, which the masked loop then refines.
inline CVector chirp_start(const AngularSet &active, int m, double power)
{
    CVector w = CVector::Zero(m);
    const double total = active.measure();
    const auto &ivs = active.intervals();
    if (total <= 0.0 || ivs.empty())
        return w;
    int n0 = 0;
    double carry = 0.0;
    for (std::size_t f = 0; f < ivs.size(); ++f) {
        carry += ivs[f].measure() / total * static_cast<double>(m);
        const int n1 = (f + 1 == ivs.size()) ? m : std::min(m, static_cast<int>(std::llround(carry)));
        const int len = n1 - n0;
        if (len <= 0)
            continue;
        const double a = ivs[f].lo, b = ivs[f].hi;
        double phase = 0.0; // integral of the instantaneous frequency
        for (int i = 0; i < len; ++i) {
            const double u = (len == 1) ? 0.5 * (a + b)
                                        : a + (b - a) * static_cast<double>(i) / (len - 1);
            w(n0 + i) = std::polar(1.0, std::numbers::pi * phase);
            phase += u;
        }
        n0 = n1;
    }
    return w * std::sqrt(power / static_cast<double>(m));
}

inline HierarchicalCodebook build_hierarchy(const AngularSet &available, int m, const GsConfig &cfg,
                                            std::uint64_t seed, GsCounters *counters = nullptr)
{
    if (!is_power_of_two(m) || m < 2)
        throw std::invalid_argument("build_hierarchy: array size must be a power of two >= 2");
    if (available.empty())
        throw OutageError("build_hierarchy: no available directions");

    const AngularSet fov = AngularSet::interval(-1.0, 1.0);
    const AngularSet blocked = set_subtract(fov, available);
    // The mask's hard zeros start one resolution cell inside each blocked
    // interval; boundary bins fall under the sidelobe cap instead. An
    // M-element array cannot realize a brick-wall edge, and demanding one
    // rings the in-sector response.
    const AngularSet blocked_mask = erode_set(blocked, 2.0 / static_cast<double>(m));
    const int depth = static_cast<int>(std::log2(m));

    // Shared blocked dictionary and projector: sampled once, identical
    // for every node.
    const GsConfig node_cfg = cfg;
    const double density = cfg.grid_density_factor * m / fov.measure();
    const AngularGrid fov_grid = grid_sample(fov, blocked_mask, fov, density);
    const NullSpaceProjector proj =
        build_projector(steering_dictionary(m, nyquist_blocked_samples(blocked, m)), counters);
    const bool share = cfg.null_mode != NullMode::exclude;
    GsWorkspace ws;
    if (share)
        ws = make_workspace(m, fov_grid.samples, cfg, counters);

    HierarchicalCodebook book;
    book.available = available;
    book.config = cfg;
    book.array_size = m;

    const NullSpaceProjector no_nulls = build_projector(CMatrix(m, 0));

    Rng rng = make_rng(seed);
    for (int s = 1; s <= depth; ++s) {
        const int count = 1 << s;
        const double width = 2.0 / count;
        std::vector<Codeword> layer;
        layer.reserve(static_cast<std::size_t>(count));

        // One unblocked flat-top prototype per layer; every cell of the
        // layer is an exact rotation of it.
        Codeword trad_proto;
        if (width * static_cast<double>(m) > 8.0) {
            const AngularSet cell0 = AngularSet::interval(-1.0, -1.0 + width);
            const SectorSpec tspec = make_sector_spec(cell0, AngularSet::empty_set(), fov, m, node_cfg);
            auto [tp, ttr] = gs_iterate(chirp_start(cell0, m, node_cfg.power(m)), tspec, no_nulls,
                                        node_cfg, counters, share ? &ws : nullptr);
            trad_proto = std::move(tp);
        }
        for (int l = 0; l < count; ++l) {
            const double lo = -1.0 + l * width;
            const AngularSet sector = AngularSet::interval(lo, lo + width);
            const AngularSet active = set_intersect(sector, available);
            Codeword cw;
            cw.layer = s;
            cw.index = l;
            if (active.measure() <= 1e-12) {
                cw.pruned = true;
                cw.weights = CVector::Zero(m);
                layer.push_back(std::move(cw));
                continue;
            }
            SectorSpec spec = make_sector_spec(active, blocked_mask, fov, m, node_cfg);
            const bool has_parent =
                s > 1 && !book.layers[static_cast<std::size_t>(s - 2)][static_cast<std::size_t>(l / 2)].pruned;

            // Wide, fragmented sectors are where the flat-top residual
            // objective breaks the greedy descent: its attractor rings the
            // available out-of-sector directions at in-sector level, so a
            // sibling can collect as much power from the dominant path as
            // the node that owns it. Those nodes choose among several
            // candidates by contrast, the worst in-sector gain over the
            // highest available-direction sidelobe. Narrow nodes converge
            // cleanly from a single warm start.
            const bool wide = active.measure() * static_cast<double>(m) > 8.0;

            // A sub-resolution cell cannot support a flat-top at the peak
            // level, and a null constraint at the finest layer only trades
            // away gain toward the one direction the cell serves. Leaves
            // are pure centroid steering beams (exactly constant modulus);
            // blockage awareness at this layer lives in the pruning and in
            // the centroid shift of partially blocked cells.
            const bool leaf = active.measure() * static_cast<double>(m) <= 2.0 + 1e-9;
            if (leaf) {
                double centroid = 0.0;
                for (const auto &iv : active.intervals())
                    centroid += 0.5 * (iv.lo + iv.hi) * iv.measure();
                centroid /= active.measure();
                cw.weights = std::sqrt(node_cfg.power(m)) * steering_ula(m, centroid);
                cw.coverage = active;
                layer.push_back(std::move(cw));
                continue;
            }

            if (!wide) {
                CVector w0;
                if (has_parent) {
                    w0 = book.layers[static_cast<std::size_t>(s - 2)][static_cast<std::size_t>(l / 2)]
                             .weights;
                } else {
                    const Codeword ls = solve_hard_ls(spec, proj, node_cfg, std::nullopt, counters);
                    if (ls.weights.norm() > 1e-12 * std::sqrt(static_cast<double>(m))) {
                        w0 = ls.weights;
                    } else {
                        w0 = CVector(m);
                        for (int i = 0; i < m; ++i)
                            w0(i) = random_phase(rng);
                    }
                }
                auto [solved, trace] =
                    gs_iterate(w0, spec, proj, node_cfg, counters, share ? &ws : nullptr);
                cw.weights = solved.weights;
                cw.coverage = solved.coverage;
                cw.residual_trace = solved.residual_trace;
                layer.push_back(std::move(cw));
                continue;
            }

            // contrast scoring grid: in-sector samples against available
            // out-of-sector samples (blocked margins excluded from both)
            std::vector<double> in_samples, sl_samples;
            for (std::size_t i = 0; i < spec.grid.size(); ++i) {
                const double u = spec.grid.samples[i];
                if (spec.grid.tags[i] == RegionTag::in_sector)
                    in_samples.push_back(u);
                else if (spec.grid.tags[i] == RegionTag::sidelobe && available.contains(u))
                    sl_samples.push_back(u);
            }
            const CMatrix a_in = steering_dictionary(m, in_samples);
            const CMatrix a_sl = steering_dictionary(m, sl_samples);
            const double cap_floor = spec.flat_level * 1e-2;

            double best_contrast = -1.0, best_min = -1.0;
            auto consider = [&](const CVector &w, const AngularSet &coverage,
                                const std::vector<double> &trace) {
                if (counters)
                    counters->add_product(
                        static_cast<long long>(in_samples.size() + sl_samples.size()), m, 1);
                const double mn =
                    in_samples.empty() ? 0.0 : (a_in.adjoint() * w).cwiseAbs2().minCoeff();
                const double sl =
                    sl_samples.empty() ? 0.0 : (a_sl.adjoint() * w).cwiseAbs2().maxCoeff();
                const double contrast = mn / std::max(sl, cap_floor);
                if (contrast > best_contrast ||
                    (contrast == best_contrast && mn > best_min)) {
                    best_contrast = contrast;
                    best_min = mn;
                    cw.weights = w;
                    cw.coverage = coverage;
                    cw.residual_trace = trace;
                }
            };

            // Candidate 1: the unblocked prototype for this cell width,
            // rotated into place, pushed through the null projection and
            // the constant-modulus projection. The smooth backbone keeps
            // the sibling contrast that the full loop trades away.
            {
                const Codeword shifted = rotate_codeword(trad_proto, l * width);
                CVector wb = proj.projector * shifted.weights;
                const double amp = std::sqrt(node_cfg.power(m) / static_cast<double>(m));
                for (int i = 0; i < m; ++i)
                    wb(i) = std::polar(amp, std::arg(wb(i)));
                if (counters)
                    counters->add_product(m, m, 1);
                // -3 dB coverage of the projected candidate
                std::vector<AngularInterval> covered;
                const double spacing_u = 1.0 / density;
                const Eigen::VectorXd gin = (a_in.adjoint() * wb).cwiseAbs2();
                for (std::size_t i = 0; i < in_samples.size(); ++i)
                    if (gin(static_cast<Eigen::Index>(i)) > spec.flat_level / 2.0)
                        covered.push_back({in_samples[i] - spacing_u / 2.0,
                                           in_samples[i] + spacing_u / 2.0});
                consider(wb, AngularSet(std::move(covered)), {});
            }

            // Candidates 2 and 3: the composed loop from the projector-LS
            // warm start and from the chirp start.
            {
                const Codeword ls = solve_hard_ls(spec, proj, node_cfg, std::nullopt, counters);
                CVector w0 = ls.weights;
                if (w0.norm() <= 1e-12 * std::sqrt(static_cast<double>(m))) {
                    w0 = CVector(m);
                    for (int i = 0; i < m; ++i)
                        w0(i) = random_phase(rng);
                }
                auto [solved, trace] =
                    gs_iterate(w0, spec, proj, node_cfg, counters, share ? &ws : nullptr);
                consider(solved.weights, solved.coverage, solved.residual_trace);
            }
            {
                auto [solved, trace] =
                    gs_iterate(chirp_start(active, m, node_cfg.power(m)), spec, proj, node_cfg,
                               counters, share ? &ws : nullptr);
                consider(solved.weights, solved.coverage, solved.residual_trace);
            }
            layer.push_back(std::move(cw));
        }
        if (s == 1 && layer[0].pruned && layer[1].pruned)
            throw OutageError("build_hierarchy: both top-layer sectors fully blocked");
        book.layers.push_back(std::move(layer));
    }
    return book;
}

} // namespace blockbeam
