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
#include <optional>
#include <stdexcept>
#include <vector>

#include "blockbeam/angular.hpp"
#include "blockbeam/array.hpp"

namespace blockbeam {

/// Circular obstacle between the array and the RIS (azimuthal model:
/// a disc of radius `radius` in the horizontal plane).
struct Blockage {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 0.0;
};

struct BlockageScene {
    std::vector<Blockage> blockages;

    int count() const { return static_cast<int>(blockages.size()); }
};

struct RisGeometry {
    std::vector<Eigen::Vector3d> element_positions;

    int count() const { return static_cast<int>(element_positions.size()); }

    Eigen::Vector3d centroid() const
    {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (const auto &p : element_positions)
            c += p;
        return c / static_cast<double>(element_positions.size());
    }

    /// Half-wavelength ULA along +y.
    static RisGeometry ula(int n, double wavelength, const Eigen::Vector3d &origin)
    {
        if (n < 1)
            throw std::invalid_argument("RisGeometry::ula: n >= 1 required");
        RisGeometry g;
        g.element_positions.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            g.element_positions.push_back(origin + Eigen::Vector3d(0.0, i * wavelength / 2.0, 0.0));
        return g;
    }
};

/// 2D point-to-line distance between the obstacle center and the
/// MA-to-RIS-element line, evaluated in the horizontal plane.
inline double perpendicular_distance(const Eigen::Vector3d &ma, const Eigen::Vector3d &ris_elem,
                                     const Blockage &blk)
{
    const double mx = ma.x(), my = ma.y();
    const double rx = ris_elem.x(), ry = ris_elem.y();
    const double ox = blk.center.x(), oy = blk.center.y();
    const double denom = std::hypot(ry - my, rx - mx);
    if (denom <= 0.0)
        throw std::invalid_argument("perpendicular_distance: MA and RIS element coincide horizontally");
    return std::abs((ry - my) * ox - (rx - mx) * oy + rx * my - mx * ry) / denom;
}

/// Azimuthal cone subtended by the disc as seen from `ma`:
/// [alpha - delta, alpha + delta] with delta = asin(r / dist).
/// An MA inside the disc blocks every direction (nullopt marks that).
inline std::optional<AngularInterval> blocked_cone(const Eigen::Vector3d &ma, const Blockage &blk)
{
    const double dx = blk.center.x() - ma.x();
    const double dy = blk.center.y() - ma.y();
    const double dist = std::hypot(dx, dy);
    if (dist <= blk.radius)
        return std::nullopt; // inside the disc: full blockage
    const double alpha = std::atan2(dy, dx);
    const double delta = std::asin(blk.radius / dist);
    return AngularInterval{alpha - delta, alpha + delta};
}

/// Blocked azimuth interval of one obstacle clipped to the fov. An MA
/// inside the disc yields the full fov.
inline AngularSet blocked_interval(const Eigen::Vector3d &ma, const Blockage &blk, const AngularSet &fov)
{
    const auto cone = blocked_cone(ma, blk);
    if (!cone)
        return fov;
    // Wrap the cone into the principal range so obstacles behind the
    // array still clip correctly against a fov within [-pi, pi].
    std::vector<AngularInterval> wrapped{*cone};
    constexpr double two_pi = 6.283185307179586476925286766559;
    wrapped.push_back({cone->lo - two_pi, cone->hi - two_pi});
    wrapped.push_back({cone->lo + two_pi, cone->hi + two_pi});
    return set_intersect(AngularSet(std::move(wrapped)), fov);
}

struct DetectionStats {
    long long predicate_evals = 0;
    long long merge_ops = 0;
};

/// Phi_ava: fov minus the union of all blocked cones, optionally padded
/// by a guard angle to model detection uncertainty.
inline AngularSet available_angles(const Eigen::Vector3d &ma, const AngularSet &fov,
                                   const BlockageScene &scene, double guard_angle = 0.0,
                                   DetectionStats *stats = nullptr)
{
    AngularSet blocked;
    for (const auto &blk : scene.blockages) {
        if (stats)
            ++stats->predicate_evals;
        auto cone = blocked_cone(ma, blk);
        AngularSet piece = cone ? blocked_interval(ma, blk, fov) : fov;
        if (guard_angle > 0.0 && !piece.empty()) {
            std::vector<AngularInterval> padded;
            for (auto iv : piece.intervals())
                padded.push_back({iv.lo - guard_angle, iv.hi + guard_angle});
            piece = set_intersect(AngularSet(std::move(padded)), fov);
        }
        blocked = set_union(blocked, piece);
        if (stats)
            ++stats->merge_ops;
    }
    return set_subtract(fov, blocked);
}

/// True iff the ray from `ma` toward `direction` hits any obstacle disc.
/// Independent of the cone model: plain 2D ray-circle intersection.
inline bool oracle_is_blocked(const Eigen::Vector3d &ma, double direction, const BlockageScene &scene)
{
    const Eigen::Vector2d origin(ma.x(), ma.y());
    const Eigen::Vector2d dir(std::cos(direction), std::sin(direction));
    for (const auto &blk : scene.blockages) {
        const Eigen::Vector2d to_center = Eigen::Vector2d(blk.center.x(), blk.center.y()) - origin;
        if (to_center.norm() <= blk.radius)
            return true;
        const double t = to_center.dot(dir);
        if (t <= 0.0)
            continue;
        const double closest = (to_center - t * dir).norm();
        if (closest <= blk.radius)
            return true;
    }
    return false;
}

/// Scene-level detection across all MA elements and RIS elements.
/// The per-link predicate marks (m, n) pairs whose direct segment is
/// occluded; per-MA available sets come from the cone model.
struct BlockageReport {
    std::vector<AngularSet> available_per_ma;
    AngularSet available; // at the array reference point
    Eigen::MatrixXi link_blocked; // M x N
    DetectionStats stats;
};

/// True iff the segment a -> b passes within `radius` of the disc center
/// (horizontal plane).
inline bool segment_occluded(const Eigen::Vector3d &a, const Eigen::Vector3d &b, const Blockage &blk)
{
    const Eigen::Vector2d p(a.x(), a.y()), q(b.x(), b.y());
    const Eigen::Vector2d c(blk.center.x(), blk.center.y());
    const Eigen::Vector2d d = q - p;
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? (c - p).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p + t * d - c).norm() <= blk.radius;
}

/// Map an azimuth set (radians, clipped to [0, pi]) to the spatial
/// frequency domain u = cos(azimuth) of a half-wavelength ULA.
inline AngularSet azimuth_to_u(const AngularSet &azimuth)
{
    std::vector<AngularInterval> out;
    for (auto iv : azimuth.intervals()) {
        const double lo = std::clamp(iv.lo, 0.0, std::numbers::pi);
        const double hi = std::clamp(iv.hi, 0.0, std::numbers::pi);
        if (hi > lo)
            out.push_back({std::cos(hi), std::cos(lo)});
    }
    return AngularSet(std::move(out));
}

inline BlockageReport detect_blockage(const ArrayLayout &layout, const RisGeometry &ris,
                                      const BlockageScene &scene, const AngularSet &fov,
                                      double guard_angle = 0.0)
{
    BlockageReport report;
    const int m = layout.count();
    const int n = ris.count();
    report.link_blocked = Eigen::MatrixXi::Zero(m, n);
    for (int i = 0; i < m; ++i) {
        const auto &ma = layout.positions[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            for (const auto &blk : scene.blockages) {
                ++report.stats.predicate_evals;
                if (segment_occluded(ma, ris.element_positions[static_cast<std::size_t>(j)], blk))
                    report.link_blocked(i, j) = 1;
            }
        }
        report.available_per_ma.push_back(available_angles(ma, fov, scene, guard_angle, &report.stats));
    }
    report.available = available_angles(layout.reference_point, fov, scene, guard_angle, &report.stats);
    return report;
}

} // namespace blockbeam
