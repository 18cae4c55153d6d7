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
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace blockbeam {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Movable-antenna array geometry: element positions inside a movement
/// region box, plus a phase reference point.
struct ArrayLayout {
    std::vector<Eigen::Vector3d> positions;
    Eigen::Vector3d reference_point = Eigen::Vector3d::Zero();
    double wavelength = 0.005; // 60 GHz
    Eigen::AlignedBox3d movement_region;

    int count() const { return static_cast<int>(positions.size()); }

    void validate() const
    {
        if (positions.empty())
            throw std::invalid_argument("ArrayLayout: need at least one element");
        if (wavelength <= 0.0)
            throw std::invalid_argument("ArrayLayout: wavelength must be positive");
        for (const auto &p : positions)
            if (!movement_region.isEmpty() && !movement_region.contains(p))
                throw std::invalid_argument("ArrayLayout: element outside movement region");
    }

    /// Half-wavelength uniform linear array along -x from `origin` so
    /// that the far-field phase matches steering_ula with u = cos(azimuth).
    static ArrayLayout ula(int m, double wavelength, const Eigen::Vector3d &origin = Eigen::Vector3d::Zero())
    {
        if (m < 1)
            throw std::invalid_argument("ArrayLayout::ula: m >= 1 required");
        ArrayLayout layout;
        layout.wavelength = wavelength;
        layout.reference_point = origin;
        layout.positions.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            layout.positions.push_back(origin - Eigen::Vector3d(i * wavelength / 2.0, 0.0, 0.0));
        layout.movement_region =
            Eigen::AlignedBox3d(origin - Eigen::Vector3d(m * wavelength, 0.01, 0.01),
                                origin + Eigen::Vector3d(0.01, 0.01, 0.01));
        return layout;
    }
};

/// Half-wavelength ULA steering vector at spatial frequency u in [-1, 1]:
/// entry m = (1/sqrt(M)) exp(j pi m u).
inline CVector steering_ula(int m, double u)
{
    if (m < 1)
        throw std::invalid_argument("steering_ula: m >= 1 required");
    CVector a(m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (int i = 0; i < m; ++i) {
        const double phase = std::numbers::pi * i * u;
        a(i) = Complex(scale * std::cos(phase), scale * std::sin(phase));
    }
    return a;
}

/// General far-field response of an arbitrary 3D layout toward an
/// azimuth direction (horizontal plane):
/// entry m = (1/sqrt(M)) exp(-j (2 pi / lambda) <b_m - b_0, unit(dir)>).
inline CVector steering_3d(const ArrayLayout &layout, double azimuth)
{
    const int m = layout.count();
    const Eigen::Vector3d dir(std::cos(azimuth), std::sin(azimuth), 0.0);
    CVector a(m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    const double k = 2.0 * std::numbers::pi / layout.wavelength;
    for (int i = 0; i < m; ++i) {
        const double phase = -k * (layout.positions[static_cast<std::size_t>(i)] - layout.reference_point).dot(dir);
        a(i) = Complex(scale * std::cos(phase), scale * std::sin(phase));
    }
    return a;
}

/// M orthogonal ULA steering vectors uniformly spaced in u, columnwise.
inline CMatrix dft_codebook(int m)
{
    if (m < 1)
        throw std::invalid_argument("dft_codebook: m >= 1 required");
    CMatrix book(m, m);
    for (int k = 0; k < m; ++k) {
        const double u = -1.0 + (2.0 * k + 1.0) / static_cast<double>(m);
        book.col(k) = steering_ula(m, u);
    }
    return book;
}

/// Spatial frequencies of the dft_codebook columns.
inline std::vector<double> dft_frequencies(int m)
{
    std::vector<double> us(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k)
        us[static_cast<std::size_t>(k)] = -1.0 + (2.0 * k + 1.0) / static_cast<double>(m);
    return us;
}

/// Steering dictionary: columns a(u_i) for each grid frequency.
inline CMatrix steering_dictionary(int m, const std::vector<double> &us)
{
    CMatrix a(m, static_cast<Eigen::Index>(us.size()));
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        a.col(i) = steering_ula(m, us[static_cast<std::size_t>(i)]);
    return a;
}

} // namespace blockbeam
