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

#include <complex>
#include <cstdint>
#include <random>

namespace blockbeam {

using Rng = std::mt19937_64;

/// Derives an independent stream for (seed, index) pairs, e.g. per
/// Monte-Carlo trial. splitmix64 finalizer over the combined state.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0)
{
    return Rng(derive_seed(seed, index));
}

inline double uniform(Rng &rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Circularly-symmetric complex Gaussian with variance `var` (total,
/// split evenly between the real and imaginary parts).
inline std::complex<double> complex_gaussian(Rng &rng, double var)
{
    std::normal_distribution<double> n(0.0, std::sqrt(var / 2.0));
    return {n(rng), n(rng)};
}

/// Unit-modulus complex number with uniform random phase.
inline std::complex<double> random_phase(Rng &rng)
{
    const double theta = uniform(rng, 0.0, 6.283185307179586476925286766559);
    return {std::cos(theta), std::sin(theta)};
}

} // namespace blockbeam
