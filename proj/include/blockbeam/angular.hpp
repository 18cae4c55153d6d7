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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace blockbeam {

/// Half-open interval [lo, hi) on the angle (or spatial-frequency) axis.
/// Half-open membership makes set subtraction exact at shared endpoints.
struct AngularInterval {
    double lo = 0.0;
    double hi = 0.0;

    double measure() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x < hi; }
    bool empty() const { return hi <= lo; }
};

/// Disjoint union of sorted intervals. The available/blocked direction
/// algebra: union, subtraction and intersection all return minimal
/// disjoint representations.
class AngularSet {
  public:
    AngularSet() = default;

    explicit AngularSet(std::vector<AngularInterval> intervals)
    {
        normalize(std::move(intervals));
    }

    static AngularSet interval(double lo, double hi)
    {
        return AngularSet({AngularInterval{lo, hi}});
    }

    static AngularSet empty_set() { return AngularSet(); }

    const std::vector<AngularInterval> &intervals() const { return intervals_; }

    bool empty() const { return intervals_.empty(); }

    double measure() const
    {
        double m = 0.0;
        for (const auto &iv : intervals_)
            m += iv.measure();
        return m;
    }

    double lower() const { return intervals_.front().lo; }
    double upper() const { return intervals_.back().hi; }

    bool contains(double x) const
    {
        // binary search over sorted disjoint intervals
        auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                                   [](double v, const AngularInterval &iv) { return v < iv.lo; });
        if (it == intervals_.begin())
            return false;
        return std::prev(it)->contains(x);
    }

  private:
    std::vector<AngularInterval> intervals_;

    void normalize(std::vector<AngularInterval> in)
    {
        std::erase_if(in, [](const AngularInterval &iv) { return iv.empty(); });
        std::sort(in.begin(), in.end(),
                  [](const AngularInterval &a, const AngularInterval &b) { return a.lo < b.lo; });
        for (const auto &iv : in) {
            if (!intervals_.empty() && iv.lo <= intervals_.back().hi)
                intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
            else
                intervals_.push_back(iv);
        }
    }
};

/// Minimal disjoint union of a list of raw intervals.
inline AngularSet set_union(std::vector<AngularInterval> intervals)
{
    return AngularSet(std::move(intervals));
}

inline AngularSet set_union(const AngularSet &a, const AngularSet &b)
{
    std::vector<AngularInterval> all = a.intervals();
    all.insert(all.end(), b.intervals().begin(), b.intervals().end());
    return AngularSet(std::move(all));
}

/// fov minus blocked; exact at endpoints thanks to half-open membership.
/// Shrink every interval by `margin` on both sides; intervals narrower
/// than 2*margin vanish.
inline AngularSet erode_set(const AngularSet &s, double margin)
{
    std::vector<AngularInterval> out;
    for (const auto &iv : s.intervals())
        if (iv.hi - iv.lo > 2.0 * margin)
            out.push_back({iv.lo + margin, iv.hi - margin});
    return AngularSet(std::move(out));
}

inline AngularSet set_subtract(const AngularSet &fov, const AngularSet &blocked)
{
    std::vector<AngularInterval> out;
    for (const auto &f : fov.intervals()) {
        double cursor = f.lo;
        for (const auto &b : blocked.intervals()) {
            if (b.hi <= cursor)
                continue;
            if (b.lo >= f.hi)
                break;
            if (b.lo > cursor)
                out.push_back({cursor, std::min(b.lo, f.hi)});
            cursor = std::max(cursor, b.hi);
            if (cursor >= f.hi)
                break;
        }
        if (cursor < f.hi)
            out.push_back({cursor, f.hi});
    }
    return AngularSet(std::move(out));
}

inline AngularSet set_intersect(const AngularSet &a, const AngularSet &b)
{
    std::vector<AngularInterval> out;
    auto ia = a.intervals().begin(), ea = a.intervals().end();
    auto ib = b.intervals().begin(), eb = b.intervals().end();
    while (ia != ea && ib != eb) {
        const double lo = std::max(ia->lo, ib->lo);
        const double hi = std::min(ia->hi, ib->hi);
        if (lo < hi)
            out.push_back({lo, hi});
        (ia->hi < ib->hi ? ia : ib)++;
    }
    return AngularSet(std::move(out));
}

enum class RegionTag { in_sector, blocked, sidelobe };

/// Uniformly sampled grid over the field of view with exhaustive,
/// mutually exclusive per-sample region tags.
struct AngularGrid {
    std::vector<double> samples;
    std::vector<RegionTag> tags;

    std::size_t size() const { return samples.size(); }

    std::vector<std::size_t> indices(RegionTag t) const
    {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < tags.size(); ++i)
            if (tags[i] == t)
                idx.push_back(i);
        return idx;
    }
};

/// Samples the fov at `density` samples per unit axis length and tags each
/// sample: blocked wins over in_sector, the remainder is sidelobe.
inline AngularGrid grid_sample(const AngularSet &sector, const AngularSet &blocked,
                               const AngularSet &fov, double density)
{
    if (density <= 0.0)
        throw std::invalid_argument("grid_sample: density must be positive");
    if (fov.empty())
        throw std::invalid_argument("grid_sample: empty fov");

    AngularGrid grid;
    for (const auto &iv : fov.intervals()) {
        const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(density * iv.measure())));
        const double step = iv.measure() / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = iv.lo + (static_cast<double>(i) + 0.5) * step;
            grid.samples.push_back(u);
            if (blocked.contains(u))
                grid.tags.push_back(RegionTag::blocked);
            else if (sector.contains(u))
                grid.tags.push_back(RegionTag::in_sector);
            else
                grid.tags.push_back(RegionTag::sidelobe);
        }
    }
    return grid;
}

} // namespace blockbeam
