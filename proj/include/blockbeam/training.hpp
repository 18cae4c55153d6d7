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
// Run-time beam evaluation and search: pruned hierarchical descent,
// traditional descent, and exhaustive scanning, with evaluation counting
// and overhead-to-target measurement.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "blockbeam/channel.hpp"
#include "blockbeam/gs.hpp"
#include "blockbeam/rng.hpp"

namespace blockbeam {

struct TrainingBudget {
    int pilot_length = 16;         // L_p symbols per beam evaluation
    double slot_duration_s = 0.2;  // coherence slot T
    double move_time_s = 5e-4;     // mechanical move tau
    std::vector<ArrayLayout> layouts;

    void validate() const
    {
        if (pilot_length < 1)
            throw std::invalid_argument("TrainingBudget: pilot_length >= 1 required");
        if (move_time_s < 0.0 || move_time_s >= slot_duration_s)
            throw std::invalid_argument("TrainingBudget: need 0 <= move_time < slot_duration");
    }
};

/// Sentinel for overhead_to_target when the target is never reached
/// within the method's full evaluation budget.
inline constexpr int overhead_unreached = std::numeric_limits<int>::max();

struct TrainingResult {
    Codeword selected;
    int evaluations = 0;
    std::vector<double> measured_rates; // per UE, bits/s/Hz at the selected beam
    bool outage = false;
    int layout_index = 0;
    int moves = 0;
    double wall_model_time_s = 0.0; // evaluations * pilot time + moves * tau
    std::vector<double> best_rate_curve; // true sum rate of the best-measured beam so far
};

namespace detail {

inline std::vector<CVector> cascade_rows(const ChannelRealization &channel, const RisPhase &phi)
{
    std::vector<CVector> rows;
    rows.reserve(channel.h_ris_ue.size());
    for (const auto &h_ru : channel.h_ris_ue)
        rows.push_back(cascade(h_ru, phi, channel.h_bs_ris));
    return rows;
}

inline double true_sum_rate(const std::vector<CVector> &rows, const CVector &w,
                            const LinkBudget &budget)
{
    double sum = 0.0;
    for (const auto &h : rows)
        sum += rate(snr(h, w, budget));
    return sum;
}

} // namespace detail

/// Per-UE received pilot power |sqrt(p) h_k . w + n|^2 averaged over L_p
/// noisy symbols. Unbiased for p|h_k . w|^2 + sigma^2.
inline std::vector<double> evaluate_beam(const ChannelRealization &channel, const RisPhase &phi,
                                         const CVector &w, const LinkBudget &budget, int l_p,
                                         Rng &rng)
{
    if (l_p < 1)
        throw std::invalid_argument("evaluate_beam: l_p >= 1 required");
    const auto rows = detail::cascade_rows(channel, phi);
    std::vector<double> measured;
    measured.reserve(rows.size());
    const double amp = std::sqrt(budget.tx_power_w);
    for (const auto &h : rows) {
        const Complex signal = amp * (h.transpose() * w).value();
        double acc = 0.0;
        for (int i = 0; i < l_p; ++i)
            acc += std::norm(signal + complex_gaussian(rng, budget.noise_power_w));
        measured.push_back(acc / l_p);
    }
    return measured;
}

/// Top-down binary descent. At each layer the unpruned children of the
/// current node are measured and the larger sum power wins (tie: lower
/// index). aware=true is the pruned proposed search; aware=false walks
/// the same tree but is meant for codebooks built without a blockage
/// mask. Pruned nodes are never measured in either mode.
inline TrainingResult hierarchical_search(const HierarchicalCodebook &book,
                                          const ChannelRealization &channel, const RisPhase &phi,
                                          const LinkBudget &budget, int l_p, bool aware, Rng &rng)
{
    (void)aware; // the descent itself is identical; pruning lives in the tree
    TrainingResult result;
    const auto rows = detail::cascade_rows(channel, phi);
    const double pilot_time = l_p / budget.bandwidth_hz;

    double best_stat = -1.0;
    double best_true_rate = 0.0;
    int current = -1; // virtual root

    for (int s = 1; s <= book.depth(); ++s) {
        const std::vector<int> candidates =
            current < 0 ? std::vector<int>{0, 1} : std::vector<int>{2 * current, 2 * current + 1};
        int winner = -1;
        double winner_stat = -1.0;
        for (int idx : candidates) {
            const Codeword &cw = book.node(s, idx);
            if (cw.pruned)
                continue;
            const auto measured = evaluate_beam(channel, phi, cw.weights, budget, l_p, rng);
            double stat = 0.0;
            for (double v : measured)
                stat += v;
            ++result.evaluations;
            if (stat > best_stat) {
                best_stat = stat;
                best_true_rate = detail::true_sum_rate(rows, cw.weights, budget);
            }
            result.best_rate_curve.push_back(best_true_rate);
            if (stat > winner_stat) {
                winner_stat = stat;
                winner = idx;
            }
        }
        if (winner < 0) {
            result.outage = true;
            result.wall_model_time_s = result.evaluations * pilot_time;
            return result;
        }
        current = winner;
    }

    result.selected = book.node(book.depth(), current);
    for (const auto &h : rows)
        result.measured_rates.push_back(rate(snr(h, result.selected.weights, budget)));
    result.wall_model_time_s = result.evaluations * pilot_time;
    return result;
}

/// Flat scan over a beam list, returns the argmax of the summed measured
/// power; evaluations always equal the list length.
inline TrainingResult exhaustive_search(const std::vector<CVector> &beams,
                                        const ChannelRealization &channel, const RisPhase &phi,
                                        const LinkBudget &budget, int l_p, Rng &rng)
{
    if (beams.empty())
        throw std::invalid_argument("exhaustive_search: empty codebook");
    TrainingResult result;
    const auto rows = detail::cascade_rows(channel, phi);
    const double pilot_time = l_p / budget.bandwidth_hz;

    double best_stat = -1.0;
    double best_true_rate = 0.0;
    int best_idx = 0;
    for (std::size_t i = 0; i < beams.size(); ++i) {
        const auto measured = evaluate_beam(channel, phi, beams[i], budget, l_p, rng);
        double stat = 0.0;
        for (double v : measured)
            stat += v;
        ++result.evaluations;
        if (stat > best_stat) {
            best_stat = stat;
            best_idx = static_cast<int>(i);
            best_true_rate = detail::true_sum_rate(rows, beams[i], budget);
        }
        result.best_rate_curve.push_back(best_true_rate);
    }

    result.selected.weights = beams[static_cast<std::size_t>(best_idx)];
    result.selected.layer = 0;
    result.selected.index = best_idx;
    for (const auto &h : rows)
        result.measured_rates.push_back(rate(snr(h, result.selected.weights, budget)));
    result.wall_model_time_s = result.evaluations * pilot_time;
    return result;
}

/// Smallest evaluation count whose best-so-far true rate reaches
/// target_fraction of the reference optimal rate.
inline int overhead_to_target(const std::vector<double> &best_rate_curve, double reference_rate,
                              double target_fraction = 0.8)
{
    if (target_fraction <= 0.0)
        return 1;
    if (target_fraction > 1.0)
        throw std::invalid_argument("overhead_to_target: target_fraction in (0, 1] required");
    const double target = target_fraction * reference_rate;
    for (std::size_t i = 0; i < best_rate_curve.size(); ++i)
        if (best_rate_curve[i] >= target)
            return static_cast<int>(i) + 1;
    return overhead_unreached;
}

/// Run an inner search once per candidate MA layout, charging one
/// mechanical move per layout change, and keep the best outcome.
inline TrainingResult layout_sweep(const TrainingBudget &budget,
                                   const std::function<TrainingResult(const ArrayLayout &, int)> &inner_search)
{
    budget.validate();
    if (budget.layouts.empty())
        throw std::invalid_argument("layout_sweep: layouts nonempty required");

    TrainingResult best;
    bool have_best = false;
    int total_evaluations = 0;
    double total_time = 0.0;
    for (std::size_t i = 0; i < budget.layouts.size(); ++i) {
        TrainingResult r = inner_search(budget.layouts[i], static_cast<int>(i));
        r.layout_index = static_cast<int>(i);
        total_evaluations += r.evaluations;
        total_time += r.wall_model_time_s;
        double sum_rate = 0.0;
        for (double v : r.measured_rates)
            sum_rate += v;
        double best_rate = 0.0;
        for (double v : best.measured_rates)
            best_rate += v;
        if (!have_best || (!r.outage && (best.outage || sum_rate > best_rate))) {
            best = std::move(r);
            have_best = true;
        }
    }
    best.moves = static_cast<int>(budget.layouts.size()) - 1;
    best.evaluations = total_evaluations;
    best.wall_model_time_s = total_time + best.moves * budget.move_time_s;
    return best;
}

} // namespace blockbeam
