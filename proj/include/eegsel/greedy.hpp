#pragma once

// Accuracy-driven forward channel selection used as the comparison baseline.

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "eegsel/classify.hpp"
#include "eegsel/objectives.hpp"
#include "eegsel/signal.hpp"

namespace eegsel {

/// Accuracy of the classification pipeline restricted to a channel subset.
using SubsetScorer = std::function<double(const TrialSet&, std::span<const std::size_t>)>;

struct RankedChannel {
    std::size_t channel = 0;
    double accuracy = 0.0;
};

struct GreedyStep {
    std::size_t channel = 0;
    std::vector<std::size_t> subset;  // in order of addition
    double accuracy = 0.0;
};

struct GreedyTrace {
    std::vector<RankedChannel> ranked_channels;
    std::vector<GreedyStep> steps;
    ChannelMask final_subset;

    /// Columns: step,channel,accuracy.
    void write_csv(std::ostream& os, std::span<const std::string> channel_names = {}) const {
        os << "step,channel,accuracy\n";
        for (std::size_t i = 0; i < steps.size(); ++i) {
            os << i << ',';
            if (steps[i].channel < channel_names.size()) {
                os << channel_names[steps[i].channel];
            } else {
                os << steps[i].channel;
            }
            os << ',' << format_number(steps[i].accuracy) << '\n';
        }
    }
};

namespace detail {

inline void check_greedy_input(const TrialSet& trials) {
    if (trials.n_channels() == 0) throw ConfigError("no channels to rank");
    if (trials.count_label(0) < 2 || trials.count_label(1) < 2) throw DataError("each class needs at least two trials");
}

}  // namespace detail

/// Channels sorted by single-channel accuracy, descending; ties by index.
inline std::vector<RankedChannel> rank_single_channels(const TrialSet& trials, const SubsetScorer& eval) {
    detail::check_greedy_input(trials);
    std::vector<RankedChannel> ranked;
    for (std::size_t c = 0; c < trials.n_channels(); ++c) {
        const std::size_t one[] = {c};
        ranked.push_back({c, eval(trials, one)});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedChannel& a, const RankedChannel& b) { return a.accuracy > b.accuracy; });
    return ranked;
}

/// Forward selection from the top-ranked channel. A step is accepted when
/// the best candidate improves on the current accuracy, or matches it and
/// the previous step was not itself a plateau.
inline GreedyTrace greedy_select(const TrialSet& trials, const SubsetScorer& eval, std::size_t max_channels = 16) {
    if (max_channels < 1) throw ConfigError("max_channels must be at least 1");
    GreedyTrace trace;
    trace.ranked_channels = rank_single_channels(trials, eval);
    const std::size_t n = trials.n_channels();
    std::vector<std::size_t> subset = {trace.ranked_channels.front().channel};
    double best = trace.ranked_channels.front().accuracy;
    trace.steps.push_back({subset.front(), subset, best});
    std::vector<bool> in(n, false);
    in[subset.front()] = true;
    bool plateau = false;
    const std::size_t limit = std::min(max_channels, n);
    while (subset.size() < limit) {
        std::size_t pick = n;
        double pick_acc = -1.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (in[c]) continue;
            auto trial_subset = subset;
            trial_subset.push_back(c);
            std::sort(trial_subset.begin(), trial_subset.end());
            const double acc = eval(trials, trial_subset);
            if (acc > pick_acc) {
                pick_acc = acc;
                pick = c;
            }
        }
        if (pick_acc > best) {
            plateau = false;
        } else if (pick_acc == best && !plateau) {
            plateau = true;
        } else {
            break;
        }
        best = pick_acc;
        subset.push_back(pick);
        in[pick] = true;
        trace.steps.push_back({pick, subset, best});
    }
    trace.final_subset = ChannelMask::from_indices(n, subset);
    return trace;
}

/// Scorer backed by stratified k-fold CV of the selected-feature pipeline
/// over `trials` of a precomputed bank. The TrialSet argument only fixes the
/// channel space and must match the bank.
inline SubsetScorer make_cv_scorer(std::shared_ptr<const FeatureBank> bank, std::vector<std::size_t> trials,
                                   PipelineConfig cfg = {}, std::uint64_t seed = 0) {
    return [bank = std::move(bank), trials = std::move(trials), cfg, seed](const TrialSet& ts,
                                                                          std::span<const std::size_t> channels) {
        if (ts.n_channels() != bank->n_channels) throw ConfigError("scorer bank does not match trial set");
        return cv_accuracy(*bank, trials, channels, cfg, seed);
    };
}

}  // namespace eegsel
