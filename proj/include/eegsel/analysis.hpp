#pragma once

// Final-subset rule, selection-frequency topography data, convergence/result
// CSV emission and one-way ANOVA across methods.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include "eegsel/common.hpp"
#include "eegsel/montage.hpp"
#include "eegsel/objectives.hpp"
#include "eegsel/optimizers.hpp"

namespace eegsel {

struct CandidateResult {
    ChannelMask mask;
    ObjectiveVector objectives;
    double acc_all = 0.0;  // held-out test accuracy, all features
    double acc_sel = 0.0;  // held-out test accuracy, mRMR-selected features
    double cv_sel = 0.0;   // training-split CV accuracy, mRMR-selected features
};

/// Which accuracy the final-subset rule ranks candidates by.
enum class RankBy { TestSelected, CvSelected };

struct RunResult {
    std::string subject;
    std::string algorithm;
    std::uint64_t seed = 0;
    std::vector<CandidateResult> candidates;
    std::size_t chosen = 0;

    [[nodiscard]] const CandidateResult& chosen_candidate() const { return candidates.at(chosen); }
    [[nodiscard]] std::size_t pr() const { return chosen_candidate().mask.popcount(); }
};

/// Among candidates containing any reference channel, the highest
/// selected-feature accuracy; without such a candidate, the global best.
/// Ties prefer the smaller popcount, then the earlier position in the list.
inline std::size_t choose_final_subset(std::span<const CandidateResult> candidates,
                                       std::span<const std::size_t> ref_channels,
                                       RankBy rank_by = RankBy::TestSelected) {
    auto score = [rank_by](const CandidateResult& c) { return rank_by == RankBy::CvSelected ? c.cv_sel : c.acc_sel; };
    if (candidates.empty()) throw ConfigError("no candidate subsets to choose from");
    auto has_ref = [&](const CandidateResult& c) {
        return std::any_of(ref_channels.begin(), ref_channels.end(),
                           [&](std::size_t r) { return r < c.mask.size() && c.mask.test(r); });
    };
    const bool any_ref = std::any_of(candidates.begin(), candidates.end(), has_ref);
    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (any_ref && !has_ref(candidates[i])) continue;
        if (best == candidates.size()) {
            best = i;
            continue;
        }
        const auto& a = candidates[i];
        const auto& b = candidates[best];
        if (score(a) > score(b) || (score(a) == score(b) && a.mask.popcount() < b.mask.popcount())) best = i;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Selection frequency

struct SelectionFrequency {
    std::vector<std::string> channels;
    std::vector<std::size_t> counts;

    void write_csv(std::ostream& os) const {
        os << "channel,count\n";
        for (std::size_t i = 0; i < channels.size(); ++i) os << channels[i] << ',' << counts[i] << '\n';
    }
};

inline SelectionFrequency selection_frequency(std::span<const RunResult> results, const Montage& montage) {
    SelectionFrequency sf;
    sf.channels = montage.names();
    sf.counts.assign(montage.size(), 0);
    for (const auto& r : results) {
        const auto& mask = r.chosen_candidate().mask;
        if (mask.size() != montage.size()) throw ConfigError("result mask does not match montage size");
        for (auto i : mask.indices()) ++sf.counts[i];
    }
    return sf;
}

/// Azimuthal-equidistant projection of a unit-sphere position: the vertex
/// maps to the origin and distance from it equals the polar angle.
inline std::pair<double, double> project_azimuthal(const Vec3& p) {
    const double r = p.norm();
    if (r == 0.0) return {0.0, 0.0};
    const double polar = std::acos(std::clamp(p.z / r, -1.0, 1.0));
    const double horiz = std::hypot(p.x, p.y);
    if (horiz == 0.0) return {0.0, 0.0};
    return {polar * p.x / horiz, polar * p.y / horiz};
}

/// Scatter of projected electrodes, grey for zero counts and shades of red
/// scaling with the count.
inline void write_selection_svg(std::ostream& os, const SelectionFrequency& sf, const Montage& montage) {
    if (sf.counts.size() != montage.size()) throw ConfigError("frequency table does not match montage size");
    constexpr double size = 480.0, half = size / 2.0, scale = 150.0;
    const std::size_t max_count = sf.counts.empty() ? 0 : *std::max_element(sf.counts.begin(), sf.counts.end());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
       << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    os << "<circle cx=\"" << half << "\" cy=\"" << half << "\" r=\"" << format_number(scale * kPi / 2.0)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < montage.size(); ++i) {
        const auto [u, v] = project_azimuthal(montage[i].position);
        const double cx = half + scale * u, cy = half - scale * v;
        std::string fill = "#dddddd";
        if (sf.counts[i] > 0 && max_count > 0) {
            const double t = static_cast<double>(sf.counts[i]) / static_cast<double>(max_count);
            const int gb = static_cast<int>(std::lround(220.0 * (1.0 - t)));
            char buf[16];
            std::snprintf(buf, sizeof(buf), "#ff%02x%02x", gb, gb);
            fill = buf;
        }
        os << "<circle cx=\"" << format_number(cx) << "\" cy=\"" << format_number(cy) << "\" r=\"10\" fill=\"" << fill
           << "\" stroke=\"black\"><title>" << sf.channels[i] << ": " << sf.counts[i] << "</title></circle>\n";
        os << "<text x=\"" << format_number(cx) << "\" y=\"" << format_number(cy + 3.0)
           << "\" font-size=\"7\" text-anchor=\"middle\">" << sf.channels[i] << "</text>\n";
    }
    os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// CSV emission

inline void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows) {
    os << "generation,best_f1,best_f2,mean_f1,mean_f2\n";
    for (const auto& r : rows) {
        os << r.generation << ',' << format_number(r.best_f1) << ',' << format_number(r.best_f2) << ','
           << format_number(r.mean_f1) << ',' << format_number(r.mean_f2) << '\n';
    }
}

inline void write_results_csv(std::ostream& os, std::span<const RunResult> results) {
    os << "subject,algorithm,acc_all,acc_sel,pr\n";
    for (const auto& r : results) {
        const auto& c = r.chosen_candidate();
        os << r.subject << ',' << r.algorithm << ',' << format_number(c.acc_all) << ',' << format_number(c.acc_sel)
           << ',' << r.pr() << '\n';
    }
}

// ---------------------------------------------------------------------------
// One-way ANOVA

struct AnovaResult {
    double f = 0.0;
    double p = 1.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
};

inline AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw ConfigError("ANOVA needs at least two groups");
    std::size_t n = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw ConfigError("each ANOVA group needs at least two observations");
        for (double v : g) {
            if (!std::isfinite(v)) throw DataError("non-finite observation");
            grand += v;
        }
        n += g.size();
    }
    grand /= static_cast<double>(n);
    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        double m = 0.0;
        for (double v : g) m += v;
        m /= static_cast<double>(g.size());
        ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) ss_within += (v - m) * (v - m);
    }
    AnovaResult r;
    r.df_between = groups.size() - 1;
    r.df_within = n - groups.size();
    if (!(ss_within > 0.0)) throw DataError("zero within-group variance");
    r.f = (ss_between / static_cast<double>(r.df_between)) / (ss_within / static_cast<double>(r.df_within));
    // Rounding can leave a tiny nonzero between-group sum for identical groups.
    if (r.f < 1e-12) r.f = 0.0;
    const boost::math::fisher_f dist(static_cast<double>(r.df_between), static_cast<double>(r.df_within));
    r.p = r.f == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, r.f));
    return r;
}

}  // namespace eegsel
