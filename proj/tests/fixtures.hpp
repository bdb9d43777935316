#pragma once

// Synthetic inputs shared by unit tests and the acceptance run.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "eegsel/features.hpp"
#include "eegsel/objectives.hpp"

namespace fixture {

using namespace eegsel;

/// Two-channel white noise; class 0 has `contrast` times more variance on
/// channel 0, class 1 on channel 1.
inline TrialSet contrast_set(std::size_t per_class, double contrast, std::uint64_t seed, std::size_t n = 400) {
    TrialSet t(2 * per_class, 2, n, 160.0);
    Rng rng(seed);
    for (std::size_t k = 0; k < t.n_trials(); ++k) {
        const std::uint8_t y = k % 2 == 0 ? 0 : 1;
        t.labels()[k] = y;
        const double s0 = std::sqrt(y == 0 ? contrast : 1.0);
        const double s1 = std::sqrt(y == 0 ? 1.0 : contrast);
        for (auto& v : t.channel(k, 0)) v = s0 * rng.normal();
        for (auto& v : t.channel(k, 1)) v = s1 * rng.normal();
    }
    return t;
}

inline double variance(const std::vector<double>& x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

/// Mean variance of w^T x(t) per class, projecting the band-filtered signals
/// sample by sample.
inline std::array<double, 2> projected_class_variance(const TrialSet& t, Band band, const Eigen::RowVectorXd& w) {
    const auto filt = dsp::butterworth_bandpass(4, band.lo, band.hi, t.fs());
    std::array<double, 2> sum{0, 0};
    std::array<int, 2> cnt{0, 0};
    for (std::size_t k = 0; k < t.n_trials(); ++k) {
        std::vector<std::vector<double>> y;
        for (std::size_t c = 0; c < t.n_channels(); ++c) y.push_back(filt.filtfilt(t.channel(k, c), filtfilt_padlen(filt)));
        std::vector<double> proj(t.n_samples(), 0.0);
        for (std::size_t i = 0; i < t.n_samples(); ++i) {
            for (std::size_t c = 0; c < t.n_channels(); ++c) proj[i] += w(static_cast<Eigen::Index>(c)) * y[c][i];
        }
        sum[t.labels()[k]] += variance(proj);
        ++cnt[t.labels()[k]];
    }
    return {sum[0] / cnt[0], sum[1] / cnt[1]};
}

// Exhaustive mRMR: every step recomputes all MI terms from raw histograms.
inline double oracle_entropy_mi(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> j;
    std::map<int, double> pa, pb;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        j[{a[i], b[i]}] += 1.0 / n;
        pa[a[i]] += 1.0 / n;
        pb[b[i]] += 1.0 / n;
    }
    double mi = 0.0;
    for (auto& [k, p] : j) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
    return std::max(0.0, mi);
}

inline std::vector<int> oracle_bins(const std::vector<double>& x) {
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    std::vector<int> b(x.size(), 0);
    if (hi <= lo) return b;
    for (std::size_t i = 0; i < x.size(); ++i) b[i] = std::min(9, static_cast<int>(std::floor((x[i] - lo) / (hi - lo) * 10.0)));
    return b;
}

inline std::vector<std::size_t> oracle_mrmr(const FeatureMatrix& fm, const std::vector<std::uint8_t>& labels, std::size_t k) {
    std::vector<int> y(labels.begin(), labels.end());
    std::vector<std::size_t> picked;
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = 0;
        double best_score = -1e300;
        for (std::size_t c = 0; c < fm.cols; ++c) {
            if (std::find(picked.begin(), picked.end(), c) != picked.end()) continue;
            const auto bc = oracle_bins(fm.column(c));
            double score = oracle_entropy_mi(bc, y);
            if (!picked.empty()) {
                double red = 0.0;
                for (auto p : picked) red += oracle_entropy_mi(bc, oracle_bins(fm.column(p)));
                score -= red / static_cast<double>(picked.size());
            }
            if (score > best_score + 1e-12) {
                best_score = score;
                best = c;
            }
        }
        picked.push_back(best);
    }
    return picked;
}

inline std::vector<double> sine(std::size_t n, double f, double fs, double amp = 1.0, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * f * static_cast<double>(i) / fs + phase);
    return x;
}

/// Baseline of `w` white-noise samples followed by a scaled copy.
inline std::vector<double> scaled_copy_trial(std::size_t w, double scale, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(2 * w);
    for (std::size_t i = 0; i < w; ++i) x[i] = rng.normal();
    for (std::size_t i = 0; i < w; ++i) x[w + i] = scale * x[i];
    return x;
}

inline ObjectiveContext random_ctx(std::size_t n, std::size_t limit, std::uint64_t seed) {
    Rng rng(seed);
    ObjectiveContext ctx;
    for (std::size_t i = 0; i < n; ++i) {
        ctx.sp.push_back(rng.uniform(0.05, 1.0));
        ctx.disc.push_back(rng.uniform(0.0, 80.0));
    }
    ctx.max_channels = limit;
    return ctx;
}

}  // namespace fixture
