#pragma once

// Filter-bank CSP features, per-channel statistical/time-domain features and
// mRMR feature ranking.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegsel/common.hpp"
#include "eegsel/signal.hpp"

namespace eegsel {

struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

/// Nine 4 Hz bands tiling 4-40 Hz.
inline std::vector<Band> default_filter_bank() {
    std::vector<Band> bands;
    for (int k = 0; k < 9; ++k) bands.push_back({4.0 + 4.0 * k, 8.0 + 4.0 * k});
    return bands;
}

struct FeatureConfig {
    std::vector<Band> bands = default_filter_bank();
    int band_filter_order = 4;
    double shrinkage = 1e-4;
    double willison_threshold = 4.0;  // uV
    double ssc_threshold = 0.5;       // uV
    std::size_t entropy_bins = 50;
};

inline constexpr std::size_t kCspFiltersPerBand = 4;
inline constexpr std::size_t kStatFeatureCount = 19;
inline constexpr double kFeatureFloor = 1e-12;

inline const std::array<const char*, kStatFeatureCount>& stat_feature_names() {
    static const std::array<const char*, kStatFeatureCount> names = {
        "mean",        "std",          "variance",       "skewness",          "kurtosis",
        "entropy",     "hjorth_activity", "hjorth_mobility", "hjorth_complexity", "zero_crossing_rate",
        "willison_amplitude", "slope_sign_changes", "rms", "mean_abs",       "waveform_length",
        "peak_to_peak", "median",      "iqr",            "line_length_rate"};
    return names;
}

/// Rows are trials, columns are named features.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
    std::vector<std::string> names;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::vector<std::string> column_names)
        : rows(r), cols(column_names.size()), values(r * column_names.size(), 0.0), names(std::move(column_names)) {}

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }

    [[nodiscard]] std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows);
        for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
        return out;
    }

    [[nodiscard]] FeatureMatrix select_columns(std::span<const std::size_t> idx) const {
        std::vector<std::string> n;
        for (auto c : idx) n.push_back(names.at(c));
        FeatureMatrix out(rows, std::move(n));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < idx.size(); ++j) out.at(r, j) = at(r, idx[j]);
        }
        return out;
    }

    [[nodiscard]] FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
        FeatureMatrix out(idx.size(), names);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(idx[i] * cols), cols,
                        out.values.begin() + static_cast<std::ptrdiff_t>(i * cols));
        }
        return out;
    }

    /// Side-by-side concatenation; row counts must match.
    [[nodiscard]] FeatureMatrix hstack(const FeatureMatrix& other) const {
        if (rows != other.rows) throw ConfigError("cannot stack feature matrices with different row counts");
        auto n = names;
        n.insert(n.end(), other.names.begin(), other.names.end());
        FeatureMatrix out(rows, std::move(n));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = at(r, c);
            for (std::size_t c = 0; c < other.cols; ++c) out.at(r, cols + c) = other.at(r, c);
        }
        return out;
    }

    [[nodiscard]] bool all_finite() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }

    void write_csv(std::ostream& os) const {
        for (std::size_t c = 0; c < cols; ++c) os << (c ? "," : "") << names[c];
        os << '\n';
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) os << (c ? "," : "") << format_number(at(r, c));
            os << '\n';
        }
    }
};

// ---------------------------------------------------------------------------
// Statistical / time-domain features

namespace detail {

inline double quantile_sorted(const std::vector<double>& s, double q) {
    if (s.empty()) return 0.0;
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return s[lo] + frac * (s[hi] - s[lo]);
}

inline double variance_of(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

inline std::vector<double> diff(std::span<const double> x) {
    std::vector<double> d;
    if (x.size() < 2) return d;
    d.reserve(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] - x[i - 1]);
    return d;
}

inline double guarded_ratio(double num, double den) { return den > kFeatureFloor ? num / den : 0.0; }

}  // namespace detail

/// The 19 per-channel features, in the order of stat_feature_names().
/// Variances are population (1/n) moments; entropy is in nats over a
/// histogram spanning [min, max]; ZCR is crossings per sample pair.
inline std::array<double, kStatFeatureCount> channel_stat_features(std::span<const double> x, double fs,
                                                                  const FeatureConfig& cfg = {}) {
    std::array<double, kStatFeatureCount> f{};
    const std::size_t n = x.size();
    if (n == 0) return f;
    const double dn = static_cast<double>(n);

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= dn;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, sq = 0.0, abs_sum = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        sq += v * v;
        abs_sum += std::abs(v);
    }
    m2 /= dn;
    m3 /= dn;
    m4 /= dn;
    const double sd = std::sqrt(m2);

    double entropy = 0.0;
    const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx - mn > kFeatureFloor && cfg.entropy_bins > 1) {
        std::vector<std::size_t> hist(cfg.entropy_bins, 0);
        for (double v : x) {
            auto b = static_cast<std::size_t>((v - mn) / (mx - mn) * static_cast<double>(cfg.entropy_bins));
            ++hist[std::min(b, cfg.entropy_bins - 1)];
        }
        for (auto c : hist) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / dn;
            entropy -= p * std::log(p);
        }
    }

    const auto d1 = detail::diff(x);
    const auto d2 = detail::diff(d1);
    const double var_d1 = detail::variance_of(d1);
    const double var_d2 = detail::variance_of(d2);
    const double mobility = std::sqrt(detail::guarded_ratio(var_d1, m2));
    const double mobility_d1 = std::sqrt(detail::guarded_ratio(var_d2, var_d1));
    const double complexity = detail::guarded_ratio(mobility_d1, mobility);

    std::size_t zc = 0, wamp = 0, ssc = 0;
    double wl = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        if ((x[i - 1] < 0.0 && x[i] >= 0.0) || (x[i - 1] >= 0.0 && x[i] < 0.0)) {
            if (x[i - 1] != 0.0 || x[i] != 0.0) ++zc;
        }
        const double step = std::abs(x[i] - x[i - 1]);
        wl += step;
        if (step > cfg.willison_threshold) ++wamp;
        if (i + 1 < n && (x[i] - x[i - 1]) * (x[i] - x[i + 1]) > cfg.ssc_threshold) ++ssc;
    }

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());

    f[0] = mean;
    f[1] = sd;
    f[2] = m2;
    f[3] = detail::guarded_ratio(m3, sd * sd * sd);
    f[4] = m2 > kFeatureFloor ? m4 / (m2 * m2) - 3.0 : 0.0;
    f[5] = entropy;
    f[6] = m2;
    f[7] = mobility;
    f[8] = complexity;
    f[9] = n > 1 ? static_cast<double>(zc) / static_cast<double>(n - 1) : 0.0;
    f[10] = static_cast<double>(wamp);
    f[11] = static_cast<double>(ssc);
    f[12] = std::sqrt(sq / dn);
    f[13] = abs_sum / dn;
    f[14] = wl;
    f[15] = mx - mn;
    f[16] = detail::quantile_sorted(sorted, 0.5);
    f[17] = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
    f[18] = wl / (dn / fs);
    return f;
}

/// 19 columns per selected channel over each trial's activation window.
inline FeatureMatrix stat_features(const TrialSet& trials, std::span<const std::size_t> channels,
                                   const FeatureConfig& cfg = {}) {
    if (trials.n_trials() == 0) throw DataError("no trials for feature extraction");
    std::vector<std::string> names;
    for (auto c : channels) {
        for (const char* f : stat_feature_names()) names.push_back(trials.channel_names().at(c) + "_" + f);
    }
    FeatureMatrix fm(trials.n_trials(), std::move(names));
    const auto a = trials.activation().first_sample(trials.fs());
    const auto b = std::min(trials.activation().end_sample(trials.fs()), trials.n_samples());
    for (std::size_t t = 0; t < trials.n_trials(); ++t) {
        for (std::size_t j = 0; j < channels.size(); ++j) {
            const auto f = channel_stat_features(trials.channel(t, channels[j]).subspan(a, b - a), trials.fs(), cfg);
            for (std::size_t k = 0; k < kStatFeatureCount; ++k) fm.at(t, j * kStatFeatureCount + k) = f[k];
        }
    }
    return fm;
}

// ---------------------------------------------------------------------------
// Common spatial patterns

/// Per-band, per-trial spatial covariance X X^T of the band-filtered
/// activation window over all channels of a trial set.
struct BandCovariances {
    std::vector<Band> bands;
    std::vector<std::vector<Eigen::MatrixXd>> cov;  // [band][trial]
};

inline BandCovariances band_covariances(const TrialSet& trials, const FeatureConfig& cfg = {}) {
    BandCovariances out;
    out.bands = cfg.bands;
    const auto a = trials.activation().first_sample(trials.fs());
    const auto b = std::min(trials.activation().end_sample(trials.fs()), trials.n_samples());
    const auto len = static_cast<Eigen::Index>(b - a);
    const auto nc = static_cast<Eigen::Index>(trials.n_channels());
    for (const auto& band : cfg.bands) {
        const auto filt = dsp::butterworth_bandpass(cfg.band_filter_order, band.lo, band.hi, trials.fs());
        const auto pad = filtfilt_padlen(filt);
        std::vector<Eigen::MatrixXd> per_trial;
        per_trial.reserve(trials.n_trials());
        Eigen::MatrixXd x(nc, len);
        for (std::size_t t = 0; t < trials.n_trials(); ++t) {
            for (Eigen::Index c = 0; c < nc; ++c) {
                const auto y = filt.filtfilt(trials.channel(t, static_cast<std::size_t>(c)), pad);
                for (Eigen::Index i = 0; i < len; ++i) x(c, i) = y[a + static_cast<std::size_t>(i)];
            }
            Eigen::MatrixXd c(nc, nc);
            c.setZero();
            c.selfadjointView<Eigen::Lower>().rankUpdate(x);
            per_trial.push_back(c.selfadjointView<Eigen::Lower>());
        }
        out.cov.push_back(std::move(per_trial));
    }
    return out;
}

namespace detail {

inline Eigen::MatrixXd sub_cov(const Eigen::MatrixXd& full, std::span<const std::size_t> ch) {
    const auto d = static_cast<Eigen::Index>(ch.size());
    Eigen::MatrixXd s(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) s(i, j) = full(static_cast<Eigen::Index>(ch[i]), static_cast<Eigen::Index>(ch[j]));
    }
    return s;
}

inline void shrink(Eigen::MatrixXd& s, double gamma) {
    const double mu = s.trace() / static_cast<double>(s.rows());
    s *= (1.0 - gamma);
    s.diagonal().array() += gamma * mu;
}

}  // namespace detail

struct CspBandModel {
    Band band;
    Eigen::MatrixXd filters;      // kCspFiltersPerBand x n_channels, rows are w^T
    Eigen::VectorXd eigenvalues;  // all generalized eigenvalues, descending
    Eigen::VectorXd selected;     // eigenvalues of the kept filters
};

struct CspModel {
    std::vector<std::size_t> channels;  // indices into the covariance source
    std::vector<CspBandModel> bands;
};

/// Spatial filters for one band from per-trial covariances: solves
/// S0 w = lambda (S0 + S1) w with S_c the shrunk mean trace-normalized class
/// covariance, keeping the two largest and two smallest eigenvalues.
/// Filters satisfy w^T (S0 + S1) w = 1.
inline CspBandModel fit_csp_band(const std::vector<Eigen::MatrixXd>& cov, std::span<const std::uint8_t> labels,
                                 std::span<const std::size_t> trials, std::span<const std::size_t> channels,
                                 Band band, double shrinkage) {
    if (channels.size() < 2) throw ConfigError("CSP needs at least two channels");
    const auto d = static_cast<Eigen::Index>(channels.size());
    std::array<Eigen::MatrixXd, 2> mean{Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d)};
    std::array<std::size_t, 2> count{0, 0};
    for (auto t : trials) {
        const auto y = labels[t];
        Eigen::MatrixXd s = detail::sub_cov(cov[t], channels);
        const double tr = s.trace();
        if (tr > kFeatureFloor) s /= tr;
        mean[y] += s;
        ++count[y];
    }
    if (count[0] == 0 || count[1] == 0) throw DataError("CSP needs trials from both classes");
    for (int c = 0; c < 2; ++c) {
        mean[c] /= static_cast<double>(count[c]);
        detail::shrink(mean[c], shrinkage);
    }
    const Eigen::MatrixXd composite = mean[0] + mean[1];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(mean[0], composite);
    if (solver.info() != Eigen::Success) throw DataError("CSP eigen decomposition failed");
    // Eigen returns ascending eigenvalues.
    const Eigen::VectorXd ev = solver.eigenvalues().reverse();
    const Eigen::MatrixXd vec = solver.eigenvectors().rowwise().reverse();

    CspBandModel model;
    model.band = band;
    model.eigenvalues = ev;
    const std::array<Eigen::Index, kCspFiltersPerBand> pick = {0, 1, d - 2, d - 1};
    model.filters.resize(static_cast<Eigen::Index>(kCspFiltersPerBand), d);
    model.selected.resize(static_cast<Eigen::Index>(kCspFiltersPerBand));
    for (std::size_t k = 0; k < kCspFiltersPerBand; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        model.filters.row(i) = vec.col(pick[k]).transpose();
        model.selected(i) = ev(pick[k]);
    }
    return model;
}

inline CspModel fit_csp(const BandCovariances& covs, std::span<const std::uint8_t> labels,
                        std::span<const std::size_t> trials, std::span<const std::size_t> channels,
                        const FeatureConfig& cfg = {}) {
    CspModel model;
    model.channels.assign(channels.begin(), channels.end());
    for (std::size_t b = 0; b < covs.bands.size(); ++b) {
        model.bands.push_back(fit_csp_band(covs.cov[b], labels, trials, channels, covs.bands[b], cfg.shrinkage));
    }
    return model;
}

/// Single-band CSP fit directly on a trial set (all channels, all trials).
inline CspBandModel fit_csp(const TrialSet& trials, Band band, const FeatureConfig& cfg = {}) {
    FeatureConfig one = cfg;
    one.bands = {band};
    const auto covs = band_covariances(trials, one);
    std::vector<std::size_t> all_trials(trials.n_trials()), all_channels(trials.n_channels());
    std::iota(all_trials.begin(), all_trials.end(), 0);
    std::iota(all_channels.begin(), all_channels.end(), 0);
    return fit_csp_band(covs.cov[0], trials.labels(), all_trials, all_channels, band, cfg.shrinkage);
}

/// log(v_k / sum_j v_j) of the projected variances within each band.
inline FeatureMatrix csp_features(const CspModel& model, const BandCovariances& covs,
                                  std::span<const std::size_t> trials) {
    std::vector<std::string> names;
    for (std::size_t b = 0; b < model.bands.size(); ++b) {
        for (std::size_t k = 0; k < kCspFiltersPerBand; ++k) {
            names.push_back("csp_b" + std::to_string(b) + "_f" + std::to_string(k));
        }
    }
    FeatureMatrix fm(trials.size(), std::move(names));
    for (std::size_t b = 0; b < model.bands.size(); ++b) {
        const auto& w = model.bands[b].filters;
        for (std::size_t r = 0; r < trials.size(); ++r) {
            const Eigen::MatrixXd s = detail::sub_cov(covs.cov[b][trials[r]], model.channels);
            const Eigen::VectorXd v = (w * s * w.transpose()).diagonal().cwiseMax(kFeatureFloor);
            const double total = v.sum();
            for (std::size_t k = 0; k < kCspFiltersPerBand; ++k) {
                fm.at(r, b * kCspFiltersPerBand + k) = std::log(v(static_cast<Eigen::Index>(k)) / total);
            }
        }
    }
    return fm;
}

// ---------------------------------------------------------------------------
// Precomputed per-trial quantities for repeated subset evaluation

/// Everything about a trial set that does not depend on which trials are
/// used for fitting: band covariances over all channels and the per-channel
/// statistical features.
struct FeatureBank {
    FeatureConfig config;
    BandCovariances covs;
    std::vector<std::array<double, kStatFeatureCount>> stats;  // [trial * n_channels + channel]
    std::vector<std::string> channel_names;
    std::vector<std::uint8_t> labels;
    std::size_t n_trials = 0;
    std::size_t n_channels = 0;
};

inline FeatureBank build_feature_bank(const TrialSet& trials, const FeatureConfig& cfg = {}) {
    trials.validate();
    FeatureBank bank;
    bank.config = cfg;
    bank.covs = band_covariances(trials, cfg);
    bank.channel_names = trials.channel_names();
    bank.labels = trials.labels();
    bank.n_trials = trials.n_trials();
    bank.n_channels = trials.n_channels();
    const auto a = trials.activation().first_sample(trials.fs());
    const auto b = std::min(trials.activation().end_sample(trials.fs()), trials.n_samples());
    bank.stats.reserve(bank.n_trials * bank.n_channels);
    for (std::size_t t = 0; t < bank.n_trials; ++t) {
        for (std::size_t c = 0; c < bank.n_channels; ++c) {
            bank.stats.push_back(channel_stat_features(trials.channel(t, c).subspan(a, b - a), trials.fs(), cfg));
        }
    }
    return bank;
}

/// Feature rows for `rows` with CSP fitted on `fit_trials`. A single channel
/// has no CSP block, so only its 19 statistical columns are produced.
inline FeatureMatrix extract_features(const FeatureBank& bank, std::span<const std::size_t> fit_trials,
                                      std::span<const std::size_t> channels, std::span<const std::size_t> rows) {
    if (channels.empty()) throw ConfigError("empty channel subset");
    std::vector<std::string> names;
    for (auto c : channels) {
        for (const char* f : stat_feature_names()) names.push_back(bank.channel_names.at(c) + "_" + f);
    }
    FeatureMatrix stat(rows.size(), std::move(names));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t j = 0; j < channels.size(); ++j) {
            const auto& f = bank.stats[rows[r] * bank.n_channels + channels[j]];
            std::copy(f.begin(), f.end(), stat.values.begin() + static_cast<std::ptrdiff_t>(r * stat.cols + j * kStatFeatureCount));
        }
    }
    if (channels.size() < 2) return stat;
    const auto model = fit_csp(bank.covs, bank.labels, fit_trials, channels, bank.config);
    return csp_features(model, bank.covs, rows).hstack(stat);
}

// ---------------------------------------------------------------------------
// mRMR

struct MrmrSelection {
    std::vector<std::size_t> indices;  // selection order
    std::vector<double> relevance;     // I(f; label) of each pick
    std::vector<double> redundancy;    // mean I(f; picked) at pick time
};

inline constexpr std::size_t kMiBins = 10;

/// Equal-width bin index per value over [min, max]; constant columns map to 0.
inline std::vector<std::uint8_t> discretize(std::span<const double> x, std::size_t bins = kMiBins) {
    std::vector<std::uint8_t> out(x.size(), 0);
    if (x.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, range = *hi_it - *lo_it;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto b = static_cast<std::size_t>((x[i] - lo) / range * static_cast<double>(bins));
        out[i] = static_cast<std::uint8_t>(std::min(b, bins - 1));
    }
    return out;
}

/// Plug-in mutual information (nats) of two discrete sequences.
inline double mutual_information(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                                 std::size_t bins_a = kMiBins, std::size_t bins_b = kMiBins) {
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    std::vector<double> joint(bins_a * bins_b, 0.0), pa(bins_a, 0.0), pb(bins_b, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        joint[a[i] * bins_b + b[i]] += 1.0;
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
    }
    const double dn = static_cast<double>(n);
    double mi = 0.0;
    for (std::size_t i = 0; i < bins_a; ++i) {
        for (std::size_t j = 0; j < bins_b; ++j) {
            const double pij = joint[i * bins_b + j];
            if (pij == 0.0) continue;
            mi += pij / dn * std::log(pij * dn / (pa[i] * pb[j]));
        }
    }
    return std::max(0.0, mi);
}

/// Greedy mRMR (difference form): first pick maximizes I(f; y), later picks
/// maximize I(f; y) minus the mean I(f; g) over already picked g. Ties go to
/// the lower column index.
inline MrmrSelection mrmr_select(const FeatureMatrix& fm, std::span<const std::uint8_t> labels, std::size_t k = 10) {
    if (k > fm.cols) throw ConfigError("mRMR asked for more features than columns");
    if (labels.size() != fm.rows) throw ConfigError("label count does not match feature rows");
    if (std::find(labels.begin(), labels.end(), 0) == labels.end() ||
        std::find(labels.begin(), labels.end(), 1) == labels.end())
        throw DataError("mRMR needs both classes");

    std::vector<std::vector<std::uint8_t>> disc(fm.cols);
    std::vector<double> rel(fm.cols);
    for (std::size_t c = 0; c < fm.cols; ++c) {
        disc[c] = discretize(fm.column(c));
        rel[c] = mutual_information(disc[c], labels, kMiBins, 2);
    }
    MrmrSelection sel;
    std::vector<double> red_sum(fm.cols, 0.0);
    std::vector<bool> taken(fm.cols, false);
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = fm.cols;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < fm.cols; ++c) {
            if (taken[c]) continue;
            const double red = step == 0 ? 0.0 : red_sum[c] / static_cast<double>(step);
            const double score = rel[c] - red;
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        taken[best] = true;
        sel.indices.push_back(best);
        sel.relevance.push_back(rel[best]);
        sel.redundancy.push_back(step == 0 ? 0.0 : red_sum[best] / static_cast<double>(step));
        for (std::size_t c = 0; c < fm.cols; ++c) {
            if (!taken[c]) red_sum[c] += mutual_information(disc[c], disc[best]);
        }
    }
    return sel;
}

}  // namespace eegsel
