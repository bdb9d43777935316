#pragma once

// Epoched EEG container, preprocessing, Welch spectra and per-trial
// intratrial task-related desynchronisation (ITTRD).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eegsel/common.hpp"
#include "eegsel/dsp.hpp"

namespace eegsel {

/// Half-open time window [start_s, end_s) relative to trial start.
struct TimeWindow {
    double start_s = 0.0;
    double end_s = 0.0;

    [[nodiscard]] std::size_t first_sample(double fs) const {
        return static_cast<std::size_t>(std::llround(start_s * fs));
    }
    [[nodiscard]] std::size_t end_sample(double fs) const {
        return static_cast<std::size_t>(std::llround(end_s * fs));
    }
    [[nodiscard]] std::size_t length(double fs) const { return end_sample(fs) - first_sample(fs); }

    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Trials x channels x samples, stored trial-major then channel-major.
class TrialSet {
public:
    TrialSet() = default;

    TrialSet(std::size_t n_trials, std::size_t n_channels, std::size_t n_samples, double fs)
        : n_trials_(n_trials),
          n_channels_(n_channels),
          n_samples_(n_samples),
          fs_(fs),
          data_(n_trials * n_channels * n_samples, 0.0),
          labels_(n_trials, 0) {
        channel_names_.reserve(n_channels);
        for (std::size_t c = 0; c < n_channels; ++c) channel_names_.push_back("ch" + std::to_string(c));
        activation_ = {0.0, duration()};
    }

    [[nodiscard]] std::size_t n_trials() const { return n_trials_; }
    [[nodiscard]] std::size_t n_channels() const { return n_channels_; }
    [[nodiscard]] std::size_t n_samples() const { return n_samples_; }
    [[nodiscard]] double fs() const { return fs_; }
    [[nodiscard]] double duration() const { return fs_ > 0.0 ? static_cast<double>(n_samples_) / fs_ : 0.0; }

    [[nodiscard]] std::span<const double> channel(std::size_t trial, std::size_t ch) const {
        return {data_.data() + offset(trial, ch), n_samples_};
    }
    [[nodiscard]] std::span<double> channel(std::size_t trial, std::size_t ch) {
        return {data_.data() + offset(trial, ch), n_samples_};
    }

    [[nodiscard]] const std::vector<double>& data() const { return data_; }
    [[nodiscard]] std::vector<double>& data() { return data_; }

    [[nodiscard]] const std::vector<std::uint8_t>& labels() const { return labels_; }
    [[nodiscard]] std::vector<std::uint8_t>& labels() { return labels_; }

    [[nodiscard]] const std::vector<std::string>& channel_names() const { return channel_names_; }
    void set_channel_names(std::vector<std::string> names) {
        if (names.size() != n_channels_) throw DataError("channel name count does not match channel count");
        channel_names_ = std::move(names);
    }

    [[nodiscard]] const TimeWindow& baseline() const { return baseline_; }
    [[nodiscard]] const TimeWindow& activation() const { return activation_; }
    void set_windows(TimeWindow baseline, TimeWindow activation) {
        baseline_ = baseline;
        activation_ = activation;
    }

    [[nodiscard]] std::size_t count_label(std::uint8_t label) const {
        return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
    }

    /// Throws DataError when shape, labels or windows are inconsistent.
    void validate() const {
        if (data_.size() != n_trials_ * n_channels_ * n_samples_) throw DataError("trial data size mismatch");
        if (labels_.size() != n_trials_) throw DataError("label count mismatch");
        for (auto l : labels_) {
            if (l > 1) throw DataError("labels must be 0 or 1");
        }
        if (!(fs_ > 0.0)) throw DataError("sampling rate must be positive");
        const double dur = duration();
        const double slack = 0.5 / fs_;
        auto inside = [&](const TimeWindow& w) {
            return w.start_s >= -slack && w.end_s <= dur + slack && w.start_s < w.end_s;
        };
        if (!inside(baseline_) && !(baseline_.start_s == 0.0 && baseline_.end_s == 0.0))
            throw DataError("baseline window outside trial");
        if (!inside(activation_)) throw DataError("activation window outside trial");
        if (baseline_.end_s > baseline_.start_s && baseline_.end_s > activation_.start_s + slack)
            throw DataError("baseline window must precede activation window");
    }

    [[nodiscard]] TrialSet select_trials(std::span<const std::size_t> idx) const {
        TrialSet out = empty_like(idx.size(), n_channels_);
        out.channel_names_ = channel_names_;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto src = idx[i];
            if (src >= n_trials_) throw ConfigError("trial index out of range");
            std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(offset(src, 0)), n_channels_ * n_samples_,
                        out.data_.begin() + static_cast<std::ptrdiff_t>(out.offset(i, 0)));
            out.labels_[i] = labels_[src];
        }
        return out;
    }

    [[nodiscard]] TrialSet select_channels(std::span<const std::size_t> idx) const {
        TrialSet out = empty_like(n_trials_, idx.size());
        out.labels_ = labels_;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (idx[j] >= n_channels_) throw ConfigError("channel index out of range");
            out.channel_names_[j] = channel_names_[idx[j]];
        }
        for (std::size_t t = 0; t < n_trials_; ++t) {
            for (std::size_t j = 0; j < idx.size(); ++j) {
                auto src = channel(t, idx[j]);
                std::copy(src.begin(), src.end(), out.channel(t, j).begin());
            }
        }
        return out;
    }

    friend bool operator==(const TrialSet&, const TrialSet&) = default;

private:
    [[nodiscard]] std::size_t offset(std::size_t trial, std::size_t ch) const {
        return (trial * n_channels_ + ch) * n_samples_;
    }

    [[nodiscard]] TrialSet empty_like(std::size_t n_trials, std::size_t n_channels) const {
        TrialSet out(n_trials, n_channels, n_samples_, fs_);
        out.baseline_ = baseline_;
        out.activation_ = activation_;
        return out;
    }

    std::size_t n_trials_ = 0;
    std::size_t n_channels_ = 0;
    std::size_t n_samples_ = 0;
    double fs_ = 0.0;
    std::vector<double> data_;
    std::vector<std::uint8_t> labels_;
    std::vector<std::string> channel_names_;
    TimeWindow baseline_{};
    TimeWindow activation_{};
};

enum class WindowKind { Hamming, Rectangular };

struct WelchConfig {
    std::size_t segment_len = 256;  // upper bound; clipped to the analysed window length
    double overlap = 0.5;
    WindowKind window = WindowKind::Hamming;
    double band_lo = 8.0;
    double band_hi = 30.0;
};

struct BandpassConfig {
    int order = 5;
    double f_lo = 4.0;
    double f_hi = 40.0;
};

struct PowerSpectrum {
    std::vector<double> freqs;  // Hz
    std::vector<double> power;  // density, units^2 / Hz

    [[nodiscard]] double bin_width() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }

    [[nodiscard]] double integrate() const {
        double s = 0.0;
        for (double p : power) s += p;
        return s * bin_width();
    }

    /// Mean density over bins with lo <= f <= hi.
    [[nodiscard]] double mean_band_power(double lo, double hi) const {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t k = 0; k < freqs.size(); ++k) {
            if (freqs[k] >= lo && freqs[k] <= hi) {
                s += power[k];
                ++n;
            }
        }
        if (n == 0) throw ConfigError("no spectral bins inside the requested band");
        return s / static_cast<double>(n);
    }
};

/// Edge padding used by zero-phase filtering: three times the transfer
/// function order of the designed filter.
inline std::size_t filtfilt_padlen(const dsp::SosFilter& f) { return 3 * f.order(); }

inline TrialSet bandpass(const TrialSet& trials, const BandpassConfig& cfg) {
    const auto filt = dsp::butterworth_bandpass(cfg.order, cfg.f_lo, cfg.f_hi, trials.fs());
    const auto pad = filtfilt_padlen(filt);
    TrialSet out = trials;
    for (std::size_t t = 0; t < trials.n_trials(); ++t) {
        for (std::size_t c = 0; c < trials.n_channels(); ++c) {
            auto y = filt.filtfilt(trials.channel(t, c), pad);
            std::copy(y.begin(), y.end(), out.channel(t, c).begin());
        }
    }
    return out;
}

/// Per-channel mean over `window` across all trials.
inline std::vector<double> channel_means(const TrialSet& trials, const TimeWindow& window) {
    const auto a = std::min(window.first_sample(trials.fs()), trials.n_samples());
    const auto b = std::min(window.end_sample(trials.fs()), trials.n_samples());
    std::vector<double> mean(trials.n_channels(), 0.0);
    if (b <= a || trials.n_trials() == 0) return mean;
    for (std::size_t c = 0; c < trials.n_channels(); ++c) {
        double s = 0.0;
        for (std::size_t t = 0; t < trials.n_trials(); ++t) {
            auto x = trials.channel(t, c);
            for (std::size_t i = a; i < b; ++i) s += x[i];
        }
        mean[c] = s / static_cast<double>((b - a) * trials.n_trials());
    }
    return mean;
}

inline TrialSet baseline_correct(const TrialSet& trials, std::span<const double> reference_mean) {
    if (reference_mean.size() != trials.n_channels()) throw ConfigError("reference mean length mismatch");
    TrialSet out = trials;
    for (std::size_t t = 0; t < trials.n_trials(); ++t) {
        for (std::size_t c = 0; c < trials.n_channels(); ++c) {
            for (double& v : out.channel(t, c)) v -= reference_mean[c];
        }
    }
    return out;
}

namespace detail {

inline std::vector<double> taper(std::size_t n, WindowKind kind) {
    std::vector<double> w(n, 1.0);
    if (kind == WindowKind::Hamming) {
        // periodic Hamming, the usual choice for spectral estimation
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
        }
    }
    return w;
}

}  // namespace detail

/// One-sided Welch power spectral density: mean of tapered periodograms over
/// segments of cfg.segment_len samples with the configured overlap, scaled
/// so the spectrum integrates to the signal variance.
inline PowerSpectrum welch_psd(std::span<const double> x, double fs, const WelchConfig& cfg) {
    const std::size_t seg = cfg.segment_len;
    if (seg < 8) throw ConfigError("Welch segment length must be >= 8");
    if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0)) throw ConfigError("Welch overlap must be in [0, 1)");
    if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
    if (x.size() < seg) throw DataError("signal shorter than Welch segment");

    const auto w = detail::taper(seg, cfg.window);
    double wpow = 0.0;
    for (double v : w) wpow += v * v;
    const std::size_t hop =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(seg) * (1.0 - cfg.overlap))));

    const std::size_t nbins = seg / 2 + 1;
    PowerSpectrum ps;
    ps.freqs.resize(nbins);
    ps.power.assign(nbins, 0.0);
    for (std::size_t k = 0; k < nbins; ++k) ps.freqs[k] = fs * static_cast<double>(k) / static_cast<double>(seg);

    std::vector<double> buf(seg);
    std::size_t n_seg = 0;
    for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
        for (std::size_t i = 0; i < seg; ++i) buf[i] = w[i] * x[start + i];
        const auto p = dsp::power_spectrum_raw(buf);
        for (std::size_t k = 0; k < nbins; ++k) ps.power[k] += p[k];
        ++n_seg;
    }
    const double scale = 1.0 / (fs * wpow * static_cast<double>(n_seg));
    for (std::size_t k = 0; k < nbins; ++k) {
        const bool edge = (k == 0) || (seg % 2 == 0 && k == nbins - 1);
        ps.power[k] *= scale * (edge ? 1.0 : 2.0);
    }
    return ps;
}

/// Floor below which baseline band power is treated as degenerate.
inline constexpr double kBaselinePowerFloor = 1e-12;

/// Mean band power of x[window], segment length clipped to the window length.
inline double window_band_power(std::span<const double> x, double fs, const TimeWindow& window,
                                const WelchConfig& cfg) {
    const auto a = window.first_sample(fs);
    const auto b = std::min(window.end_sample(fs), x.size());
    if (b <= a) throw DataError("empty analysis window");
    const auto seg_x = x.subspan(a, b - a);
    WelchConfig local = cfg;
    local.segment_len = std::min(cfg.segment_len, seg_x.size());
    return welch_psd(seg_x, fs, local).mean_band_power(cfg.band_lo, cfg.band_hi);
}

/// Percentage change in band power from baseline to activation. Returns
/// nullopt when baseline power is below kBaselinePowerFloor.
inline std::optional<double> ittrd(std::span<const double> x, double fs, const TimeWindow& baseline,
                                   const TimeWindow& activation, const WelchConfig& cfg) {
    const double p_base = window_band_power(x, fs, baseline, cfg);
    const double p_act = window_band_power(x, fs, activation, cfg);
    if (!(p_base >= kBaselinePowerFloor)) return std::nullopt;
    return 100.0 * (p_act - p_base) / p_base;
}

struct IttrdMatrix {
    std::size_t n_trials = 0;
    std::size_t n_channels = 0;
    std::vector<double> values;            // trial-major; 0 where degenerate
    std::vector<std::uint8_t> degenerate;  // 1 where baseline power was degenerate

    [[nodiscard]] double at(std::size_t trial, std::size_t ch) const { return values[trial * n_channels + ch]; }
    [[nodiscard]] bool is_degenerate(std::size_t trial, std::size_t ch) const {
        return degenerate[trial * n_channels + ch] != 0;
    }
};

inline IttrdMatrix ittrd_matrix(const TrialSet& trials, const WelchConfig& cfg) {
    IttrdMatrix m;
    m.n_trials = trials.n_trials();
    m.n_channels = trials.n_channels();
    m.values.assign(m.n_trials * m.n_channels, 0.0);
    m.degenerate.assign(m.n_trials * m.n_channels, 0);
    for (std::size_t t = 0; t < m.n_trials; ++t) {
        for (std::size_t c = 0; c < m.n_channels; ++c) {
            auto v = ittrd(trials.channel(t, c), trials.fs(), trials.baseline(), trials.activation(), cfg);
            if (v) {
                m.values[t * m.n_channels + c] = *v;
            } else {
                m.degenerate[t * m.n_channels + c] = 1;
            }
        }
    }
    return m;
}

}  // namespace eegsel
