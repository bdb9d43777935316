#pragma once

// Two-class synthetic motor-imagery trials with a known band-power drop on
// chosen channels.

#include <cmath>
#include <string>
#include <vector>

#include "eegsel/common.hpp"
#include "eegsel/montage.hpp"
#include "eegsel/signal.hpp"

namespace eegsel {

struct SynthConfig {
    std::size_t trials_per_class = 100;
    std::vector<std::string> signal_channels = {"FC3", "C5", "C3", "C1", "CP3", "FC4", "C2", "C4", "C6", "CP4"};
    double erd_depth = 0.5;
    double snr = 2.0;  // oscillation RMS over background RMS
    double mu_hz = 10.0;
    double amplitude_jitter = 0.1;
    double fs = 160.0;
    double duration_s = 4.5;
    TimeWindow baseline{0.0, 0.5};
    TimeWindow activation{0.5, 4.5};
    std::uint64_t seed = 0;
};

namespace detail {

/// Kellet's pink-noise filter bank driven by unit white noise.
class PinkNoise {
public:
    double next(Rng& rng) {
        const double w = rng.normal();
        b_[0] = 0.99886 * b_[0] + w * 0.0555179;
        b_[1] = 0.99332 * b_[1] + w * 0.0750759;
        b_[2] = 0.96900 * b_[2] + w * 0.1538520;
        b_[3] = 0.86650 * b_[3] + w * 0.3104856;
        b_[4] = 0.55000 * b_[4] + w * 0.5329522;
        b_[5] = -0.7616 * b_[5] - w * 0.0168980;
        const double out = b_[0] + b_[1] + b_[2] + b_[3] + b_[4] + b_[5] + b_[6] + w * 0.5362;
        b_[6] = w * 0.115926;
        return out / stationary_sd();
    }

    /// Stationary output standard deviation from the impulse response.
    static double stationary_sd() {
        static const double sd = [] {
            constexpr double a[6] = {0.99886, 0.99332, 0.96900, 0.86650, 0.55000, -0.7616};
            constexpr double g[6] = {0.0555179, 0.0750759, 0.1538520, 0.3104856, 0.5329522, -0.0168980};
            double var = 0.0;
            double pw[6] = {1, 1, 1, 1, 1, 1};
            for (int j = 0; j < 40000; ++j) {
                double h = 0.0;
                for (int k = 0; k < 6; ++k) {
                    h += g[k] * pw[k];
                    pw[k] *= a[k];
                }
                if (j == 0) h += 0.5362;
                if (j == 1) h += 0.115926;
                var += h * h;
            }
            return std::sqrt(var);
        }();
        return sd;
    }

private:
    double b_[7] = {0, 0, 0, 0, 0, 0, 0};
};

}  // namespace detail

/// Labels 0 (left hand) and 1 (right hand) in shuffled order. Every channel
/// carries unit-variance pink noise. Signal channels add a mu oscillation
/// with random phase; during the activation window its amplitude drops by
/// sqrt(1 - depth) in trials of the contralateral class (left hemisphere for
/// class 1, right hemisphere for class 0, midline for both).
inline TrialSet synth_mi_dataset(const Montage& montage, const SynthConfig& cfg) {
    if (!(cfg.erd_depth > 0.0 && cfg.erd_depth < 1.0)) throw ConfigError("erd_depth must lie in (0, 1)");
    if (cfg.trials_per_class < 1) throw ConfigError("need at least one trial per class");
    if (!(cfg.snr >= 0.0) || !(cfg.fs > 0.0) || !(cfg.duration_s > 0.0)) throw ConfigError("invalid synthetic parameters");
    std::vector<int> erd_class(montage.size(), -1);  // -1 none, 0/1 class, 2 both
    for (const auto& name : cfg.signal_channels) {
        const auto idx = montage.find(name);
        if (!idx) throw ConfigError("signal channel '" + name + "' not in montage");
        const double x = montage[*idx].position.x;
        erd_class[*idx] = x < -1e-9 ? 1 : (x > 1e-9 ? 0 : 2);
    }
    const auto n_samples = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.fs));
    TrialSet t(2 * cfg.trials_per_class, montage.size(), n_samples, cfg.fs);
    t.set_channel_names(montage.names());
    t.set_windows(cfg.baseline, cfg.activation);
    Rng rng(cfg.seed);
    for (std::size_t k = 0; k < t.n_trials(); ++k) t.labels()[k] = static_cast<std::uint8_t>(k % 2);
    rng.shuffle(t.labels());

    const auto act_begin = cfg.activation.first_sample(cfg.fs);
    const auto act_end = std::min(cfg.activation.end_sample(cfg.fs), n_samples);
    const double amp = cfg.snr * std::sqrt(2.0);
    const double drop = std::sqrt(1.0 - cfg.erd_depth);
    constexpr std::size_t burn_in = 1000;
    for (std::size_t k = 0; k < t.n_trials(); ++k) {
        const int y = t.labels()[k];
        for (std::size_t c = 0; c < montage.size(); ++c) {
            detail::PinkNoise pink;
            for (std::size_t i = 0; i < burn_in; ++i) pink.next(rng);
            auto x = t.channel(k, c);
            for (auto& v : x) v = pink.next(rng);
            if (erd_class[c] < 0) continue;
            const double phase = rng.uniform(0.0, 2.0 * kPi);
            const double a = amp * std::max(0.0, 1.0 + cfg.amplitude_jitter * rng.normal());
            const bool erd = erd_class[c] == 2 || erd_class[c] == y;
            for (std::size_t i = 0; i < n_samples; ++i) {
                const double g = erd && i >= act_begin && i < act_end ? drop : 1.0;
                x[i] += g * a * std::sin(2.0 * kPi * cfg.mu_hz * static_cast<double>(i) / cfg.fs + phase);
            }
        }
    }
    t.validate();
    return t;
}

}  // namespace eegsel
