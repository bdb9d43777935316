#pragma once

// Two-objective evaluation of channel subsets. Both components are negated
// sums so every optimizer minimizes.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegsel/common.hpp"
#include "eegsel/signal.hpp"

namespace eegsel {

/// Binary channel selection over N channels.
class ChannelMask {
public:
    ChannelMask() = default;
    explicit ChannelMask(std::size_t n) : bits_(n, 0) {}

    static ChannelMask from_indices(std::size_t n, std::span<const std::size_t> idx) {
        ChannelMask m(n);
        for (auto i : idx) m.set(i, true);
        return m;
    }

    [[nodiscard]] std::size_t size() const { return bits_.size(); }
    [[nodiscard]] bool test(std::size_t i) const { return bits_.at(i) != 0; }
    void set(std::size_t i, bool on) { bits_.at(i) = on ? 1 : 0; }
    void flip(std::size_t i) { bits_.at(i) ^= 1; }

    [[nodiscard]] std::size_t popcount() const {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }

    [[nodiscard]] std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i]) out.push_back(i);
        }
        return out;
    }

    [[nodiscard]] const std::vector<std::uint8_t>& bits() const { return bits_; }

    /// "0101..." with channel 0 first.
    [[nodiscard]] std::string to_string() const {
        std::string s(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i]) s[i] = '1';
        }
        return s;
    }

    friend bool operator==(const ChannelMask&, const ChannelMask&) = default;
    friend auto operator<=>(const ChannelMask&, const ChannelMask&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// (f1, f2): negated spatial-relevance sum and negated discriminability sum.
struct ObjectiveVector {
    std::array<double, 2> f{0.0, 0.0};

    [[nodiscard]] double operator[](std::size_t i) const { return f[i]; }
    double& operator[](std::size_t i) { return f[i]; }

    friend ObjectiveVector operator+(const ObjectiveVector& a, const ObjectiveVector& b) {
        return {{a.f[0] + b.f[0], a.f[1] + b.f[1]}};
    }
    friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

/// Cached per-channel scores shared by all evaluations of one run.
struct ObjectiveContext {
    std::vector<double> sp;    // spatial relevance per channel
    std::vector<double> disc;  // discriminability per channel
    std::size_t max_channels = 16;

    [[nodiscard]] std::size_t n_channels() const { return sp.size(); }

    void validate() const {
        if (sp.empty() || sp.size() != disc.size()) throw ConfigError("objective score vectors must match and be non-empty");
        if (max_channels < 1 || max_channels > sp.size()) throw ConfigError("channel limit L must lie in [1, N]");
    }

    /// Copy with each score vector min-max scaled to [0, 1].
    [[nodiscard]] ObjectiveContext normalized() const {
        ObjectiveContext out = *this;
        for (auto* v : {&out.sp, &out.disc}) {
            const auto [lo, hi] = std::minmax_element(v->begin(), v->end());
            const double a = *lo;
            const double range = *hi - *lo;
            for (double& x : *v) x = range > 0.0 ? (x - a) / range : 0.0;
        }
        return out;
    }
};

/// d_i = mean over trials of max(0, -ITTRD); degenerate cells count as 0.
inline std::vector<double> channel_discriminability(const IttrdMatrix& m) {
    if (m.n_trials == 0 || m.n_channels == 0) throw DataError("empty ITTRD matrix");
    std::vector<double> d(m.n_channels, 0.0);
    for (std::size_t t = 0; t < m.n_trials; ++t) {
        for (std::size_t c = 0; c < m.n_channels; ++c) {
            if (!m.is_degenerate(t, c)) d[c] += std::max(0.0, -m.at(t, c));
        }
    }
    for (double& v : d) v /= static_cast<double>(m.n_trials);
    return d;
}

inline ObjectiveVector evaluate(const ChannelMask& mask, const ObjectiveContext& ctx) {
    if (mask.size() != ctx.n_channels()) throw ConfigError("mask length does not match channel count");
    ObjectiveVector o;
    bool any = false;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.test(i)) {
            o.f[0] -= ctx.sp[i];
            o.f[1] -= ctx.disc[i];
            any = true;
        }
    }
    if (!any) throw ConfigError("cannot evaluate an empty channel mask");
    return o;
}

/// Enforces 1 <= popcount <= limit by dropping random excess channels or
/// adding one random channel to an empty mask.
inline ChannelMask repair(ChannelMask mask, std::size_t limit, Rng& rng) {
    if (mask.size() == 0) return mask;
    auto on = mask.indices();
    if (on.empty()) {
        mask.set(rng.below(mask.size()), true);
        return mask;
    }
    while (on.size() > limit) {
        const auto k = rng.below(on.size());
        mask.set(on[k], false);
        on.erase(on.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return mask;
}

}  // namespace eegsel
