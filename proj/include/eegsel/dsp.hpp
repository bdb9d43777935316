#pragma once

// Low-level DSP building blocks: a mixed-radix FFT, Butterworth bandpass
// design as second-order sections, and zero-phase forward-backward filtering.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "eegsel/common.hpp"

namespace eegsel::dsp {

using cplx = std::complex<double>;

/// Precomputed twiddles for complex DFTs of one length. Lengths with large
/// prime factors fall back to direct summation at that radix.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n), twiddle_(n) {
        if (n == 0) throw ConfigError("FFT length must be positive");
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
            twiddle_[k] = {std::cos(ang), std::sin(ang)};
        }
    }

    [[nodiscard]] std::size_t size() const { return n_; }

    /// Forward transform X[k] = sum_n x[n] exp(-2 pi i k n / N).
    void forward(std::span<const cplx> in, std::span<cplx> out) const {
        std::vector<cplx> scratch(n_);
        recurse(in.data(), 1, out.data(), n_, 1, scratch.data());
    }

    static const FftPlan& cached(std::size_t n) {
        thread_local std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
        auto& slot = cache[n];
        if (!slot) slot = std::make_unique<FftPlan>(n);
        return *slot;
    }

private:
    static std::size_t smallest_factor(std::size_t n) {
        if (n % 4 == 0) return 4;
        if (n % 2 == 0) return 2;
        for (std::size_t p = 3; p * p <= n; p += 2) {
            if (n % p == 0) return p;
        }
        return n;
    }

    // Decimation in time: split into p interleaved subsequences of length m.
    void recurse(const cplx* in, std::size_t stride, cplx* out, std::size_t n, std::size_t tw_step,
                 cplx* scratch) const {
        if (n == 1) {
            out[0] = in[0];
            return;
        }
        const std::size_t p = smallest_factor(n);
        const std::size_t m = n / p;
        for (std::size_t r = 0; r < p; ++r) {
            recurse(in + r * stride, stride * p, out + r * m, m, tw_step * p, scratch);
        }
        // out[r*m + k] holds Y_r[k]; combine into X[k + q*m].
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t q = 0; q < p; ++q) {
                cplx acc = 0.0;
                const std::size_t j = k + q * m;
                for (std::size_t r = 0; r < p; ++r) {
                    acc += twiddle_[((r * j) % n) * tw_step] * out[r * m + k];
                }
                scratch[j] = acc;
            }
        }
        std::copy(scratch, scratch + n, out);
    }

    std::size_t n_;
    std::vector<cplx> twiddle_;
};

/// Squared magnitudes |X[k]|^2 for k = 0..n/2 of a real sequence.
inline std::vector<double> power_spectrum_raw(std::span<const double> x) {
    const auto& plan = FftPlan::cached(x.size());
    std::vector<cplx> in(x.begin(), x.end());
    std::vector<cplx> out(x.size());
    plan.forward(in, out);
    std::vector<double> p(x.size() / 2 + 1);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(out[k]);
    return p;
}

/// Direct-form II transposed biquad.
struct Biquad {
    std::array<double, 3> b{1.0, 0.0, 0.0};
    std::array<double, 3> a{1.0, 0.0, 0.0};  // a[0] == 1

    [[nodiscard]] cplx response(cplx z) const {
        const cplx zi = 1.0 / z;
        return (b[0] + b[1] * zi + b[2] * zi * zi) / (a[0] + a[1] * zi + a[2] * zi * zi);
    }
};

class SosFilter {
public:
    SosFilter() = default;
    explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

    [[nodiscard]] const std::vector<Biquad>& sections() const { return sections_; }

    [[nodiscard]] std::size_t order() const { return 2 * sections_.size(); }

    [[nodiscard]] cplx response(double freq_hz, double fs) const {
        const cplx z = std::polar(1.0, 2.0 * kPi * freq_hz / fs);
        cplx h = 1.0;
        for (const auto& s : sections_) h *= s.response(z);
        return h;
    }

    /// Causal filtering; `x0` scales the step-response steady-state initial
    /// conditions (0 means zero state).
    [[nodiscard]] std::vector<double> filter(std::span<const double> x, double x0 = 0.0) const {
        std::vector<double> y(x.begin(), x.end());
        double dc = 1.0;
        for (const auto& s : sections_) {
            // Steady state of this section for a constant input `dc * x0`.
            const double g = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[1] + s.a[2]);
            double z2 = (s.b[2] - s.a[2] * g) * dc * x0;
            double z1 = (s.b[1] - s.a[1] * g) * dc * x0 + z2;
            for (double& v : y) {
                const double in = v;
                const double out = s.b[0] * in + z1;
                z1 = s.b[1] * in - s.a[1] * out + z2;
                z2 = s.b[2] * in - s.a[2] * out;
                v = out;
            }
            dc *= g;
        }
        return y;
    }

    /// Zero-phase forward-backward filtering with odd-reflection padding of
    /// `padlen` samples on each side (clamped to len-1).
    [[nodiscard]] std::vector<double> filtfilt(std::span<const double> x, std::size_t padlen) const {
        const std::size_t n = x.size();
        if (n == 0) return {};
        if (n < 2) padlen = 0;
        padlen = std::min(padlen, n - 1);
        std::vector<double> ext;
        ext.reserve(n + 2 * padlen);
        for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
        ext.insert(ext.end(), x.begin(), x.end());
        for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

        auto fwd = filter(ext, ext.front());
        std::reverse(fwd.begin(), fwd.end());
        auto bwd = filter(fwd, fwd.front());
        std::reverse(bwd.begin(), bwd.end());
        return {bwd.begin() + static_cast<std::ptrdiff_t>(padlen),
                bwd.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
    }

private:
    std::vector<Biquad> sections_;
};

/// Digital Butterworth bandpass of prototype order `order` (transfer function
/// order 2*order) via the bilinear transform with prewarped band edges.
/// Unit gain at the geometric band center. Throws if any pole falls on or
/// outside the unit circle.
inline SosFilter butterworth_bandpass(int order, double f_lo, double f_hi, double fs) {
    if (order < 1) throw ConfigError("filter order must be >= 1");
    if (!(fs > 0.0) || !(f_lo > 0.0) || !(f_hi > f_lo) || !(f_hi < fs / 2.0))
        throw ConfigError("bandpass edges must satisfy 0 < f_lo < f_hi < fs/2");

    const double k2 = 2.0 * fs;
    const double w_lo = k2 * std::tan(kPi * f_lo / fs);
    const double w_hi = k2 * std::tan(kPi * f_hi / fs);
    const double bw = w_hi - w_lo;
    const double w0sq = w_lo * w_hi;

    std::vector<cplx> zpoles;
    for (int k = 0; k < order; ++k) {
        const cplx p = std::polar(1.0, kPi * (2.0 * k + order + 1) / (2.0 * order));
        const cplx half = p * bw / 2.0;
        const cplx root = std::sqrt(half * half - w0sq);
        for (const cplx s : {half + root, half - root}) {
            zpoles.push_back((k2 + s) / (k2 - s));
        }
    }
    for (const auto& z : zpoles) {
        if (!(std::abs(z) < 1.0)) throw ConfigError("unstable bandpass design (pole outside unit circle)");
    }

    // Pair conjugates; leftover real poles are paired in sorted order.
    const double tol = 1e-10;
    std::vector<cplx> upper;
    std::vector<double> reals;
    for (const auto& z : zpoles) {
        if (std::abs(z.imag()) <= tol) {
            reals.push_back(z.real());
        } else if (z.imag() > 0.0) {
            upper.push_back(z);
        }
    }
    std::sort(upper.begin(), upper.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    std::sort(reals.begin(), reals.end());
    if (reals.size() % 2 != 0 || upper.size() * 2 + reals.size() != zpoles.size())
        throw ConfigError("bandpass design produced unpaired poles");

    const double center = 2.0 * std::atan(std::sqrt(w0sq) / k2);
    const cplx zc = std::polar(1.0, center);
    std::vector<Biquad> sections;
    auto add = [&](double a1, double a2) {
        Biquad s;
        s.b = {1.0, 0.0, -1.0};  // one zero at z = 1 and one at z = -1
        s.a = {1.0, a1, a2};
        const double g = std::abs(s.response(zc));
        for (double& c : s.b) c /= g;
        sections.push_back(s);
    };
    for (const auto& z : upper) add(-2.0 * z.real(), std::norm(z));
    for (std::size_t i = 0; i < reals.size(); i += 2) add(-(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]);
    return SosFilter(std::move(sections));
}

}  // namespace eegsel::dsp
