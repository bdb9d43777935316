#pragma once

// Canonical binary trial container.
//
// Layout, all integers and floats little-endian:
//   "EEGT"                      4 bytes
//   version                     u16 (= 1)
//   n_trials, n_channels,
//   n_samples                   u32 each
//   fs                          f32
//   baseline start/end,
//   activation start/end (s)    f32 x 4
//   channel names               n_channels x (u16 byte length, UTF-8 bytes)
//   labels                      n_trials x u8, each 0 or 1
//   payload                     f32, trial-major, then channel, then sample

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "eegsel/common.hpp"
#include "eegsel/signal.hpp"

namespace eegsel {

inline constexpr std::uint16_t kTrialFileVersion = 1;

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    void bytes(const std::string& s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    [[nodiscard]] const std::vector<std::uint8_t>& data() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

    [[nodiscard]] std::size_t offset() const { return pos_; }
    [[nodiscard]] std::size_t remaining() const { return buf_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw DataError(std::string("truncated trial file: ") + what + " at byte " + std::to_string(pos_));
        }
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return buf_[pos_++];
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        const auto v = static_cast<std::uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_trials(const TrialSet& trials) {
    trials.validate();
    detail::ByteWriter w;
    w.bytes("EEGT");
    w.u16(kTrialFileVersion);
    w.u32(static_cast<std::uint32_t>(trials.n_trials()));
    w.u32(static_cast<std::uint32_t>(trials.n_channels()));
    w.u32(static_cast<std::uint32_t>(trials.n_samples()));
    w.f32(trials.fs());
    w.f32(trials.baseline().start_s);
    w.f32(trials.baseline().end_s);
    w.f32(trials.activation().start_s);
    w.f32(trials.activation().end_s);
    for (const auto& name : trials.channel_names()) {
        if (name.size() > 0xFFFF) throw DataError("channel name too long");
        w.u16(static_cast<std::uint16_t>(name.size()));
        w.bytes(name);
    }
    for (auto l : trials.labels()) w.u8(l);
    for (double v : trials.data()) w.f32(v);
    return w.data();
}

inline TrialSet deserialize_trials(const std::vector<std::uint8_t>& buf) {
    detail::ByteReader r(buf);
    if (r.bytes(4, "magic") != "EEGT") throw DataError("not a trial file: bad magic");
    const auto version = r.u16("version");
    if (version != kTrialFileVersion) throw DataError("unsupported trial file version " + std::to_string(version));
    const std::size_t nt = r.u32("header"), nc = r.u32("header"), ns = r.u32("header");
    const double fs = r.f32("header");
    const double b0 = r.f32("header"), b1 = r.f32("header"), a0 = r.f32("header"), a1 = r.f32("header");
    if (!(fs > 0.0) || !std::isfinite(fs)) throw DataError("invalid sampling rate in trial file");
    std::vector<std::string> names;
    names.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c) names.push_back(r.bytes(r.u16("channel name length"), "channel name"));
    TrialSet t(nt, nc, ns, fs);
    t.set_channel_names(std::move(names));
    for (std::size_t k = 0; k < nt; ++k) {
        const auto off = r.offset();
        const auto l = r.u8("labels");
        if (l > 1) throw DataError("label outside {0,1} at byte " + std::to_string(off));
        t.labels()[k] = l;
    }
    const std::size_t expected = 4 * nt * nc * ns;
    if (r.remaining() != expected) {
        throw DataError("payload length " + std::to_string(r.remaining()) + " bytes, expected " +
                        std::to_string(expected) + " at byte " + std::to_string(r.offset()));
    }
    for (double& v : t.data()) v = r.f32("payload");
    t.set_windows({b0, b1}, {a0, a1});
    t.validate();
    return t;
}

inline void write_trialfile(const TrialSet& trials, const std::string& path) {
    const auto bytes = serialize_trials(trials);
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for '" + path + "'");
}

inline TrialSet read_trialfile(const std::string& path) {
    try {
        return deserialize_trials(detail::read_bytes(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

/// Structural check of a trial file without stopping at the first problem
/// where it can continue.
struct TrialFileReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    std::size_t n_trials = 0, n_channels = 0, n_samples = 0;
    double fs = 0.0;
    std::array<std::size_t, 2> class_counts{0, 0};

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

inline TrialFileReport verify_trialfile(const std::string& path) {
    TrialFileReport rep;
    std::vector<std::uint8_t> buf;
    try {
        buf = detail::read_bytes(path);
    } catch (const DataError& e) {
        rep.violations.emplace_back(e.what());
        return rep;
    }
    detail::ByteReader r(buf);
    try {
        if (r.bytes(4, "magic") != "EEGT") {
            rep.violations.emplace_back("bad magic at byte 0");
            return rep;
        }
        const auto version = r.u16("version");
        if (version != kTrialFileVersion) {
            rep.violations.push_back("unsupported version " + std::to_string(version) + " at byte 4");
            return rep;
        }
        rep.n_trials = r.u32("header");
        rep.n_channels = r.u32("header");
        rep.n_samples = r.u32("header");
        rep.fs = r.f32("header");
        if (!(rep.fs > 0.0)) rep.violations.emplace_back("non-positive sampling rate at byte 18");
        std::array<float, 4> win{};
        for (auto& w : win) w = r.f32("header");
        const double dur = rep.fs > 0.0 ? static_cast<double>(rep.n_samples) / rep.fs : 0.0;
        if (!(win[2] < win[3]) || win[2] < 0.0f || win[3] > dur + 1e-6)
            rep.violations.emplace_back("activation window outside trial at byte 30");
        for (std::size_t c = 0; c < rep.n_channels; ++c) {
            const auto len = r.u16("channel name length");
            const auto off = r.offset();
            if (r.bytes(len, "channel name").empty()) rep.violations.push_back("empty channel name at byte " + std::to_string(off));
        }
        for (std::size_t k = 0; k < rep.n_trials; ++k) {
            const auto off = r.offset();
            const auto l = r.u8("labels");
            if (l > 1) {
                rep.violations.push_back("label " + std::to_string(l) + " at byte " + std::to_string(off));
            } else {
                ++rep.class_counts[l];
            }
        }
        const std::size_t expected = 4 * rep.n_trials * rep.n_channels * rep.n_samples;
        if (r.remaining() != expected) {
            rep.violations.push_back("payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                                     std::to_string(expected) + ", starting at byte " + std::to_string(r.offset()));
            return rep;
        }
        std::size_t bad = 0;
        std::size_t first_bad = 0;
        for (std::size_t i = 0; i < rep.n_trials * rep.n_channels * rep.n_samples; ++i) {
            const auto off = r.offset();
            if (!std::isfinite(r.f32("payload"))) {
                if (bad++ == 0) first_bad = off;
            }
        }
        if (bad > 0) {
            rep.violations.push_back(std::to_string(bad) + " non-finite samples, first at byte " + std::to_string(first_bad));
        }
    } catch (const DataError& e) {
        rep.violations.emplace_back(e.what());
        return rep;
    }
    if (rep.class_counts[0] == 0 || rep.class_counts[1] == 0) {
        rep.warnings.emplace_back("only one class present");
    } else {
        const double ratio = static_cast<double>(std::min(rep.class_counts[0], rep.class_counts[1])) /
                             static_cast<double>(std::max(rep.class_counts[0], rep.class_counts[1]));
        if (ratio < 0.5) rep.warnings.emplace_back("class imbalance beyond 2:1");
    }
    return rep;
}

}  // namespace eegsel
