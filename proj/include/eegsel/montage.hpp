#pragma once

// Electrode geometry and Gaussian spatial relevance of channels with respect
// to the sensorimotor reference electrodes (C3/C4 by default).

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "eegsel/common.hpp"

namespace eegsel {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y + z * z); }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

struct Electrode {
    std::string name;
    Vec3 position;  // unit-sphere head coordinates: +x right, +y nose, +z vertex
};

struct SpatialKernelConfig {
    double sigma = 1.0;
};

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace detail

/// Ordered electrode set. Electrode order is the canonical channel order for
/// masks and trial data.
class Montage {
public:
    Montage() = default;

    /// Validates and renormalizes positions; refs default to C3 and C4 when
    /// present, otherwise to channel 0.
    explicit Montage(std::vector<Electrode> electrodes, std::vector<std::size_t> refs = {})
        : electrodes_(std::move(electrodes)), refs_(std::move(refs)) {
        if (electrodes_.size() < 2) throw DataError("montage needs at least 2 electrodes");
        std::unordered_set<std::string> seen;
        for (auto& e : electrodes_) {
            const Vec3 p = e.position;
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
                throw DataError("non-finite coordinates for electrode '" + e.name + "'");
            const double n = p.norm();
            if (n <= 0.0) throw DataError("electrode '" + e.name + "' sits at the origin");
            e.position = {p.x / n, p.y / n, p.z / n};
            if (!seen.insert(detail::lower(e.name)).second)
                throw DataError("duplicate electrode name '" + e.name + "'");
        }
        if (refs_.empty()) {
            for (const char* name : {"C3", "C4"}) {
                if (auto idx = find(name)) refs_.push_back(*idx);
            }
            if (refs_.empty()) refs_.push_back(0);
        }
        for (auto r : refs_) {
            if (r >= electrodes_.size()) throw ConfigError("reference index out of range");
        }
    }

    [[nodiscard]] std::size_t size() const { return electrodes_.size(); }
    [[nodiscard]] const std::vector<Electrode>& electrodes() const { return electrodes_; }
    [[nodiscard]] const Electrode& operator[](std::size_t i) const { return electrodes_.at(i); }
    [[nodiscard]] const std::vector<std::size_t>& refs() const { return refs_; }

    /// Case-insensitive lookup by label.
    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const {
        const auto key = detail::lower(name);
        for (std::size_t i = 0; i < electrodes_.size(); ++i) {
            if (detail::lower(electrodes_[i].name) == key) return i;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(electrodes_.size());
        for (const auto& e : electrodes_) out.push_back(e.name);
        return out;
    }

    /// Montage restricted to and reordered by `names`. References are mapped
    /// by label; missing references are dropped (falling back to C3/C4 lookup).
    [[nodiscard]] Montage select(const std::vector<std::string>& names) const {
        std::vector<Electrode> picked;
        picked.reserve(names.size());
        for (const auto& n : names) {
            auto idx = find(n);
            if (!idx) throw DataError("channel '" + n + "' not present in montage");
            picked.push_back(electrodes_[*idx]);
        }
        std::vector<std::size_t> refs;
        for (auto r : refs_) {
            for (std::size_t i = 0; i < picked.size(); ++i) {
                if (detail::lower(picked[i].name) == detail::lower(electrodes_[r].name)) refs.push_back(i);
            }
        }
        return Montage(std::move(picked), std::move(refs));
    }

private:
    std::vector<Electrode> electrodes_;
    std::vector<std::size_t> refs_;
};

namespace detail {

// Idealized 10-10 positions on the unit sphere (Cz = +z, Fpz = +y, T8 = +x).
// Equator electrodes every 18 degrees of azimuth; lateral rows divide the
// circle through (left equator, midline, right equator) into equal steps.
inline const std::vector<Electrode>& physionet64_table() {
    static const std::vector<Electrode> table = {
        {"FC5", {-0.871740, +0.337350, +0.355337}},
        {"FC3", {-0.663982, +0.361221, +0.654712}},
        {"FC1", {-0.358394, +0.377113, +0.854014}},
        {"FCz", {+0.000000, +0.382683, +0.923880}},
        {"FC2", {+0.358394, +0.377113, +0.854014}},
        {"FC4", {+0.663982, +0.361221, +0.654712}},
        {"FC6", {+0.871740, +0.337350, +0.355337}},
        {"C5", {-0.923880, +0.000000, +0.382683}},
        {"C3", {-0.707107, +0.000000, +0.707107}},
        {"C1", {-0.382683, +0.000000, +0.923880}},
        {"Cz", {+0.000000, +0.000000, +1.000000}},
        {"C2", {+0.382683, +0.000000, +0.923880}},
        {"C4", {+0.707107, +0.000000, +0.707107}},
        {"C6", {+0.923880, +0.000000, +0.382683}},
        {"CP5", {-0.871740, -0.337350, +0.355337}},
        {"CP3", {-0.663982, -0.361221, +0.654712}},
        {"CP1", {-0.358394, -0.377113, +0.854014}},
        {"CPz", {+0.000000, -0.382683, +0.923880}},
        {"CP2", {+0.358394, -0.377113, +0.854014}},
        {"CP4", {+0.663982, -0.361221, +0.654712}},
        {"CP6", {+0.871740, -0.337350, +0.355337}},
        {"Fp1", {-0.309017, +0.951057, +0.000000}},
        {"Fpz", {+0.000000, +1.000000, +0.000000}},
        {"Fp2", {+0.309017, +0.951057, +0.000000}},
        {"AF7", {-0.587785, +0.809017, +0.000000}},
        {"AF3", {-0.355363, +0.892445, +0.277955}},
        {"AFz", {+0.000000, +0.923880, +0.382683}},
        {"AF4", {+0.355363, +0.892445, +0.277955}},
        {"AF8", {+0.587785, +0.809017, +0.000000}},
        {"F7", {-0.809017, +0.587785, +0.000000}},
        {"F5", {-0.721713, +0.634479, +0.276708}},
        {"F3", {-0.540543, +0.672982, +0.504884}},
        {"F1", {-0.289070, +0.698289, +0.654852}},
        {"Fz", {+0.000000, +0.707107, +0.707107}},
        {"F2", {+0.289070, +0.698289, +0.654852}},
        {"F4", {+0.540543, +0.672982, +0.504884}},
        {"F6", {+0.721713, +0.634479, +0.276708}},
        {"F8", {+0.809017, +0.587785, +0.000000}},
        {"FT7", {-0.951057, +0.309017, +0.000000}},
        {"FT8", {+0.951057, +0.309017, +0.000000}},
        {"T7", {-1.000000, +0.000000, +0.000000}},
        {"T8", {+1.000000, +0.000000, +0.000000}},
        {"T9", {-0.923880, +0.000000, -0.382683}},
        {"T10", {+0.923880, +0.000000, -0.382683}},
        {"TP7", {-0.951057, -0.309017, +0.000000}},
        {"TP8", {+0.951057, -0.309017, +0.000000}},
        {"P7", {-0.809017, -0.587785, +0.000000}},
        {"P5", {-0.721713, -0.634479, +0.276708}},
        {"P3", {-0.540543, -0.672982, +0.504884}},
        {"P1", {-0.289070, -0.698289, +0.654852}},
        {"Pz", {+0.000000, -0.707107, +0.707107}},
        {"P2", {+0.289070, -0.698289, +0.654852}},
        {"P4", {+0.540543, -0.672982, +0.504884}},
        {"P6", {+0.721713, -0.634479, +0.276708}},
        {"P8", {+0.809017, -0.587785, +0.000000}},
        {"PO7", {-0.587785, -0.809017, +0.000000}},
        {"PO3", {-0.355363, -0.892445, +0.277955}},
        {"POz", {+0.000000, -0.923880, +0.382683}},
        {"PO4", {+0.355363, -0.892445, +0.277955}},
        {"PO8", {+0.587785, -0.809017, +0.000000}},
        {"O1", {-0.309017, -0.951057, +0.000000}},
        {"Oz", {+0.000000, -1.000000, +0.000000}},
        {"O2", {+0.309017, -0.951057, +0.000000}},
        {"Iz", {+0.000000, -0.923880, -0.382683}},
    };
    return table;
}

}  // namespace detail

/// Built-in montages: "physionet64" (Physionet EEGMMIDB channel order) and
/// "bciiv2a22" (BCI Competition IV 2a channel order).
inline Montage builtin_montage(std::string_view name) {
    const auto& table = detail::physionet64_table();
    const auto key = detail::lower(name);
    if (key == "physionet64") return Montage(table);
    if (key == "bciiv2a22") {
        static const std::array<const char*, 22> order = {
            "Fz", "FC3", "FC1", "FCz", "FC2", "FC4", "C5", "C3", "C1", "Cz", "C2",
            "C4", "C6", "CP3", "CP1", "CPz", "CP2", "CP4", "P1", "Pz", "P2", "POz"};
        return Montage(table).select(std::vector<std::string>(order.begin(), order.end()));
    }
    throw ConfigError("unknown built-in montage '" + std::string(name) + "'");
}

/// Reads a CSV with header `name,x,y,z`, one electrode per row.
inline Montage load_montage(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open montage file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty montage file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::lower(line) != "name,x,y,z") throw DataError("montage header must be 'name,x,y,z'");
    std::vector<Electrode> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string name, xs, ys, zs;
        if (!std::getline(ss, name, ',') || !std::getline(ss, xs, ',') || !std::getline(ss, ys, ',') ||
            !std::getline(ss, zs, ','))
            throw DataError("malformed montage row at line " + std::to_string(lineno));
        try {
            rows.push_back({name, {std::stod(xs), std::stod(ys), std::stod(zs)}});
        } catch (const std::logic_error&) {
            throw DataError("non-numeric coordinate at line " + std::to_string(lineno));
        }
    }
    return Montage(std::move(rows));
}

/// Resolves a built-in montage name or a CSV path.
inline Montage resolve_montage(const std::string& name_or_path) {
    const auto key = detail::lower(name_or_path);
    if (key == "physionet64" || key == "bciiv2a22") return builtin_montage(key);
    return load_montage(name_or_path);
}

/// exp(-d^2 / (2 sigma^2)) with d the distance from electrode k to the
/// nearest reference electrode.
inline double spatial_relevance(const Montage& montage, std::size_t k, const SpatialKernelConfig& cfg = {}) {
    if (k >= montage.size()) throw ConfigError("channel index out of range");
    if (!(cfg.sigma > 0.0)) throw ConfigError("kernel sigma must be positive");
    double d_min = std::numeric_limits<double>::infinity();
    for (auto r : montage.refs()) {
        d_min = std::min(d_min, distance(montage[k].position, montage[r].position));
    }
    return std::exp(-d_min * d_min / (2.0 * cfg.sigma * cfg.sigma));
}

inline std::vector<double> relevance_vector(const Montage& montage, const SpatialKernelConfig& cfg = {}) {
    std::vector<double> out(montage.size());
    for (std::size_t k = 0; k < montage.size(); ++k) out[k] = spatial_relevance(montage, k, cfg);
    return out;
}

}  // namespace eegsel
