#pragma once

// Pareto dominance, fast non-dominated sorting, crowding distance and a
// capacity-bounded non-dominated archive with an adaptive hypercube grid.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "eegsel/common.hpp"
#include "eegsel/objectives.hpp"

namespace eegsel {

/// a dominates b under minimization.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    bool strictly = false;
    for (std::size_t i = 0; i < a.f.size(); ++i) {
        if (a.f[i] > b.f[i]) return false;
        if (a.f[i] < b.f[i]) strictly = true;
    }
    return strictly;
}

struct ScoredSolution {
    ChannelMask mask;
    ObjectiveVector obj;
    std::size_t rank = 0;
    double crowding = 0.0;
};

using Fronts = std::vector<std::vector<std::size_t>>;

/// Fast non-dominated sort (domination counts + dominated lists). Front
/// members are listed in ascending index order.
inline Fronts nd_sort(std::span<const ObjectiveVector> objs) {
    const std::size_t n = objs.size();
    Fronts fronts;
    if (n == 0) return fronts;
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(objs[i], objs[j])) {
                dominated_by[i].push_back(j);
                ++count[j];
            } else if (dominates(objs[j], objs[i])) {
                dominated_by[j].push_back(i);
                ++count[i];
            }
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (count[i] == 0) current.push_back(i);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto i : current) {
            for (auto j : dominated_by[i]) {
                if (--count[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

/// Sorts `pop` and writes each member's front index into `rank`.
inline Fronts nd_sort(std::vector<ScoredSolution>& pop) {
    std::vector<ObjectiveVector> objs;
    objs.reserve(pop.size());
    for (const auto& s : pop) objs.push_back(s.obj);
    auto fronts = nd_sort(objs);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        for (auto i : fronts[r]) pop[i].rank = r;
    }
    return fronts;
}

/// Crowding distance of each vector within one front. Boundary points per
/// objective are infinite; an objective with zero range contributes nothing
/// to interior points.
inline std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < 2; ++m) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[a].f[m] < front[b].f[m]; });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        const double range = front[order.back()].f[m] - front[order.front()].f[m];
        if (!(range > 0.0)) continue;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            dist[order[k]] += (front[order[k + 1]].f[m] - front[order[k - 1]].f[m]) / range;
        }
    }
    return dist;
}

/// Writes crowding distances for the members of `front` (indices into pop).
inline void assign_crowding(std::vector<ScoredSolution>& pop, std::span<const std::size_t> front) {
    std::vector<ObjectiveVector> objs;
    objs.reserve(front.size());
    for (auto i : front) objs.push_back(pop[i].obj);
    const auto d = crowding_distance(objs);
    for (std::size_t k = 0; k < front.size(); ++k) pop[front[k]].crowding = d[k];
}

/// Members of `pop` not dominated by any other member (stable order).
inline std::vector<ScoredSolution> non_dominated(const std::vector<ScoredSolution>& pop) {
    std::vector<ScoredSolution> out;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        bool dom = false;
        for (std::size_t j = 0; j < pop.size() && !dom; ++j) {
            dom = j != i && dominates(pop[j].obj, pop[i].obj);
        }
        if (!dom) out.push_back(pop[i]);
    }
    return out;
}

struct GridConfig {
    std::size_t divisions = 10;
};

/// Mutually non-dominated solutions, at most `capacity` of them.
class ParetoArchive {
public:
    explicit ParetoArchive(std::size_t capacity = 100, GridConfig grid = {}) : capacity_(capacity), grid_(grid) {
        if (capacity_ == 0) throw ConfigError("archive capacity must be positive");
        if (grid_.divisions == 0) throw ConfigError("grid divisions must be positive");
    }

    [[nodiscard]] const std::vector<ScoredSolution>& members() const { return members_; }
    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] bool empty() const { return members_.empty(); }

    /// Inserts s unless a member dominates it or already holds the same mask.
    /// Members dominated by s are removed. Over capacity, one random member of
    /// the most populated grid cell is evicted. Returns whether s was added.
    bool insert(const ScoredSolution& s, Rng& rng) {
        for (const auto& m : members_) {
            if (dominates(m.obj, s.obj) || m.mask == s.mask) return false;
        }
        std::erase_if(members_, [&](const ScoredSolution& m) { return dominates(s.obj, m.obj); });
        members_.push_back(s);
        if (members_.size() > capacity_) evict(rng);
        return true;
    }

    /// Leader for a particle: roulette over occupied cells weighted by the
    /// inverse of cell occupancy, then a uniform member of that cell.
    [[nodiscard]] const ScoredSolution& select_leader(Rng& rng) const {
        if (members_.empty()) throw ConfigError("cannot select a leader from an empty archive");
        const auto cells = occupancy();
        double total = 0.0;
        for (const auto& [cell, ids] : cells) total += 1.0 / static_cast<double>(ids.size());
        double r = rng.uniform() * total;
        for (const auto& [cell, ids] : cells) {
            r -= 1.0 / static_cast<double>(ids.size());
            if (r < 0.0) return members_[ids[rng.below(ids.size())]];
        }
        const auto& ids = cells.rbegin()->second;
        return members_[ids[rng.below(ids.size())]];
    }

    /// Grid cell (row-major over the two objectives) of each member.
    [[nodiscard]] std::vector<std::size_t> cell_indices() const {
        std::array<double, 2> lo{}, hi{};
        for (std::size_t m = 0; m < 2; ++m) {
            lo[m] = std::numeric_limits<double>::infinity();
            hi[m] = -std::numeric_limits<double>::infinity();
            for (const auto& s : members_) {
                lo[m] = std::min(lo[m], s.obj.f[m]);
                hi[m] = std::max(hi[m], s.obj.f[m]);
            }
        }
        const auto div = grid_.divisions;
        std::vector<std::size_t> out;
        out.reserve(members_.size());
        for (const auto& s : members_) {
            std::size_t cell = 0;
            for (std::size_t m = 0; m < 2; ++m) {
                const double range = hi[m] - lo[m];
                std::size_t c = 0;
                if (range > 0.0) {
                    c = static_cast<std::size_t>(std::floor((s.obj.f[m] - lo[m]) / range * static_cast<double>(div)));
                    c = std::min(c, div - 1);
                }
                cell = cell * div + c;
            }
            out.push_back(cell);
        }
        return out;
    }

private:
    [[nodiscard]] std::map<std::size_t, std::vector<std::size_t>> occupancy() const {
        std::map<std::size_t, std::vector<std::size_t>> cells;
        const auto idx = cell_indices();
        for (std::size_t i = 0; i < idx.size(); ++i) cells[idx[i]].push_back(i);
        return cells;
    }

    void evict(Rng& rng) {
        const auto cells = occupancy();
        const std::vector<std::size_t>* crowded = nullptr;
        for (const auto& [cell, ids] : cells) {
            if (!crowded || ids.size() > crowded->size()) crowded = &ids;
        }
        const auto victim = (*crowded)[rng.below(crowded->size())];
        members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(victim));
    }

    std::size_t capacity_;
    GridConfig grid_;
    std::vector<ScoredSolution> members_;
};

}  // namespace eegsel
