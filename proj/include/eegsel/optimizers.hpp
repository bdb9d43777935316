#pragma once

// NSGA-II, binary MOPSO and MOEA/D over channel masks, plus the shared
// variation operators. Every run is a pure function of (context, config, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "eegsel/common.hpp"
#include "eegsel/objectives.hpp"
#include "eegsel/pareto.hpp"

namespace eegsel {

enum class MutationMode {
    PerBit,        // every bit flips independently with probability p_m
    PerIndividual  // with probability p_m, one uniformly chosen bit flips
};

struct Nsga2Config {
    std::size_t pop_size = 10;
    std::size_t generations = 1000;
    double p_c = 0.7;
    double p_m = 0.1;
    MutationMode mutation = MutationMode::PerBit;

    void validate() const {
        if (pop_size < 4 || pop_size % 2 != 0) throw ConfigError("NSGA-II population must be even and >= 4");
        if (p_c < 0.0 || p_c > 1.0 || p_m < 0.0 || p_m > 1.0) throw ConfigError("probabilities must lie in [0, 1]");
    }
};

struct MopsoConfig {
    std::size_t swarm_size = 10;
    std::size_t iterations = 100;
    double inertia = 0.5;
    double c1 = 2.0;
    double c2 = 2.0;
    std::size_t repository = 100;
    std::size_t grid_divisions = 10;
    double p_m = 0.1;
    double velocity_clamp = 6.0;
    MutationMode mutation = MutationMode::PerBit;

    void validate() const {
        if (swarm_size < 1) throw ConfigError("swarm size must be positive");
        if (!(inertia > 0.0 && inertia <= 1.0)) throw ConfigError("inertia must lie in (0, 1]");
        if (c1 < 0.0 || c2 < 0.0) throw ConfigError("acceleration coefficients must be non-negative");
        if (p_m < 0.0 || p_m > 1.0) throw ConfigError("mutation probability must lie in [0, 1]");
        if (repository < 1 || grid_divisions < 1) throw ConfigError("repository and grid must be positive");
    }
};

struct MoeadConfig {
    std::size_t subproblems = 19;
    std::size_t neighborhood = 10;
    std::size_t generations = 1000;
    double p_c = 0.7;
    double p_m = 0.1;
    double delta = 0.7;  // probability of mating within the neighbourhood
    MutationMode mutation = MutationMode::PerBit;

    void validate() const {
        if (subproblems < 2) throw ConfigError("MOEA/D needs at least 2 subproblems");
        if (neighborhood < 1 || neighborhood > subproblems) throw ConfigError("neighbourhood size must be in [1, P]");
        if (p_c < 0.0 || p_c > 1.0 || p_m < 0.0 || p_m > 1.0 || delta < 0.0 || delta > 1.0)
            throw ConfigError("probabilities must lie in [0, 1]");
    }
};

/// Per-generation summary of the working population.
struct ConvergenceRow {
    std::size_t generation = 0;
    double best_f1 = 0.0;
    double best_f2 = 0.0;
    double mean_f1 = 0.0;
    double mean_f2 = 0.0;
};

struct OptimizerResult {
    std::vector<ScoredSolution> population;  // final working population / swarm
    std::vector<ScoredSolution> front;       // reported non-dominated set
    std::vector<ConvergenceRow> trace;
    std::vector<ObjectiveVector> ideal_trace;  // MOEA/D only: z* after each generation
};

// ---------------------------------------------------------------------------
// Variation operators

/// Uniform popcount in [1, L], then that many distinct channels.
inline ChannelMask random_feasible_mask(std::size_t n, std::size_t limit, Rng& rng) {
    const std::size_t k = 1 + rng.below(std::min(limit, n));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    ChannelMask m(n);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + rng.below(n - i);
        std::swap(idx[i], idx[j]);
        m.set(idx[i], true);
    }
    return m;
}

inline std::pair<ChannelMask, ChannelMask> single_point_crossover(const ChannelMask& p1, const ChannelMask& p2,
                                                                  double p_c, Rng& rng) {
    if (p1.size() != p2.size()) throw ConfigError("crossover parents differ in length");
    ChannelMask c1 = p1;
    ChannelMask c2 = p2;
    const std::size_t n = p1.size();
    if (rng.uniform() < p_c && n >= 2) {
        const std::size_t cut = 1 + rng.below(n - 1);
        for (std::size_t i = cut; i < n; ++i) {
            c1.set(i, p2.test(i));
            c2.set(i, p1.test(i));
        }
    }
    return {std::move(c1), std::move(c2)};
}

inline ChannelMask bit_flip_mutation(ChannelMask m, double p_m, Rng& rng,
                                     MutationMode mode = MutationMode::PerBit) {
    if (mode == MutationMode::PerBit) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (rng.uniform() < p_m) m.flip(i);
        }
    } else if (m.size() > 0 && rng.uniform() < p_m) {
        m.flip(rng.below(m.size()));
    }
    return m;
}

/// Two uniform draws; lower rank wins, then larger crowding, then the first.
inline std::size_t binary_tournament(const std::vector<ScoredSolution>& pop, Rng& rng) {
    if (pop.empty()) throw ConfigError("tournament on an empty population");
    const auto a = rng.below(pop.size());
    const auto b = rng.below(pop.size());
    if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank ? a : b;
    if (pop[b].crowding > pop[a].crowding) return b;
    return a;
}

/// max_j lambda_j * |obj_j - z*_j|
inline double tchebycheff(const ObjectiveVector& obj, const std::array<double, 2>& lambda,
                          const ObjectiveVector& z_star) {
    double g = 0.0;
    for (std::size_t j = 0; j < 2; ++j) g = std::max(g, lambda[j] * std::abs(obj.f[j] - z_star.f[j]));
    return g;
}

namespace detail {

inline ScoredSolution score(ChannelMask mask, const ObjectiveContext& ctx) {
    ScoredSolution s;
    s.obj = evaluate(mask, ctx);
    s.mask = std::move(mask);
    return s;
}

inline ConvergenceRow summarize(std::size_t generation, const std::vector<ScoredSolution>& pop) {
    ConvergenceRow row;
    row.generation = generation;
    row.best_f1 = std::numeric_limits<double>::infinity();
    row.best_f2 = std::numeric_limits<double>::infinity();
    for (const auto& s : pop) {
        row.best_f1 = std::min(row.best_f1, s.obj.f[0]);
        row.best_f2 = std::min(row.best_f2, s.obj.f[1]);
        row.mean_f1 += s.obj.f[0];
        row.mean_f2 += s.obj.f[1];
    }
    if (!pop.empty()) {
        row.mean_f1 /= static_cast<double>(pop.size());
        row.mean_f2 /= static_cast<double>(pop.size());
    }
    return row;
}

/// Sorts and crowds the whole population in place; returns the fronts.
inline Fronts rank_and_crowd(std::vector<ScoredSolution>& pop) {
    auto fronts = nd_sort(pop);
    for (const auto& f : fronts) assign_crowding(pop, f);
    return fronts;
}

inline std::vector<ScoredSolution> unique_masks(const std::vector<ScoredSolution>& pop) {
    std::vector<ScoredSolution> out;
    std::set<ChannelMask> seen;
    for (const auto& s : pop) {
        if (seen.insert(s.mask).second) out.push_back(s);
    }
    return out;
}

inline ChannelMask vary(ChannelMask m, double p_m, MutationMode mode, std::size_t limit, Rng& rng) {
    return repair(bit_flip_mutation(std::move(m), p_m, rng, mode), limit, rng);
}

}  // namespace detail

/// Elitist selection of `count` members: whole fronts first, the last front
/// by descending crowding distance (ties by index). When the last front is
/// cut, one member per distinct objective vector goes first; copies only
/// fill what is left.
inline std::vector<ScoredSolution> crowded_selection(std::vector<ScoredSolution> pool, std::size_t count) {
    const auto fronts = detail::rank_and_crowd(pool);
    std::vector<ScoredSolution> out;
    out.reserve(count);
    for (const auto& f : fronts) {
        if (out.size() >= count) break;
        if (out.size() + f.size() <= count) {
            for (auto i : f) out.push_back(pool[i]);
            continue;
        }
        std::vector<std::size_t> order = f;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return pool[a].crowding > pool[b].crowding; });
        std::vector<std::size_t> copies;
        std::set<std::array<double, 2>> seen;
        for (auto i : order) {
            if (!seen.insert(pool[i].obj.f).second) {
                copies.push_back(i);
            } else if (out.size() < count) {
                out.push_back(pool[i]);
            }
        }
        for (auto i : copies) {
            if (out.size() >= count) break;
            out.push_back(pool[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// NSGA-II

inline OptimizerResult run_nsga2(const ObjectiveContext& ctx, const Nsga2Config& cfg, std::uint64_t seed) {
    ctx.validate();
    cfg.validate();
    Rng rng(seed);
    const std::size_t n = ctx.n_channels();
    const std::size_t limit = ctx.max_channels;

    std::vector<ScoredSolution> pop;
    pop.reserve(cfg.pop_size);
    for (std::size_t j = 0; j < cfg.pop_size; ++j) pop.push_back(detail::score(random_feasible_mask(n, limit, rng), ctx));
    detail::rank_and_crowd(pop);

    OptimizerResult result;
    result.trace.push_back(detail::summarize(0, pop));
    for (std::size_t g = 1; g <= cfg.generations; ++g) {
        std::vector<ScoredSolution> merged = pop;
        merged.reserve(2 * cfg.pop_size);
        for (std::size_t j = 0; j < cfg.pop_size / 2; ++j) {
            const auto& p1 = pop[binary_tournament(pop, rng)];
            const auto& p2 = pop[binary_tournament(pop, rng)];
            auto [c1, c2] = single_point_crossover(p1.mask, p2.mask, cfg.p_c, rng);
            c1 = detail::vary(std::move(c1), cfg.p_m, cfg.mutation, limit, rng);
            c2 = detail::vary(std::move(c2), cfg.p_m, cfg.mutation, limit, rng);
            merged.push_back(detail::score(std::move(c1), ctx));
            merged.push_back(detail::score(std::move(c2), ctx));
        }
        pop = crowded_selection(std::move(merged), cfg.pop_size);
        detail::rank_and_crowd(pop);
        result.trace.push_back(detail::summarize(g, pop));
    }
    for (const auto& s : pop) {
        if (s.rank == 0) result.front.push_back(s);
    }
    result.population = std::move(pop);
    return result;
}

// ---------------------------------------------------------------------------
// MOPSO

inline OptimizerResult run_mopso(const ObjectiveContext& ctx, const MopsoConfig& cfg, std::uint64_t seed) {
    ctx.validate();
    cfg.validate();
    Rng rng(seed);
    const std::size_t n = ctx.n_channels();
    const std::size_t limit = ctx.max_channels;

    std::vector<ScoredSolution> pos;
    for (std::size_t j = 0; j < cfg.swarm_size; ++j) pos.push_back(detail::score(random_feasible_mask(n, limit, rng), ctx));
    std::vector<std::vector<double>> vel(cfg.swarm_size, std::vector<double>(n, 0.0));
    std::vector<ScoredSolution> pbest = pos;
    ParetoArchive rep(cfg.repository, GridConfig{cfg.grid_divisions});
    for (const auto& s : pos) rep.insert(s, rng);

    OptimizerResult result;
    result.trace.push_back(detail::summarize(0, pos));
    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        for (std::size_t j = 0; j < cfg.swarm_size; ++j) {
            const ChannelMask leader = rep.select_leader(rng).mask;
            ChannelMask next(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = pos[j].mask.test(i) ? 1.0 : 0.0;
                const double pb = pbest[j].mask.test(i) ? 1.0 : 0.0;
                const double gb = leader.test(i) ? 1.0 : 0.0;
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                double v = cfg.inertia * vel[j][i] + cfg.c1 * r1 * (pb - x) + cfg.c2 * r2 * (gb - x);
                v = std::clamp(v, -cfg.velocity_clamp, cfg.velocity_clamp);
                vel[j][i] = v;
                next.set(i, rng.uniform() < 1.0 / (1.0 + std::exp(-v)));
            }
            next = repair(std::move(next), limit, rng);
            next = detail::vary(std::move(next), cfg.p_m, cfg.mutation, limit, rng);
            pos[j] = detail::score(std::move(next), ctx);
            if (dominates(pos[j].obj, pbest[j].obj)) pbest[j] = pos[j];
        }
        for (const auto& s : pos) rep.insert(s, rng);
        result.trace.push_back(detail::summarize(t, pos));
    }
    result.front = rep.members();
    result.population = std::move(pos);
    for (const auto& s : pbest) result.population.push_back(s);
    return result;
}

// ---------------------------------------------------------------------------
// MOEA/D

/// lambda^k = (k/(P-1), 1 - k/(P-1)).
inline std::vector<std::array<double, 2>> uniform_weights(std::size_t count) {
    std::vector<std::array<double, 2>> w(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double a = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 0.5;
        w[k] = {a, 1.0 - a};
    }
    return w;
}

/// T nearest weight vectors (Euclidean, ties by index) for every subproblem;
/// each neighbourhood contains its own subproblem first.
inline std::vector<std::vector<std::size_t>> weight_neighborhoods(const std::vector<std::array<double, 2>>& w,
                                                                  std::size_t t) {
    std::vector<std::vector<std::size_t>> out(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        std::vector<std::size_t> order(w.size());
        std::iota(order.begin(), order.end(), 0);
        auto d = [&](std::size_t j) { return std::hypot(w[k][0] - w[j][0], w[k][1] - w[j][1]); };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d(a) < d(b); });
        out[k].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(t));
    }
    return out;
}

inline OptimizerResult run_moead(const ObjectiveContext& ctx, const MoeadConfig& cfg, std::uint64_t seed) {
    ctx.validate();
    cfg.validate();
    Rng rng(seed);
    const std::size_t n = ctx.n_channels();
    const std::size_t limit = ctx.max_channels;
    const std::size_t p = cfg.subproblems;

    const auto weights = uniform_weights(p);
    const auto hood = weight_neighborhoods(weights, cfg.neighborhood);
    std::vector<ScoredSolution> x;
    for (std::size_t k = 0; k < p; ++k) x.push_back(detail::score(random_feasible_mask(n, limit, rng), ctx));
    ObjectiveVector z{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}};
    for (const auto& s : x) {
        for (std::size_t m = 0; m < 2; ++m) z.f[m] = std::min(z.f[m], s.obj.f[m]);
    }
    std::vector<std::size_t> everyone(p);
    std::iota(everyone.begin(), everyone.end(), 0);

    OptimizerResult result;
    result.trace.push_back(detail::summarize(0, x));
    result.ideal_trace.push_back(z);
    for (std::size_t g = 1; g <= cfg.generations; ++g) {
        for (std::size_t k = 0; k < p; ++k) {
            const auto& pool = rng.uniform() < cfg.delta ? hood[k] : everyone;
            const auto a = pool[rng.below(pool.size())];
            auto b = pool[rng.below(pool.size())];
            if (pool.size() > 1) {
                while (b == a) b = pool[rng.below(pool.size())];
            }
            auto child = single_point_crossover(x[a].mask, x[b].mask, cfg.p_c, rng).first;
            child = detail::vary(std::move(child), cfg.p_m, cfg.mutation, limit, rng);
            auto y = detail::score(std::move(child), ctx);
            for (std::size_t m = 0; m < 2; ++m) z.f[m] = std::min(z.f[m], y.obj.f[m]);
            for (auto j : hood[k]) {
                if (tchebycheff(y.obj, weights[j], z) < tchebycheff(x[j].obj, weights[j], z)) x[j] = y;
            }
        }
        result.trace.push_back(detail::summarize(g, x));
        result.ideal_trace.push_back(z);
    }
    result.front = detail::unique_masks(non_dominated(x));
    result.population = std::move(x);
    return result;
}

// ---------------------------------------------------------------------------

/// Up to `k` distinct masks from `pool`: fronts in order, each by descending
/// crowding distance, so later fronts only fill in when front 0 is short.
inline std::vector<ScoredSolution> select_candidates(const std::vector<ScoredSolution>& pool, std::size_t k = 10) {
    return crowded_selection(detail::unique_masks(pool), k);
}

}  // namespace eegsel
