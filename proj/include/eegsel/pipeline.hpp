#pragma once

// Run configuration, per-subject orchestration, job scheduling and the
// aggregate outputs (results, candidates, frontier, report, ANOVA).

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "eegsel/analysis.hpp"
#include "eegsel/classify.hpp"
#include "eegsel/features.hpp"
#include "eegsel/greedy.hpp"
#include "eegsel/montage.hpp"
#include "eegsel/objectives.hpp"
#include "eegsel/optimizers.hpp"
#include "eegsel/signal.hpp"
#include "eegsel/trialfile.hpp"

namespace eegsel {

enum class Algorithm { Nsga2, Mopso, Moead, Greedy };

inline std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Nsga2: return "nsga2";
        case Algorithm::Mopso: return "mopso";
        case Algorithm::Moead: return "moead";
        case Algorithm::Greedy: return "greedy";
    }
    return "unknown";
}

inline Algorithm parse_algorithm(const std::string& s) {
    for (auto a : {Algorithm::Nsga2, Algorithm::Mopso, Algorithm::Moead, Algorithm::Greedy}) {
        if (algorithm_name(a) == s) return a;
    }
    throw ConfigError("unknown algorithm '" + s + "' (expected nsga2, mopso, moead or greedy)");
}

struct RunConfig {
    std::vector<std::string> datasets;
    std::string montage = "physionet64";
    std::vector<Algorithm> algorithms = {Algorithm::Nsga2};
    std::size_t max_channels = 16;
    std::vector<std::uint64_t> seeds = {0};
    std::size_t candidates = 10;
    bool normalize_objectives = false;
    RankBy rank_by = RankBy::CvSelected;
    BandpassConfig bandpass;
    bool baseline_correction = true;
    WelchConfig welch;
    std::optional<TimeWindow> baseline_window;
    std::optional<TimeWindow> activation_window;
    SplitSpec split;
    PipelineConfig classifier;
    SpatialKernelConfig spatial;
    Nsga2Config nsga2;
    MopsoConfig mopso;
    MoeadConfig moead;
    std::string output = "out";

    void validate() const {
        if (datasets.empty()) throw ConfigError("no datasets configured");
        if (seeds.empty()) throw ConfigError("seeds must not be empty");
        if (algorithms.empty()) throw ConfigError("no algorithms configured");
        if (max_channels < 1) throw ConfigError("max_channels must be positive");
        if (candidates < 1) throw ConfigError("candidates must be positive");
        if (classifier.mrmr_k < 1) throw ConfigError("mrmr_k must be positive");
        if (classifier.cv_folds < 2 || classifier.classifier.folds < 2) throw ConfigError("need at least two CV folds");
        if (!(spatial.sigma > 0.0)) throw ConfigError("spatial sigma must be positive");
        if (!(welch.overlap >= 0.0 && welch.overlap < 1.0) || welch.segment_len < 2)
            throw ConfigError("invalid Welch configuration");
        if (!(welch.band_lo < welch.band_hi)) throw ConfigError("invalid Welch band");
        nsga2.validate();
        mopso.validate();
        moead.validate();
    }
};

// ---------------------------------------------------------------------------
// JSON configuration

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline TimeWindow window_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be [start, end] in seconds");
    TimeWindow w{j[0].get<double>(), j[1].get<double>()};
    if (!(w.start_s < w.end_s)) throw ConfigError(std::string(what) + " must have start < end");
    return w;
}

inline MutationMode mutation_from(const json& j, const char* key, MutationMode fallback) {
    if (!j.contains(key)) return fallback;
    const auto s = j.at(key).get<std::string>();
    if (s == "per_bit") return MutationMode::PerBit;
    if (s == "per_individual") return MutationMode::PerIndividual;
    throw ConfigError("mutation must be per_bit or per_individual");
}

inline std::string mutation_name(MutationMode m) { return m == MutationMode::PerBit ? "per_bit" : "per_individual"; }

}  // namespace detail

/// Relative dataset paths are taken relative to `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    using detail::get_if;
    RunConfig cfg;
    try {
        detail::check_keys(j,
                           {"datasets", "montage", "algorithm", "algorithms", "max_channels", "seeds", "candidates",
                            "normalize_objectives", "rank_candidates_by", "preprocessing", "welch", "windows", "split",
                            "classifier", "spatial", "nsga2", "mopso", "moead", "output"},
                           "config");
        if (j.contains("datasets")) {
            cfg.datasets.clear();
            for (const auto& d : j.at("datasets")) {
                std::filesystem::path p = d.get<std::string>();
                if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
                cfg.datasets.push_back(p.lexically_normal().string());
            }
        }
        get_if(j, "montage", cfg.montage);
        if (j.contains("algorithm") && j.contains("algorithms")) throw ConfigError("give either algorithm or algorithms");
        if (j.contains("algorithm")) cfg.algorithms = {parse_algorithm(j.at("algorithm").get<std::string>())};
        if (j.contains("algorithms")) {
            cfg.algorithms.clear();
            for (const auto& a : j.at("algorithms")) cfg.algorithms.push_back(parse_algorithm(a.get<std::string>()));
        }
        get_if(j, "max_channels", cfg.max_channels);
        get_if(j, "seeds", cfg.seeds);
        get_if(j, "candidates", cfg.candidates);
        get_if(j, "normalize_objectives", cfg.normalize_objectives);
        if (j.contains("rank_candidates_by")) {
            const auto s = j.at("rank_candidates_by").get<std::string>();
            if (s == "cv") {
                cfg.rank_by = RankBy::CvSelected;
            } else if (s == "test") {
                cfg.rank_by = RankBy::TestSelected;
            } else {
                throw ConfigError("rank_candidates_by must be cv or test");
            }
        }
        if (j.contains("preprocessing")) {
            const auto& p = j.at("preprocessing");
            detail::check_keys(p, {"bandpass", "baseline_correction"}, "preprocessing");
            if (p.contains("bandpass")) {
                const auto& b = p.at("bandpass");
                detail::check_keys(b, {"order", "f_lo", "f_hi"}, "preprocessing.bandpass");
                get_if(b, "order", cfg.bandpass.order);
                get_if(b, "f_lo", cfg.bandpass.f_lo);
                get_if(b, "f_hi", cfg.bandpass.f_hi);
            }
            get_if(p, "baseline_correction", cfg.baseline_correction);
        }
        if (j.contains("welch")) {
            const auto& w = j.at("welch");
            detail::check_keys(w, {"segment_len", "overlap", "window", "band"}, "welch");
            get_if(w, "segment_len", cfg.welch.segment_len);
            get_if(w, "overlap", cfg.welch.overlap);
            if (w.contains("window")) {
                const auto s = w.at("window").get<std::string>();
                if (s == "hamming") {
                    cfg.welch.window = WindowKind::Hamming;
                } else if (s == "rectangular") {
                    cfg.welch.window = WindowKind::Rectangular;
                } else {
                    throw ConfigError("welch.window must be hamming or rectangular");
                }
            }
            if (w.contains("band")) {
                const auto band = detail::window_from(w.at("band"), "welch.band");
                cfg.welch.band_lo = band.start_s;
                cfg.welch.band_hi = band.end_s;
            }
        }
        if (j.contains("windows")) {
            const auto& w = j.at("windows");
            detail::check_keys(w, {"baseline", "activation"}, "windows");
            if (w.contains("baseline")) cfg.baseline_window = detail::window_from(w.at("baseline"), "windows.baseline");
            if (w.contains("activation")) cfg.activation_window = detail::window_from(w.at("activation"), "windows.activation");
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            detail::check_keys(s, {"test_fraction", "stratified", "seed"}, "split");
            get_if(s, "test_fraction", cfg.split.test_fraction);
            get_if(s, "stratified", cfg.split.stratified);
            get_if(s, "seed", cfg.split.seed);
        }
        if (j.contains("classifier")) {
            const auto& c = j.at("classifier");
            detail::check_keys(c, {"grid", "epochs", "folds", "mrmr_k", "cv_folds"}, "classifier");
            get_if(c, "grid", cfg.classifier.classifier.grid);
            get_if(c, "epochs", cfg.classifier.classifier.epochs);
            get_if(c, "folds", cfg.classifier.classifier.folds);
            get_if(c, "mrmr_k", cfg.classifier.mrmr_k);
            get_if(c, "cv_folds", cfg.classifier.cv_folds);
        }
        if (j.contains("spatial")) {
            detail::check_keys(j.at("spatial"), {"sigma"}, "spatial");
            get_if(j.at("spatial"), "sigma", cfg.spatial.sigma);
        }
        if (j.contains("nsga2")) {
            const auto& o = j.at("nsga2");
            detail::check_keys(o, {"pop_size", "generations", "p_c", "p_m", "mutation"}, "nsga2");
            get_if(o, "pop_size", cfg.nsga2.pop_size);
            get_if(o, "generations", cfg.nsga2.generations);
            get_if(o, "p_c", cfg.nsga2.p_c);
            get_if(o, "p_m", cfg.nsga2.p_m);
            cfg.nsga2.mutation = detail::mutation_from(o, "mutation", cfg.nsga2.mutation);
        }
        if (j.contains("mopso")) {
            const auto& o = j.at("mopso");
            detail::check_keys(o,
                               {"swarm_size", "iterations", "inertia", "c1", "c2", "repository", "grid_divisions", "p_m",
                                "velocity_clamp", "mutation"},
                               "mopso");
            get_if(o, "swarm_size", cfg.mopso.swarm_size);
            get_if(o, "iterations", cfg.mopso.iterations);
            get_if(o, "inertia", cfg.mopso.inertia);
            get_if(o, "c1", cfg.mopso.c1);
            get_if(o, "c2", cfg.mopso.c2);
            get_if(o, "repository", cfg.mopso.repository);
            get_if(o, "grid_divisions", cfg.mopso.grid_divisions);
            get_if(o, "p_m", cfg.mopso.p_m);
            get_if(o, "velocity_clamp", cfg.mopso.velocity_clamp);
            cfg.mopso.mutation = detail::mutation_from(o, "mutation", cfg.mopso.mutation);
        }
        if (j.contains("moead")) {
            const auto& o = j.at("moead");
            detail::check_keys(o, {"subproblems", "neighborhood", "generations", "p_c", "p_m", "delta", "mutation"},
                               "moead");
            get_if(o, "subproblems", cfg.moead.subproblems);
            get_if(o, "neighborhood", cfg.moead.neighborhood);
            get_if(o, "generations", cfg.moead.generations);
            get_if(o, "p_c", cfg.moead.p_c);
            get_if(o, "p_m", cfg.moead.p_m);
            get_if(o, "delta", cfg.moead.delta);
            cfg.moead.mutation = detail::mutation_from(o, "mutation", cfg.moead.mutation);
        }
        get_if(j, "output", cfg.output);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(j, std::filesystem::path(path).parent_path());
}

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["datasets"] = c.datasets;
    j["montage"] = c.montage;
    std::vector<std::string> algs;
    for (auto a : c.algorithms) algs.push_back(algorithm_name(a));
    j["algorithms"] = algs;
    j["max_channels"] = c.max_channels;
    j["seeds"] = c.seeds;
    j["candidates"] = c.candidates;
    j["normalize_objectives"] = c.normalize_objectives;
    j["rank_candidates_by"] = c.rank_by == RankBy::CvSelected ? "cv" : "test";
    j["preprocessing"] = {{"bandpass", {{"order", c.bandpass.order}, {"f_lo", c.bandpass.f_lo}, {"f_hi", c.bandpass.f_hi}}},
                          {"baseline_correction", c.baseline_correction}};
    j["welch"] = {{"segment_len", c.welch.segment_len},
                  {"overlap", c.welch.overlap},
                  {"window", c.welch.window == WindowKind::Hamming ? "hamming" : "rectangular"},
                  {"band", {c.welch.band_lo, c.welch.band_hi}}};
    nlohmann::json w = nlohmann::json::object();
    if (c.baseline_window) w["baseline"] = {c.baseline_window->start_s, c.baseline_window->end_s};
    if (c.activation_window) w["activation"] = {c.activation_window->start_s, c.activation_window->end_s};
    j["windows"] = w;
    j["split"] = {{"test_fraction", c.split.test_fraction}, {"stratified", c.split.stratified}, {"seed", c.split.seed}};
    j["classifier"] = {{"grid", c.classifier.classifier.grid},
                       {"epochs", c.classifier.classifier.epochs},
                       {"folds", c.classifier.classifier.folds},
                       {"mrmr_k", c.classifier.mrmr_k},
                       {"cv_folds", c.classifier.cv_folds}};
    j["spatial"] = {{"sigma", c.spatial.sigma}};
    j["nsga2"] = {{"pop_size", c.nsga2.pop_size},
                  {"generations", c.nsga2.generations},
                  {"p_c", c.nsga2.p_c},
                  {"p_m", c.nsga2.p_m},
                  {"mutation", detail::mutation_name(c.nsga2.mutation)}};
    j["mopso"] = {{"swarm_size", c.mopso.swarm_size},
                  {"iterations", c.mopso.iterations},
                  {"inertia", c.mopso.inertia},
                  {"c1", c.mopso.c1},
                  {"c2", c.mopso.c2},
                  {"repository", c.mopso.repository},
                  {"grid_divisions", c.mopso.grid_divisions},
                  {"p_m", c.mopso.p_m},
                  {"velocity_clamp", c.mopso.velocity_clamp},
                  {"mutation", detail::mutation_name(c.mopso.mutation)}};
    j["moead"] = {{"subproblems", c.moead.subproblems},
                  {"neighborhood", c.moead.neighborhood},
                  {"generations", c.moead.generations},
                  {"p_c", c.moead.p_c},
                  {"p_m", c.moead.p_m},
                  {"delta", c.moead.delta},
                  {"mutation", detail::mutation_name(c.moead.mutation)}};
    j["output"] = c.output;
    return j;
}

// ---------------------------------------------------------------------------
// Per-subject orchestration

/// Independent stream seeds derived from a run seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base * 0x9e3779b97f4a7c15ULL + stream + 0x632be59bd9b4e019ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t { kSplitStream = 1, kOptimizerStream = 2, kClassifierStream = 3 };

/// Everything shared by all algorithms on one (subject, seed) pair.
struct PreparedSubject {
    std::string subject;
    std::uint64_t seed = 0;
    Montage montage;
    TrialSet trials;  // preprocessed
    Partition split;
    ObjectiveContext ctx;
    std::shared_ptr<const FeatureBank> bank;
    PipelineConfig classifier;
};

struct SubjectRun {
    RunResult result;
    std::vector<std::string> channel_names;  // mask bit order
    std::vector<ConvergenceRow> trace;
    std::optional<GreedyTrace> greedy;
};

namespace detail {

template <typename F>
auto in_stage(const std::string& subject, const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(subject + " [" + stage + "]: " + e.what());
    } catch (const DataError& e) {
        throw DataError(subject + " [" + stage + "]: " + e.what());
    }
}

}  // namespace detail

/// Split, preprocess, build the objective context from training trials only,
/// and precompute features over all trials.
inline PreparedSubject prepare_subject(const RunConfig& cfg, const TrialSet& raw, const std::string& subject,
                                       std::uint64_t seed) {
    PreparedSubject p;
    p.subject = subject;
    p.seed = seed;
    p.classifier = cfg.classifier;
    p.classifier.classifier.seed = derive_seed(seed, kClassifierStream);
    detail::in_stage(subject, "montage", [&] {
        p.montage = resolve_montage(cfg.montage).select(raw.channel_names());
    });
    TrialSet trials = raw;
    trials.set_windows(cfg.baseline_window.value_or(raw.baseline()), cfg.activation_window.value_or(raw.activation()));
    detail::in_stage(subject, "validate", [&] { trials.validate(); });
    if (cfg.max_channels > trials.n_channels())
        throw ConfigError(subject + ": max_channels exceeds channel count");

    SplitSpec split = cfg.split;
    split.seed = derive_seed(seed ^ cfg.split.seed, kSplitStream);
    p.split = detail::in_stage(subject, "split", [&] { return stratified_split(trials, split); });

    detail::in_stage(subject, "preprocess", [&] {
        trials = bandpass(trials, cfg.bandpass);
        if (cfg.baseline_correction) {
            if (trials.baseline().end_s <= trials.baseline().start_s)
                throw ConfigError("baseline correction requested without a baseline window");
            const auto means = channel_means(trials.select_trials(p.split.train), trials.baseline());
            trials = baseline_correct(trials, means);
        }
    });
    detail::in_stage(subject, "objectives", [&] {
        if (trials.baseline().end_s <= trials.baseline().start_s) throw ConfigError("ITTRD needs a baseline window");
        const auto ittrd = ittrd_matrix(trials.select_trials(p.split.train), cfg.welch);
        p.ctx.sp = relevance_vector(p.montage, cfg.spatial);
        p.ctx.disc = channel_discriminability(ittrd);
        p.ctx.max_channels = cfg.max_channels;
        if (cfg.normalize_objectives) p.ctx = p.ctx.normalized();
        p.ctx.validate();
    });
    p.bank = detail::in_stage(subject, "features", [&] {
        return std::make_shared<const FeatureBank>(build_feature_bank(trials));
    });
    p.trials = std::move(trials);
    return p;
}

inline CandidateResult score_candidate(const PreparedSubject& p, const ChannelMask& mask) {
    CandidateResult c;
    c.mask = mask;
    c.objectives = evaluate(mask, p.ctx);
    const auto ch = mask.indices();
    const auto test = fit_and_score(*p.bank, p.split.train, p.split.test, ch, p.classifier);
    c.acc_all = test.acc_all;
    c.acc_sel = test.acc_sel;
    c.cv_sel = cv_accuracy(*p.bank, p.split.train, ch, p.classifier, p.classifier.classifier.seed);
    return c;
}

inline SubjectRun run_algorithm(const RunConfig& cfg, const PreparedSubject& p, Algorithm alg) {
    SubjectRun run;
    run.result.subject = p.subject;
    run.result.algorithm = algorithm_name(alg);
    run.result.seed = p.seed;
    run.channel_names = p.trials.channel_names();
    const auto opt_seed = derive_seed(p.seed, kOptimizerStream);
    const auto stage = algorithm_name(alg);
    std::vector<ChannelMask> masks;
    if (alg == Algorithm::Greedy) {
        run.greedy = detail::in_stage(p.subject, "greedy", [&] {
            auto scorer = make_cv_scorer(p.bank, p.split.train, p.classifier, p.classifier.classifier.seed);
            return greedy_select(p.trials, scorer, cfg.max_channels);
        });
        masks.push_back(run.greedy->final_subset);
    } else {
        OptimizerResult res = detail::in_stage(p.subject, stage.c_str(), [&] {
            switch (alg) {
                case Algorithm::Nsga2: return run_nsga2(p.ctx, cfg.nsga2, opt_seed);
                case Algorithm::Mopso: return run_mopso(p.ctx, cfg.mopso, opt_seed);
                default: return run_moead(p.ctx, cfg.moead, opt_seed);
            }
        });
        run.trace = std::move(res.trace);
        auto pool = res.front;
        pool.insert(pool.end(), res.population.begin(), res.population.end());
        for (auto& s : select_candidates(pool, cfg.candidates)) masks.push_back(std::move(s.mask));
    }
    detail::in_stage(p.subject, "evaluate", [&] {
        for (const auto& m : masks) run.result.candidates.push_back(score_candidate(p, m));
        run.result.chosen = choose_final_subset(run.result.candidates, p.montage.refs(), cfg.rank_by);
    });
    return run;
}

inline SubjectRun run_subject(const RunConfig& cfg, const TrialSet& trials, const std::string& subject,
                              Algorithm alg, std::uint64_t seed) {
    return run_algorithm(cfg, prepare_subject(cfg, trials, subject, seed), alg);
}

// ---------------------------------------------------------------------------
// Job scheduling

/// Worker count from EEGSEL_WORKERS, else the hardware concurrency.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("EEGSEL_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
        throw ConfigError("EEGSEL_WORKERS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on a bounded pool. If any task throws, the
/// exception of the lowest failing index is rethrown after all workers join.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t w = std::min(workers, n);
    if (w <= 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < w; ++k) pool.emplace_back(body);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// ---------------------------------------------------------------------------
// Output files

namespace detail {

inline std::string subject_id(const std::string& path) { return std::filesystem::path(path).stem().string(); }

inline std::string channel_list(const ChannelMask& m, const Montage& montage) {
    std::string s;
    for (auto i : m.indices()) {
        if (!s.empty()) s += ' ';
        s += montage[i].name;
    }
    return s;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + p.string() + "'");
    return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad number '" + s + "' in " + where);
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t col(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV '" + path + "'");
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto row = split_csv_line(line);
        if (row.size() != t.header.size()) throw DataError("ragged row in '" + path + "'");
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace detail

inline void write_candidates_csv(std::ostream& os, std::span<const SubjectRun> runs, const Montage& montage) {
    os << "subject,algorithm,seed,k,f1,f2,popcount,channels,acc_all,acc_sel,cv_sel,chosen\n";
    for (const auto& r : runs) {
        for (std::size_t k = 0; k < r.result.candidates.size(); ++k) {
            const auto& c = r.result.candidates[k];
            os << r.result.subject << ',' << r.result.algorithm << ',' << r.result.seed << ',' << k << ','
               << format_number(c.objectives[0]) << ',' << format_number(c.objectives[1]) << ',' << c.mask.popcount()
               << ',' << detail::channel_list(c.mask, montage) << ',' << format_number(c.acc_all) << ','
               << format_number(c.acc_sel) << ',' << format_number(c.cv_sel) << ',' << (k == r.result.chosen ? 1 : 0)
               << '\n';
        }
    }
}

struct RunSummary {
    std::vector<SubjectRun> runs;  // ordered by subject, seed, algorithm
};

using ProgressLog = std::function<void(const std::string&)>;

/// Executes every (dataset, seed) job and writes the output directory:
///   config.json, results.csv, candidates.csv,
///   convergence/<subject>_<algorithm>_s<seed>.csv,
///   greedy/<subject>_s<seed>.csv,
///   selection_<algorithm>.csv and .svg
inline RunSummary run_all(const RunConfig& cfg, const ProgressLog& log = {}) {
    cfg.validate();
    const auto montage = resolve_montage(cfg.montage);
    for (const auto& d : cfg.datasets) {
        if (!std::filesystem::exists(d)) throw DataError("dataset '" + d + "' does not exist");
    }
    std::set<std::string> ids;
    for (const auto& d : cfg.datasets) {
        const auto id = detail::subject_id(d);
        if (id.find(',') != std::string::npos) throw ConfigError("subject id '" + id + "' contains a comma");
        if (!ids.insert(id).second) throw ConfigError("duplicate subject id '" + id + "'");
    }

    struct Job {
        std::size_t dataset;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
        for (auto s : cfg.seeds) jobs.push_back({d, s});
    }
    std::vector<std::vector<SubjectRun>> out(jobs.size());
    std::mutex log_mutex;
    parallel_for(jobs.size(), worker_count(), [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto& path = cfg.datasets[job.dataset];
        const auto id = detail::subject_id(path);
        const auto trials = read_trialfile(path);
        const auto prepared = prepare_subject(cfg, trials, id, job.seed);
        for (auto alg : cfg.algorithms) {
            out[i].push_back(run_algorithm(cfg, prepared, alg));
            if (log) {
                const auto& r = out[i].back().result;
                std::lock_guard lock(log_mutex);
                log("[job " + std::to_string(i + 1) + "/" + std::to_string(jobs.size()) + " " + id + "/" +
                    r.algorithm + "/seed" + std::to_string(job.seed) + "] acc_all=" +
                    format_number(r.chosen_candidate().acc_all) + " acc_sel=" +
                    format_number(r.chosen_candidate().acc_sel) + " pr=" + std::to_string(r.pr()));
            }
        }
    });

    RunSummary summary;
    for (auto& v : out) {
        for (auto& r : v) summary.runs.push_back(std::move(r));
    }

    namespace fs = std::filesystem;
    const fs::path dir = cfg.output;
    fs::create_directories(dir);
    {
        auto f = detail::open_out(dir / "config.json");
        f << to_json(cfg).dump(2) << '\n';
    }
    // Candidate masks follow each trial file's channel order, which may
    // differ from the montage order; remap for the montage-level tables.
    std::vector<RunResult> results;
    std::vector<SubjectRun> montage_runs;
    for (const auto& run : summary.runs) {
        SubjectRun r = run;
        for (auto& c : r.result.candidates) {
            ChannelMask m(montage.size());
            for (auto idx : c.mask.indices()) m.set(*montage.find(r.channel_names[idx]), true);
            c.mask = std::move(m);
        }
        results.push_back(r.result);
        montage_runs.push_back(std::move(r));
    }
    {
        auto f = detail::open_out(dir / "results.csv");
        write_results_csv(f, results);
    }
    {
        auto f = detail::open_out(dir / "candidates.csv");
        write_candidates_csv(f, montage_runs, montage);
    }
    for (const auto& r : summary.runs) {
        const auto tag = r.result.subject + "_" + r.result.algorithm + "_s" + std::to_string(r.result.seed);
        if (!r.trace.empty()) {
            fs::create_directories(dir / "convergence");
            auto f = detail::open_out(dir / "convergence" / (tag + ".csv"));
            write_convergence_csv(f, r.trace);
        }
        if (r.greedy) {
            fs::create_directories(dir / "greedy");
            auto f = detail::open_out(dir / "greedy" / (r.result.subject + "_s" + std::to_string(r.result.seed) + ".csv"));
            r.greedy->write_csv(f, r.channel_names);
        }
    }
    for (auto alg : cfg.algorithms) {
        std::vector<RunResult> subset;
        for (const auto& r : results) {
            if (r.algorithm == algorithm_name(alg)) subset.push_back(r);
        }
        const auto sf = selection_frequency(subset, montage);
        auto csv = detail::open_out(dir / ("selection_" + algorithm_name(alg) + ".csv"));
        sf.write_csv(csv);
        auto svg = detail::open_out(dir / ("selection_" + algorithm_name(alg) + ".svg"));
        write_selection_svg(svg, sf, montage);
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Aggregation over written results

struct ReportRow {
    std::string algorithm;
    std::size_t runs = 0;
    double all = 0.0, all_sd = 0.0, sel = 0.0, sel_sd = 0.0, pr = 0.0;
};

namespace detail {

inline std::size_t algorithm_order(const std::string& name) {
    static const std::vector<std::string> order = {"nsga2", "mopso", "moead", "greedy"};
    const auto it = std::find(order.begin(), order.end(), name);
    return static_cast<std::size_t>(it - order.begin());
}

inline bool algorithm_less(const std::string& a, const std::string& b) {
    const auto oa = algorithm_order(a), ob = algorithm_order(b);
    return oa != ob ? oa < ob : a < b;
}

inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// One row per algorithm: mean and sample SD of accuracies, mean PR.
inline std::vector<ReportRow> build_report(const std::vector<std::string>& results_csvs) {
    std::map<std::string, std::array<std::vector<double>, 3>, decltype(&detail::algorithm_less)> acc(&detail::algorithm_less);
    for (const auto& path : results_csvs) {
        const auto t = detail::read_csv(path);
        const auto ca = t.col("algorithm"), call = t.col("acc_all"), csel = t.col("acc_sel"), cpr = t.col("pr");
        for (const auto& row : t.rows) {
            auto& slot = acc[row[ca]];
            slot[0].push_back(detail::parse_double(row[call], path));
            slot[1].push_back(detail::parse_double(row[csel], path));
            slot[2].push_back(detail::parse_double(row[cpr], path));
        }
    }
    std::vector<ReportRow> out;
    for (const auto& [alg, v] : acc) {
        ReportRow r;
        r.algorithm = alg;
        r.runs = v[0].size();
        std::tie(r.all, r.all_sd) = detail::mean_sd(v[0]);
        std::tie(r.sel, r.sel_sd) = detail::mean_sd(v[1]);
        r.pr = detail::mean_sd(v[2]).first;
        out.push_back(r);
    }
    return out;
}

inline void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
    os << "algorithm,runs,all,all_sd,sel,sel_sd,pr\n";
    for (const auto& r : rows) {
        os << r.algorithm << ',' << r.runs << ',' << format_number(r.all) << ',' << format_number(r.all_sd) << ','
           << format_number(r.sel) << ',' << format_number(r.sel_sd) << ',' << format_number(r.pr) << '\n';
    }
}

struct FrontierRow {
    std::string dataset;
    std::string algorithm;
    std::size_t k = 0;
    double f1 = 0.0, f2 = 0.0, popcount = 0.0;
};

/// Averages the k-th candidate across subjects (and seeds) for each
/// algorithm. Each run's candidates are ordered by f1 ascending (ties by f2)
/// and padded with their last entry, or truncated, to `k_total` rows.
/// The greedy baseline has no front and is skipped.
inline std::vector<FrontierRow> average_frontier(const std::string& candidates_csv, const std::string& dataset,
                                                 std::size_t k_total = 10) {
    const auto t = detail::read_csv(candidates_csv);
    const auto cs = t.col("subject"), ca = t.col("algorithm"), cseed = t.col("seed"), cf1 = t.col("f1"),
               cf2 = t.col("f2"), cp = t.col("popcount");
    using Key = std::pair<std::string, std::string>;  // algorithm, subject#seed
    std::map<Key, std::vector<std::array<double, 3>>> by_run;
    for (const auto& row : t.rows) {
        if (row[ca] == "greedy") continue;
        by_run[{row[ca], row[cs] + "#" + row[cseed]}].push_back(
            {detail::parse_double(row[cf1], candidates_csv), detail::parse_double(row[cf2], candidates_csv),
             detail::parse_double(row[cp], candidates_csv)});
    }
    std::map<std::string, std::pair<std::vector<std::array<double, 3>>, std::size_t>, decltype(&detail::algorithm_less)>
        sums(&detail::algorithm_less);
    for (auto& [key, list] : by_run) {
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
            return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
        });
        auto& [acc, count] = sums[key.first];
        acc.resize(k_total, {0.0, 0.0, 0.0});
        for (std::size_t k = 0; k < k_total; ++k) {
            const auto& src = list[std::min(k, list.size() - 1)];
            for (int c = 0; c < 3; ++c) acc[k][c] += src[c];
        }
        ++count;
    }
    std::vector<FrontierRow> out;
    for (const auto& [alg, v] : sums) {
        for (std::size_t k = 0; k < k_total; ++k) {
            const double n = static_cast<double>(v.second);
            out.push_back({dataset, alg, k, v.first[k][0] / n, v.first[k][1] / n, v.first[k][2] / n});
        }
    }
    return out;
}

inline void write_frontier_csv(std::ostream& os, const std::vector<FrontierRow>& rows) {
    os << "dataset,algorithm,k,f1,f2,popcount\n";
    for (const auto& r : rows) {
        os << r.dataset << ',' << r.algorithm << ',' << r.k << ',' << format_number(r.f1) << ',' << format_number(r.f2)
           << ',' << format_number(r.popcount) << '\n';
    }
}

/// One-way ANOVA of a results column across algorithms, averaging seeds per
/// subject first.
inline std::pair<AnovaResult, std::vector<std::string>> anova_from_results(const std::vector<std::string>& results_csvs,
                                                                           const std::string& metric = "acc_sel") {
    if (metric != "acc_sel" && metric != "acc_all") throw ConfigError("metric must be acc_sel or acc_all");
    std::map<std::string, std::map<std::string, std::vector<double>>, decltype(&detail::algorithm_less)> per(
        &detail::algorithm_less);
    for (const auto& path : results_csvs) {
        const auto t = detail::read_csv(path);
        const auto ca = t.col("algorithm"), cs = t.col("subject"), cm = t.col(metric);
        for (const auto& row : t.rows) per[row[ca]][row[cs]].push_back(detail::parse_double(row[cm], path));
    }
    std::vector<std::vector<double>> groups;
    std::vector<std::string> names;
    for (const auto& [alg, subjects] : per) {
        names.push_back(alg);
        std::vector<double> g;
        for (const auto& [s, v] : subjects) g.push_back(detail::mean_sd(v).first);
        groups.push_back(std::move(g));
    }
    return {anova_oneway(groups), names};
}

}  // namespace eegsel
