#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eegsel/pipeline.hpp"
#include "eegsel/synth.hpp"
#include "eegsel/trialfile.hpp"

using namespace eegsel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("eegsel_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

TrialSet random_set(std::uint64_t seed) {
    Rng rng(seed);
    TrialSet t(7, 3, 50, 125.0);
    t.set_channel_names({"C3", "Cz", "\xC3\xA9lectrode"});
    t.set_windows({0.0, 0.125}, {0.125, 0.375});
    for (auto& v : t.data()) v = static_cast<float>(rng.normal() * 20.0);
    for (auto& l : t.labels()) l = static_cast<std::uint8_t>(rng.below(2));
    return t;
}

SynthConfig small_synth(std::uint64_t seed, std::size_t per_class = 30) {
    SynthConfig sc;
    sc.seed = seed;
    sc.trials_per_class = per_class;
    sc.signal_channels = {"C3", "C4"};
    return sc;
}

RunConfig fast_config() {
    RunConfig cfg;
    cfg.datasets = {"unused"};
    cfg.montage = "bciiv2a22";
    cfg.max_channels = 6;
    cfg.nsga2.generations = 40;
    cfg.mopso.iterations = 20;
    cfg.moead.generations = 40;
    cfg.classifier.classifier.epochs = 15;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(EEGSEL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(TrialFile, RoundTripIsBitExact) {
    const auto t = random_set(1);
    const auto bytes = serialize_trials(t);
    EXPECT_EQ(bytes.size(), 4u + 2 + 12 + 4 + 16 + (2 + 2) + (2 + 2) + (2 + 10) + 7 + 4 * 7 * 3 * 50);
    const auto back = deserialize_trials(bytes);
    EXPECT_EQ(back, t);
    EXPECT_EQ(serialize_trials(back), bytes);

    const auto dir = scratch("rt");
    write_trialfile(t, (dir / "a.eegt").string());
    EXPECT_EQ(read_trialfile((dir / "a.eegt").string()), t);
    EXPECT_TRUE(verify_trialfile((dir / "a.eegt").string()).ok());
    fs::remove_all(dir);
}

TEST(TrialFile, LittleEndianHeader) {
    const auto bytes = serialize_trials(random_set(2));
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "EEGT");
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[5], 0);
    EXPECT_EQ(bytes[6], 7);  // n_trials low byte
    // fs = 125.0f = 0x42FA0000
    EXPECT_EQ(bytes[18], 0x00);
    EXPECT_EQ(bytes[20], 0xFA);
    EXPECT_EQ(bytes[21], 0x42);
}

TEST(TrialFile, RejectsCorruptInput) {
    auto bytes = serialize_trials(random_set(3));
    auto truncated = bytes;
    truncated.resize(truncated.size() - 3);
    try {
        deserialize_trials(truncated);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("payload length"), std::string::npos);
    }
    auto version = bytes;
    version[4] = 0x0F;
    version[5] = 0x27;  // 9999
    try {
        deserialize_trials(version);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("version 9999"), std::string::npos);
    }
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(deserialize_trials(magic), DataError);
    auto label = bytes;
    const std::size_t label_off = bytes.size() - 4 * 7 * 3 * 50 - 7;
    label[label_off + 2] = 2;
    EXPECT_THROW(deserialize_trials(label), DataError);
    EXPECT_THROW(read_trialfile("/nonexistent/file.eegt"), DataError);
}

TEST(TrialFile, VerifierReportsOffsetsAndBalance) {
    const auto dir = scratch("verify");
    auto t = random_set(4);
    auto bytes = serialize_trials(t);
    bytes.pop_back();
    {
        std::ofstream out(dir / "short.eegt", std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    auto rep = verify_trialfile((dir / "short.eegt").string());
    ASSERT_FALSE(rep.ok());
    EXPECT_NE(rep.violations[0].find("starting at byte"), std::string::npos);

    std::fill(t.labels().begin(), t.labels().end(), 1);
    write_trialfile(t, (dir / "one.eegt").string());
    rep = verify_trialfile((dir / "one.eegt").string());
    EXPECT_TRUE(rep.ok());
    ASSERT_EQ(rep.warnings.size(), 1u);
    fs::remove_all(dir);
}

TEST(Synth, ErdDepthShowsUpInIttrd) {
    const auto m = builtin_montage("physionet64");
    auto sc = small_synth(5, 40);
    const auto t = synth_mi_dataset(m, sc);
    EXPECT_EQ(t.n_channels(), 64u);
    EXPECT_EQ(t.n_samples(), 720u);
    EXPECT_EQ(t.count_label(0), 40u);
    const auto it = ittrd_matrix(t, WelchConfig{});
    const auto c3 = *m.find("C3"), c4 = *m.find("C4");
    // C3 is left hemisphere: the drop appears in class 1 trials; C4 in class 0.
    for (auto [ch, cls] : {std::pair{c3, 1}, std::pair{c4, 0}}) {
        double s = 0.0, other = 0.0;
        int n = 0, no = 0;
        for (std::size_t k = 0; k < t.n_trials(); ++k) {
            if (t.labels()[k] == cls) {
                s += it.at(k, ch);
                ++n;
            } else {
                other += it.at(k, ch);
                ++no;
            }
        }
        EXPECT_GE(s / n, -60.0);
        EXPECT_LE(s / n, -40.0);
        EXPECT_GT(other / no, -10.0);
    }
    // Every signal-channel column mean is below every noise-channel mean.
    const auto disc = channel_discriminability(it);
    for (std::size_t c = 0; c < 64; ++c) {
        if (c != c3 && c != c4) {
            EXPECT_LT(disc[c], disc[c3]);
            EXPECT_LT(disc[c], disc[c4]);
        }
    }
}

TEST(Synth, NullDepthHasNoNegativeColumns) {
    const auto m = builtin_montage("bciiv2a22");
    auto sc = small_synth(6, 40);
    sc.erd_depth = 1e-9;
    const auto t = synth_mi_dataset(m, sc);
    const auto it = ittrd_matrix(t, WelchConfig{});
    for (std::size_t c = 0; c < t.n_channels(); ++c) {
        double mean = 0.0, sq = 0.0;
        const double n = static_cast<double>(t.n_trials());
        for (std::size_t k = 0; k < t.n_trials(); ++k) mean += it.at(k, c);
        mean /= n;
        for (std::size_t k = 0; k < t.n_trials(); ++k) sq += (it.at(k, c) - mean) * (it.at(k, c) - mean);
        const double tstat = mean / std::sqrt(sq / (n - 1.0) / n);
        // One-sided p > 0.01 for a drop, normal approximation at 80 trials.
        EXPECT_GT(tstat, -2.33) << t.channel_names()[c];
    }
}

TEST(Synth, DeterministicAndValidated) {
    const auto m = builtin_montage("bciiv2a22");
    EXPECT_EQ(serialize_trials(synth_mi_dataset(m, small_synth(7, 5))),
              serialize_trials(synth_mi_dataset(m, small_synth(7, 5))));
    EXPECT_NE(serialize_trials(synth_mi_dataset(m, small_synth(7, 5))),
              serialize_trials(synth_mi_dataset(m, small_synth(8, 5))));
    auto bad = small_synth(1);
    bad.erd_depth = 1.0;
    EXPECT_THROW(synth_mi_dataset(m, bad), ConfigError);
    bad = small_synth(1);
    bad.signal_channels = {"Q9"};
    EXPECT_THROW(synth_mi_dataset(m, bad), ConfigError);
}

TEST(Config, ParsesAndRoundTrips) {
    const auto j = nlohmann::json::parse(R"({
        "datasets": ["a.eegt", "/abs/b.eegt"],
        "montage": "bciiv2a22",
        "algorithms": ["nsga2", "greedy"],
        "max_channels": 8,
        "seeds": [1, 2],
        "windows": {"baseline": [0, 0.5], "activation": [0.5, 4.0]},
        "classifier": {"grid": [0.1, 1], "mrmr_k": 5},
        "nsga2": {"generations": 50, "mutation": "per_individual"}
    })");
    const auto cfg = parse_run_config(j, "/data");
    EXPECT_EQ(cfg.datasets, (std::vector<std::string>{"/data/a.eegt", "/abs/b.eegt"}));
    EXPECT_EQ(cfg.algorithms.size(), 2u);
    EXPECT_EQ(cfg.algorithms[1], Algorithm::Greedy);
    EXPECT_EQ(cfg.nsga2.generations, 50u);
    EXPECT_EQ(cfg.nsga2.mutation, MutationMode::PerIndividual);
    EXPECT_EQ(cfg.activation_window->end_s, 4.0);
    EXPECT_EQ(cfg.classifier.mrmr_k, 5u);
    const auto again = parse_run_config(to_json(cfg));
    EXPECT_EQ(to_json(again), to_json(cfg));
}

TEST(Config, RejectsBadInput) {
    auto parse = [](const char* text) { return parse_run_config(nlohmann::json::parse(text)); };
    EXPECT_THROW(parse(R"({"datasets": ["a"], "bogus": 1})"), ConfigError);
    EXPECT_THROW(parse(R"({"datasets": []})"), ConfigError);
    EXPECT_THROW(parse(R"({"datasets": ["a"], "seeds": []})"), ConfigError);
    EXPECT_THROW(parse(R"({"datasets": ["a"], "algorithm": "sa"})"), ConfigError);
    EXPECT_THROW(parse(R"({"datasets": ["a"], "max_channels": "x"})"), ConfigError);
    EXPECT_THROW(parse(R"({"datasets": ["a"], "nsga2": {"pop_size": 7}})"), ConfigError);
    EXPECT_THROW(parse(R"({"datasets": ["a"], "windows": {"baseline": [1, 0]}})"), ConfigError);
    EXPECT_THROW(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST(RunSubject, RecoversSignalChannels) {
    const auto m = builtin_montage("bciiv2a22");
    const auto t = synth_mi_dataset(m, small_synth(9, 40));
    auto cfg = fast_config();
    const auto prepared = prepare_subject(cfg, t, "S1", 3);
    const auto c3 = *m.find("C3"), c4 = *m.find("C4");
    for (auto alg : {Algorithm::Nsga2, Algorithm::Mopso, Algorithm::Moead}) {
        const auto run = run_algorithm(cfg, prepared, alg);
        const auto& r = run.result;
        ASSERT_FALSE(r.candidates.empty());
        EXPECT_LE(r.candidates.size(), 10u);
        EXPECT_LT(r.chosen, r.candidates.size());
        const auto& chosen = r.chosen_candidate().mask;
        EXPECT_TRUE(chosen.test(c3) || chosen.test(c4)) << r.algorithm;
        EXPECT_GE(r.chosen_candidate().acc_sel, 0.85) << r.algorithm;
        EXPECT_LE(r.pr(), 6u);
        EXPECT_FALSE(run.trace.empty());
    }
}

TEST(RunSubject, GreedyHasSingleCandidate) {
    const auto m = builtin_montage("bciiv2a22");
    const auto t = synth_mi_dataset(m, small_synth(10, 20));
    auto cfg = fast_config();
    cfg.max_channels = 3;
    const auto run = run_subject(cfg, t, "S1", Algorithm::Greedy, 0);
    EXPECT_EQ(run.result.candidates.size(), 1u);
    ASSERT_TRUE(run.greedy.has_value());
    EXPECT_LE(run.result.pr(), 3u);
}

TEST(RunSubject, Deterministic) {
    const auto m = builtin_montage("bciiv2a22");
    const auto t = synth_mi_dataset(m, small_synth(11, 20));
    const auto cfg = fast_config();
    auto serialize = [&](const SubjectRun& r) {
        std::ostringstream os;
        write_candidates_csv(os, std::vector<SubjectRun>{r}, m);
        write_convergence_csv(os, r.trace);
        return os.str();
    };
    EXPECT_EQ(serialize(run_subject(cfg, t, "S", Algorithm::Mopso, 4)),
              serialize(run_subject(cfg, t, "S", Algorithm::Mopso, 4)));
}

TEST(RunSubject, TestTrialsDoNotLeakIntoSelection) {
    const auto m = builtin_montage("bciiv2a22");
    const auto t = synth_mi_dataset(m, small_synth(12, 30));
    const auto cfg = fast_config();
    const auto a = prepare_subject(cfg, t, "S", 5);
    auto perturbed = t;
    Rng rng(99);
    for (auto k : a.split.test) {
        for (std::size_t c = 0; c < t.n_channels(); ++c) {
            for (auto& v : perturbed.channel(k, c)) v = 50.0 * rng.normal();
        }
    }
    const auto b = prepare_subject(cfg, perturbed, "S", 5);
    EXPECT_EQ(a.split.test, b.split.test);
    EXPECT_EQ(a.ctx.disc, b.ctx.disc);
    for (auto alg : {Algorithm::Nsga2, Algorithm::Greedy}) {
        auto ra = run_algorithm(cfg, a, alg).result, rb = run_algorithm(cfg, b, alg).result;
        EXPECT_EQ(ra.chosen_candidate().mask, rb.chosen_candidate().mask) << algorithm_name(alg);
    }
}

TEST(RunSubject, StageContextInErrors) {
    const auto m = builtin_montage("bciiv2a22");
    auto t = synth_mi_dataset(m, small_synth(13, 10));
    auto names = t.channel_names();
    names[0] = "Nope";
    t.set_channel_names(names);
    try {
        prepare_subject(fast_config(), t, "S7", 0);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("S7 [montage]"), std::string::npos);
    }
}

TEST(ParallelFor, RunsAllAndRethrowsLowestFailure) {
    std::vector<int> hit(50, 0);
    parallel_for(50, 4, [&](std::size_t i) { hit[i] = 1; });
    EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 50);
    try {
        parallel_for(20, 3, [](std::size_t i) {
            if (i == 7 || i == 13) throw DataError("job " + std::to_string(i));
        });
        FAIL();
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "job 7");
    }
}

TEST(Aggregation, FrontierPadsAndAverages) {
    const auto dir = scratch("frontier");
    {
        std::ofstream f(dir / "candidates.csv");
        f << "subject,algorithm,seed,k,f1,f2,popcount,channels,acc_all,acc_sel,cv_sel,chosen\n";
        // Subject A has 2 candidates listed out of f1 order, B has 3.
        f << "A,nsga2,0,0,-1,-5,2,C3 C4,1,1,1,1\n";
        f << "A,nsga2,0,1,-3,-1,2,C3 C4,1,1,1,0\n";
        f << "B,nsga2,0,0,-2,-4,2,C3 C4,1,1,1,1\n";
        f << "B,nsga2,0,1,-4,-2,4,C3 C4,1,1,1,0\n";
        f << "B,nsga2,0,2,-1,-6,2,C3 C4,1,1,1,0\n";
        f << "B,greedy,0,0,-1,-6,2,C3 C4,1,1,1,1\n";
    }
    const auto rows = average_frontier((dir / "candidates.csv").string(), "synthetic", 4);
    ASSERT_EQ(rows.size(), 4u);
    // A sorted: (-3,-1) (-1,-5) then padded with (-1,-5).
    // B sorted: (-4,-2) (-2,-4) (-1,-6) then padded with (-1,-6).
    EXPECT_DOUBLE_EQ(rows[0].f1, -3.5);
    EXPECT_DOUBLE_EQ(rows[0].popcount, 3.0);
    EXPECT_DOUBLE_EQ(rows[1].f2, -4.5);
    EXPECT_DOUBLE_EQ(rows[2].f1, -1.0);
    EXPECT_DOUBLE_EQ(rows[3].f2, -5.5);
    fs::remove_all(dir);
}

TEST(Aggregation, ReportAndAnova) {
    const auto dir = scratch("report");
    {
        std::ofstream f(dir / "results.csv");
        f << "subject,algorithm,acc_all,acc_sel,pr\n";
        for (const char* alg : {"greedy", "moead", "mopso", "nsga2"}) {
            f << "S1," << alg << ",0.7,0.8,10\n";
            f << "S2," << alg << ",0.9,0.6,12\n";
        }
        f << "S3,nsga2,0.8,0.7,11\n";
    }
    const auto rows = build_report({(dir / "results.csv").string()});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].algorithm, "nsga2");
    EXPECT_EQ(rows[3].algorithm, "greedy");
    EXPECT_EQ(rows[0].runs, 3u);
    EXPECT_NEAR(rows[0].sel, 0.7, 1e-12);
    EXPECT_NEAR(rows[0].sel_sd, 0.1, 1e-12);
    EXPECT_NEAR(rows[1].pr, 11.0, 1e-12);
    const auto [res, names] = anova_from_results({(dir / "results.csv").string()});
    EXPECT_EQ(names.size(), 4u);
    EXPECT_EQ(res.df_between, 3u);
    EXPECT_EQ(res.df_within, 5u);
    EXPECT_NEAR(res.f, 0.0, 1e-12);
    fs::remove_all(dir);
}

TEST(Cli, ExitCodesAndDeterminism) {
    const auto dir = scratch("cli");
    const auto a = (dir / "a.eegt").string(), b = (dir / "b.eegt").string();
    EXPECT_EQ(cli("synth --seed 1 --trials-per-class 15 --montage bciiv2a22 --signal-channels C3,C4 --out " + a), 0);
    EXPECT_EQ(cli("synth --seed 1 --trials-per-class 15 --montage bciiv2a22 --signal-channels C3,C4 --out " + b), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(cli("convert-check --in " + a), 0);

    EXPECT_EQ(cli("run --data " + (dir / "missing.eegt").string() + " --out " + (dir / "x").string()), 2);
    EXPECT_EQ(cli("run --data " + a + " --algorithm annealing"), 1);
    EXPECT_EQ(cli("frobnicate"), 1);
    EXPECT_EQ(cli("--help"), 0);
    EXPECT_EQ(cli("synth --out " + (dir / "bad.eegt").string() + " --erd-depth 1.5"), 1);
    {
        std::ofstream f(dir / "bad.json");
        f << "{\"datasets\": [\"a.eegt\"], \"typo\": 1}";
    }
    EXPECT_EQ(cli("run --config " + (dir / "bad.json").string()), 1);
    {
        auto bytes = slurp(a);
        bytes.resize(bytes.size() - 10);
        std::ofstream f(dir / "short.eegt", std::ios::binary);
        f << bytes;
    }
    EXPECT_EQ(cli("convert-check --in " + (dir / "short.eegt").string()), 2);
    EXPECT_EQ(cli("run --data " + (dir / "short.eegt").string() + " --out " + (dir / "y").string()), 2);

    {
        std::ofstream f(dir / "cfg.json");
        f << R"({"datasets": ["a.eegt", "b.eegt"], "montage": "bciiv2a22", "max_channels": 4,
                 "algorithms": ["nsga2", "mopso", "moead", "greedy"],
                 "nsga2": {"generations": 20}, "moead": {"generations": 20}, "mopso": {"iterations": 10},
                 "classifier": {"epochs": 10}})";
    }
    // Same --out twice so the echoed config matches too.
    const auto r1 = dir / "r1", r2 = dir / "r2";
    EXPECT_EQ(cli("run --quiet --config " + (dir / "cfg.json").string() + " --out " + r1.string()), 0);
    fs::rename(r1, r2);
    EXPECT_EQ(cli("run --quiet --config " + (dir / "cfg.json").string() + " --out " + r1.string()), 0);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(r1)) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(e.path(), r1);
        EXPECT_EQ(slurp(e.path()), slurp(r2 / rel)) << rel;
    }
    EXPECT_GE(files, 10u);

    const auto report = (dir / "report.csv").string();
    EXPECT_EQ(cli("report --results " + r1.string() + " --out " + report), 0);
    std::istringstream rep(slurp(report));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(rep, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0], "algorithm,runs,all,all_sd,sel,sel_sd,pr");
    EXPECT_EQ(lines[1].substr(0, 8), "nsga2,2,");
    EXPECT_EQ(lines[4].substr(0, 9), "greedy,2,");

    const auto frontier = (dir / "frontier.csv").string();
    EXPECT_EQ(cli("frontier --run " + r1.string() + " --out " + frontier), 0);
    const auto ftext = slurp(frontier);
    EXPECT_EQ(std::count(ftext.begin(), ftext.end(), '\n'), 1 + 3 * 10);
    fs::remove_all(dir);
}
