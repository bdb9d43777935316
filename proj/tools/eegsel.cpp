// Command-line front end: run, synth, frontier, report, anova, convert-check.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 data error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "eegsel/pipeline.hpp"
#include "eegsel/synth.hpp"
#include "eegsel/trialfile.hpp"

using namespace eegsel;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

/// Writes to `path`, or stdout when it is empty or "-".
template <typename F>
void emit(const std::string& path, F&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path + "'");
    write(out);
}

struct RunArgs {
    std::string config;
    std::string out;
    std::vector<std::string> data;
    std::vector<std::string> algorithms;
    std::vector<std::uint64_t> seeds;
    std::size_t generations = 0;
    std::size_t iterations = 0;
    std::size_t max_channels = 0;
    bool quiet = false;
};

int cmd_run(const RunArgs& a) {
    nlohmann::json j = nlohmann::json::object();
    std::filesystem::path base;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw ConfigError("cannot open config '" + a.config + "'");
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config is not valid JSON: " + std::string(e.what()));
        }
        base = std::filesystem::path(a.config).parent_path();
    }
    if (!a.data.empty()) j["datasets"] = a.data;
    auto cfg = parse_run_config(j, base);
    // Command-line dataset paths are relative to the working directory.
    if (!a.data.empty()) cfg.datasets = a.data;
    if (!a.algorithms.empty()) {
        cfg.algorithms.clear();
        for (const auto& s : a.algorithms) cfg.algorithms.push_back(parse_algorithm(s));
    }
    if (!a.seeds.empty()) cfg.seeds = a.seeds;
    if (a.generations > 0) {
        cfg.nsga2.generations = a.generations;
        cfg.moead.generations = a.generations;
    }
    if (a.iterations > 0) cfg.mopso.iterations = a.iterations;
    if (a.max_channels > 0) cfg.max_channels = a.max_channels;
    if (!a.out.empty()) cfg.output = a.out;
    cfg.validate();
    ProgressLog log;
    if (!a.quiet) log = [](const std::string& line) { std::cerr << line << '\n'; };
    const auto summary = run_all(cfg, log);
    if (!a.quiet) std::cerr << "wrote " << summary.runs.size() << " runs to " << cfg.output << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EEG channel-subset selection for motor-imagery decoding"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "optimize channel subsets for every dataset, seed and algorithm");
    run->add_option("--config", run_args.config, "JSON run configuration");
    run->add_option("--out", run_args.out, "output directory (overrides config)");
    run->add_option("--data", run_args.data, "trial files (override config datasets)");
    run->add_option("--algorithm", run_args.algorithms, "nsga2, mopso, moead or greedy; repeatable");
    run->add_option("--seed", run_args.seeds, "run seeds; repeatable");
    run->add_option("--generations", run_args.generations, "NSGA-II and MOEA/D generations");
    run->add_option("--iterations", run_args.iterations, "MOPSO iterations");
    run->add_option("--max-channels", run_args.max_channels, "channel limit L");
    run->add_flag("--quiet", run_args.quiet, "no progress log on stderr");

    std::string synth_out, synth_montage = "physionet64", synth_channels;
    SynthConfig synth_cfg;
    auto* synth = app.add_subcommand("synth", "write a synthetic two-class trial file");
    synth->add_option("--out", synth_out, "output trial file")->required();
    synth->add_option("--seed", synth_cfg.seed, "generator seed");
    synth->add_option("--trials-per-class", synth_cfg.trials_per_class, "trials per class");
    synth->add_option("--montage", synth_montage, "built-in montage name or CSV path");
    synth->add_option("--signal-channels", synth_channels, "comma-separated channels carrying the mu rhythm");
    synth->add_option("--erd-depth", synth_cfg.erd_depth, "fractional power drop in (0, 1)");
    synth->add_option("--snr", synth_cfg.snr, "oscillation RMS over background RMS");

    std::string frontier_run, frontier_dataset, frontier_out;
    std::size_t frontier_k = 10;
    auto* frontier = app.add_subcommand("frontier", "average the k-th candidate across subjects per algorithm");
    frontier->add_option("--run", frontier_run, "output directory of a previous run")->required();
    frontier->add_option("--dataset", frontier_dataset, "dataset label (default: run directory name)");
    frontier->add_option("--k", frontier_k, "rows per algorithm");
    frontier->add_option("--out", frontier_out, "CSV path (default stdout)");

    std::vector<std::string> report_in;
    std::string report_out;
    auto* report = app.add_subcommand("report", "summarize accuracy and subset size per algorithm");
    report->add_option("--results", report_in, "results.csv files or run directories")->required();
    report->add_option("--out", report_out, "CSV path (default stdout)");

    std::vector<std::string> anova_in;
    std::string anova_out, anova_metric = "acc_sel";
    auto* anova = app.add_subcommand("anova", "one-way ANOVA of per-subject accuracy across algorithms");
    anova->add_option("--results", anova_in, "results.csv files or run directories")->required();
    anova->add_option("--metric", anova_metric, "acc_sel or acc_all");
    anova->add_option("--out", anova_out, "CSV path (default stdout)");

    std::vector<std::string> check_in;
    auto* check = app.add_subcommand("convert-check", "verify trial files and print a summary");
    check->add_option("--in", check_in, "trial files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    auto as_results = [](std::vector<std::string> paths) {
        for (auto& p : paths) {
            if (std::filesystem::is_directory(p)) p = (std::filesystem::path(p) / "results.csv").string();
        }
        return paths;
    };

    try {
        if (*run) return cmd_run(run_args);
        if (*synth) {
            if (!synth_channels.empty()) synth_cfg.signal_channels = split_names(synth_channels);
            const auto trials = synth_mi_dataset(resolve_montage(synth_montage), synth_cfg);
            write_trialfile(trials, synth_out);
            return 0;
        }
        if (*frontier) {
            auto label = frontier_dataset;
            if (label.empty()) label = std::filesystem::path(frontier_run).lexically_normal().filename().string();
            if (label.empty()) label = "run";
            const auto rows = average_frontier((std::filesystem::path(frontier_run) / "candidates.csv").string(), label,
                                               frontier_k);
            emit(frontier_out, [&](std::ostream& os) { write_frontier_csv(os, rows); });
            return 0;
        }
        if (*report) {
            const auto rows = build_report(as_results(report_in));
            emit(report_out, [&](std::ostream& os) { write_report_csv(os, rows); });
            return 0;
        }
        if (*anova) {
            const auto [res, names] = anova_from_results(as_results(anova_in), anova_metric);
            emit(anova_out, [&](std::ostream& os) {
                os << "metric,groups,f,p,df_between,df_within\n";
                std::string g;
                for (const auto& n : names) g += (g.empty() ? "" : " ") + n;
                os << anova_metric << ',' << g << ',' << format_number(res.f) << ',' << format_number(res.p) << ','
                   << res.df_between << ',' << res.df_within << '\n';
            });
            return 0;
        }
        if (*check) {
            bool ok = true;
            for (const auto& path : check_in) {
                const auto rep = verify_trialfile(path);
                std::cout << path << ": " << rep.n_trials << " trials, " << rep.n_channels << " channels, "
                          << rep.n_samples << " samples at " << format_number(rep.fs) << " Hz, classes "
                          << rep.class_counts[0] << '/' << rep.class_counts[1] << '\n';
                for (const auto& v : rep.violations) std::cout << "  violation: " << v << '\n';
                for (const auto& w : rep.warnings) std::cout << "  warning: " << w << '\n';
                ok = ok && rep.ok();
            }
            return ok ? 0 : kExitData;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
