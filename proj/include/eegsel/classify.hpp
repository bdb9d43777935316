#pragma once

// Stratified partitioning, a linear hinge-loss classifier with a
// regularization grid, and end-to-end accuracy of a channel subset.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "eegsel/common.hpp"
#include "eegsel/features.hpp"
#include "eegsel/objectives.hpp"
#include "eegsel/signal.hpp"

namespace eegsel {

struct SplitSpec {
    double test_fraction = 0.2;
    bool stratified = true;
    std::uint64_t seed = 0;
};

struct Partition {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

namespace detail {

inline std::array<std::vector<std::size_t>, 2> by_class(std::span<const std::uint8_t> labels) {
    std::array<std::vector<std::size_t>, 2> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) throw DataError("labels must be 0 or 1");
        idx[labels[i]].push_back(i);
    }
    return idx;
}

}  // namespace detail

/// Per class, round(fraction * n_c) trials (at least one, leaving at least
/// one) go to the test side.
inline Partition stratified_split(std::span<const std::uint8_t> labels, const SplitSpec& spec) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
    auto cls = detail::by_class(labels);
    for (const auto& c : cls) {
        if (c.size() < 2) throw DataError("each class needs at least two trials to split");
    }
    Rng rng(spec.seed);
    Partition p;
    if (spec.stratified) {
        for (auto& c : cls) {
            rng.shuffle(c);
            auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(c.size())));
            n_test = std::clamp<std::size_t>(n_test, 1, c.size() - 1);
            p.test.insert(p.test.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n_test));
            p.train.insert(p.train.end(), c.begin() + static_cast<std::ptrdiff_t>(n_test), c.end());
        }
    } else {
        std::vector<std::size_t> all(labels.size());
        std::iota(all.begin(), all.end(), 0);
        rng.shuffle(all);
        auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(all.size())));
        p.test.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_test));
        p.train.assign(all.begin() + static_cast<std::ptrdiff_t>(n_test), all.end());
        for (const auto* part : {&p.train, &p.test}) {
            std::array<bool, 2> seen{false, false};
            for (auto i : *part) seen[labels[i]] = true;
            if (!seen[0] || !seen[1]) throw DataError("unstratified split left a partition with one class");
        }
    }
    std::sort(p.train.begin(), p.train.end());
    std::sort(p.test.begin(), p.test.end());
    return p;
}

inline Partition stratified_split(const TrialSet& trials, const SplitSpec& spec) {
    return stratified_split(trials.labels(), spec);
}

/// Positions 0..n-1 dealt into k folds class by class after a seeded
/// shuffle; returns the held-out positions of each fold, ascending.
inline std::vector<std::vector<std::size_t>> stratified_folds(std::span<const std::uint8_t> labels, std::size_t k,
                                                              std::uint64_t seed) {
    if (k < 2) throw ConfigError("need at least two folds");
    auto cls = detail::by_class(labels);
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (auto& c : cls) {
        rng.shuffle(c);
        for (auto i : c) folds[next++ % k].push_back(i);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

inline std::vector<std::size_t> complement(std::span<const std::size_t> held_out, std::size_t n) {
    std::vector<bool> out(n, false);
    for (auto i : held_out) out[i] = true;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i) {
        if (!out[i]) rest.push_back(i);
    }
    return rest;
}

// ---------------------------------------------------------------------------
// Linear classifier

struct TrainConfig {
    std::vector<double> grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    std::size_t folds = 5;
    std::size_t epochs = 40;
    std::uint64_t seed = 0;
};

struct ClassifierModel {
    std::vector<std::string> feature_names;
    std::vector<double> mean;
    std::vector<double> scale;
    std::vector<double> weights;
    double bias = 0.0;
    double c = 0.0;
    double cv_accuracy = 0.0;

    /// Positive scores predict class 1.
    [[nodiscard]] double decision(std::span<const double> row) const {
        double s = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * (row[j] - mean[j]) / scale[j];
        return s;
    }
    [[nodiscard]] std::uint8_t predict(std::span<const double> row) const { return decision(row) >= 0.0 ? 1 : 0; }
};

namespace detail {

struct Standardized {
    std::vector<double> x;  // row-major, rows x cols
    std::vector<double> mean, scale;
};

inline void fit_standardization(const FeatureMatrix& fm, std::span<const std::size_t> rows, std::vector<double>& mean,
                                std::vector<double>& scale) {
    mean.assign(fm.cols, 0.0);
    scale.assign(fm.cols, 1.0);
    const double n = static_cast<double>(rows.size());
    for (std::size_t c = 0; c < fm.cols; ++c) {
        double m = 0.0;
        for (auto r : rows) m += fm.at(r, c);
        m /= n;
        double v = 0.0;
        for (auto r : rows) v += (fm.at(r, c) - m) * (fm.at(r, c) - m);
        const double sd = std::sqrt(v / n);
        mean[c] = m;
        scale[c] = sd > kFeatureFloor * (1.0 + std::abs(m)) ? sd : 1.0;
    }
}

/// Stochastic subgradient descent on
///   lambda/2 |w|^2 + mean hinge(y (w.x + b)),  lambda = 1 / (C n)
/// with the bias folded in as a constant input, step 1/(lambda t), projection
/// onto the ball of radius 1/sqrt(lambda), and the iterate averaged over the
/// second half of the epochs.
inline std::vector<double> hinge_sgd(const std::vector<double>& x, std::size_t cols, std::span<const double> y, double c,
                                     std::size_t epochs, std::uint64_t seed) {
    const std::size_t n = y.size();
    const std::size_t d = cols + 1;
    const double lambda = 1.0 / (c * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);
    std::vector<double> w(d, 0.0), avg(d, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::size_t t = 0, averaged = 0;
    const std::size_t avg_from = epochs / 2;
    for (std::size_t e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        for (auto i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double* xi = x.data() + i * cols;
            double margin = w[cols];
            for (std::size_t j = 0; j < cols; ++j) margin += w[j] * xi[j];
            margin *= y[i];
            const double shrink = 1.0 - eta * lambda;
            for (auto& v : w) v *= shrink;
            if (margin < 1.0) {
                for (std::size_t j = 0; j < cols; ++j) w[j] += eta * y[i] * xi[j];
                w[cols] += eta * y[i];
            }
            double norm = 0.0;
            for (double v : w) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > radius) {
                for (auto& v : w) v *= radius / norm;
            }
            if (e >= avg_from) {
                ++averaged;
                for (std::size_t j = 0; j < d; ++j) avg[j] += (w[j] - avg[j]) / static_cast<double>(averaged);
            }
        }
    }
    return averaged > 0 ? avg : w;
}

inline ClassifierModel fit_fixed_c(const FeatureMatrix& fm, std::span<const std::uint8_t> labels,
                                   std::span<const std::size_t> rows, double c, const TrainConfig& cfg) {
    ClassifierModel m;
    m.feature_names = fm.names;
    m.c = c;
    fit_standardization(fm, rows, m.mean, m.scale);
    std::vector<double> x(rows.size() * fm.cols), y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < fm.cols; ++j) x[i * fm.cols + j] = (fm.at(rows[i], j) - m.mean[j]) / m.scale[j];
        y[i] = labels[rows[i]] == 1 ? 1.0 : -1.0;
    }
    auto w = hinge_sgd(x, fm.cols, y, c, cfg.epochs, cfg.seed);
    m.bias = w.back();
    w.pop_back();
    m.weights = std::move(w);
    return m;
}

inline double accuracy_on(const ClassifierModel& m, const FeatureMatrix& fm, std::span<const std::uint8_t> labels,
                          std::span<const std::size_t> rows) {
    if (rows.empty()) return 0.0;
    std::size_t ok = 0;
    for (auto r : rows) {
        const std::span<const double> row(fm.values.data() + r * fm.cols, fm.cols);
        ok += m.predict(row) == labels[r] ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(rows.size());
}

}  // namespace detail

/// Standardize, pick C by stratified k-fold CV accuracy (ties keep the
/// earlier grid entry), refit on all rows.
inline ClassifierModel train(const FeatureMatrix& fm, std::span<const std::uint8_t> labels, const TrainConfig& cfg = {}) {
    if (fm.cols == 0) throw ConfigError("no features to train on");
    if (labels.size() != fm.rows) throw ConfigError("label count does not match feature rows");
    if (cfg.grid.empty()) throw ConfigError("empty regularization grid");
    for (double c : cfg.grid) {
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("regularization values must be positive");
    }
    if (!fm.all_finite()) throw DataError("non-finite feature values");
    const auto cls = detail::by_class(labels);
    if (cls[0].empty() || cls[1].empty()) throw DataError("training data must contain both classes");

    std::vector<std::size_t> all(fm.rows);
    std::iota(all.begin(), all.end(), 0);
    double best_c = cfg.grid.front(), best_acc = -1.0;
    if (cfg.grid.size() > 1) {
        const auto folds = stratified_folds(labels, cfg.folds, cfg.seed);
        for (double c : cfg.grid) {
            double correct = 0.0;
            for (const auto& held : folds) {
                if (held.empty()) continue;
                const auto fit_rows = complement(held, fm.rows);
                const auto m = detail::fit_fixed_c(fm, labels, fit_rows, c, cfg);
                correct += detail::accuracy_on(m, fm, labels, held) * static_cast<double>(held.size());
            }
            const double acc = correct / static_cast<double>(fm.rows);
            if (acc > best_acc) {
                best_acc = acc;
                best_c = c;
            }
        }
    }
    auto model = detail::fit_fixed_c(fm, labels, all, best_c, cfg);
    model.cv_accuracy = best_acc;
    return model;
}

/// Fraction of rows whose predicted class matches the label. Columns are
/// matched by name, so the test matrix may carry them in any order.
inline double evaluate(const ClassifierModel& model, const FeatureMatrix& fm, std::span<const std::uint8_t> labels) {
    if (labels.size() != fm.rows) throw ConfigError("label count does not match feature rows");
    std::vector<std::size_t> pos(model.feature_names.size());
    for (std::size_t j = 0; j < pos.size(); ++j) {
        const auto it = std::find(fm.names.begin(), fm.names.end(), model.feature_names[j]);
        if (it == fm.names.end()) throw DataError("feature schema mismatch: missing " + model.feature_names[j]);
        pos[j] = static_cast<std::size_t>(it - fm.names.begin());
    }
    if (fm.rows == 0) return 0.0;
    std::size_t ok = 0;
    std::vector<double> row(pos.size());
    for (std::size_t r = 0; r < fm.rows; ++r) {
        for (std::size_t j = 0; j < pos.size(); ++j) row[j] = fm.at(r, pos[j]);
        ok += model.predict(row) == labels[r] ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(fm.rows);
}

// ---------------------------------------------------------------------------
// Subset accuracy

struct PipelineConfig {
    TrainConfig classifier;
    std::size_t mrmr_k = 10;
    std::size_t cv_folds = 5;
};

struct SubsetScore {
    double acc_all = 0.0;
    double acc_sel = 0.0;
    std::vector<std::string> selected_features;
};

namespace detail {

inline std::vector<std::uint8_t> gather(std::span<const std::uint8_t> labels, std::span<const std::size_t> idx) {
    std::vector<std::uint8_t> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(labels[i]);
    return out;
}

}  // namespace detail

/// Fit features and classifiers on `train` trials of the bank, report
/// accuracy on `test` trials for all features and for the mRMR top-k.
inline SubsetScore fit_and_score(const FeatureBank& bank, std::span<const std::size_t> train_idx,
                                 std::span<const std::size_t> test_idx, std::span<const std::size_t> channels,
                                 const PipelineConfig& cfg = {}, bool with_all = true) {
    const auto f_train = extract_features(bank, train_idx, channels, train_idx);
    const auto f_test = extract_features(bank, train_idx, channels, test_idx);
    const auto y_train = detail::gather(bank.labels, train_idx);
    const auto y_test = detail::gather(bank.labels, test_idx);
    SubsetScore s;
    if (with_all) s.acc_all = evaluate(train(f_train, y_train, cfg.classifier), f_test, y_test);
    const auto sel = mrmr_select(f_train, y_train, std::min(cfg.mrmr_k, f_train.cols));
    const auto sel_train = f_train.select_columns(sel.indices);
    s.acc_sel = evaluate(train(sel_train, y_train, cfg.classifier), f_test, y_test);
    s.selected_features = sel_train.names;
    return s;
}

/// Stratified k-fold CV accuracy of the selected-feature path restricted to
/// `trials` of the bank.
inline double cv_accuracy(const FeatureBank& bank, std::span<const std::size_t> trials,
                          std::span<const std::size_t> channels, const PipelineConfig& cfg = {},
                          std::uint64_t seed = 0) {
    const auto y = detail::gather(bank.labels, trials);
    const auto folds = stratified_folds(y, cfg.cv_folds, seed);
    double correct = 0.0;
    for (const auto& held : folds) {
        if (held.empty()) continue;
        const auto rest = complement(held, trials.size());
        std::vector<std::size_t> fit, val;
        for (auto i : rest) fit.push_back(trials[i]);
        for (auto i : held) val.push_back(trials[i]);
        correct += fit_and_score(bank, fit, val, channels, cfg, false).acc_sel * static_cast<double>(val.size());
    }
    return correct / static_cast<double>(trials.size());
}

/// Split, build features for the masked channels, and score both paths.
inline SubsetScore subset_accuracy(const TrialSet& trials, const ChannelMask& mask, const SplitSpec& spec,
                                   const PipelineConfig& cfg = {}, const FeatureConfig& fcfg = {}) {
    if (mask.size() != trials.n_channels()) throw ConfigError("mask length does not match channel count");
    const auto channels = mask.indices();
    if (channels.empty()) throw ConfigError("empty channel mask");
    const auto part = stratified_split(trials, spec);
    const auto bank = build_feature_bank(trials.select_channels(channels), fcfg);
    std::vector<std::size_t> local(channels.size());
    std::iota(local.begin(), local.end(), 0);
    return fit_and_score(bank, part.train, part.test, local, cfg);
}

}  // namespace eegsel
