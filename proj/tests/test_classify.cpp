#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "eegsel/classify.hpp"

using namespace eegsel;

namespace {

std::vector<std::uint8_t> make_labels(std::size_t n0, std::size_t n1) {
    std::vector<std::uint8_t> y(n0, 0);
    y.insert(y.end(), n1, 1);
    return y;
}

/// Two Gaussian blobs with centers `sep` standard deviations apart along the
/// diagonal.
FeatureMatrix blobs(std::size_t per_class, double sep, std::uint64_t seed, std::vector<std::uint8_t>& y) {
    Rng rng(seed);
    FeatureMatrix fm(2 * per_class, {"x", "y"});
    y.clear();
    for (std::size_t r = 0; r < fm.rows; ++r) {
        const std::uint8_t c = r < per_class ? 0 : 1;
        y.push_back(c);
        const double off = c ? sep / 2.0 : -sep / 2.0;
        fm.at(r, 0) = off / std::sqrt(2.0) + rng.normal();
        fm.at(r, 1) = off / std::sqrt(2.0) + rng.normal();
    }
    return fm;
}

/// Variance-contrast EEG-like set: on channels in `signal`, class 0 has
/// double amplitude.
TrialSet contrast_trials(std::size_t per_class, std::size_t channels, const std::vector<std::size_t>& signal,
                         std::uint64_t seed) {
    TrialSet t(2 * per_class, channels, 320, 160.0);
    Rng rng(seed);
    for (std::size_t k = 0; k < t.n_trials(); ++k) {
        t.labels()[k] = static_cast<std::uint8_t>(k % 2);
        for (std::size_t c = 0; c < channels; ++c) {
            const bool boosted = t.labels()[k] == 0 && std::find(signal.begin(), signal.end(), c) != signal.end();
            for (auto& v : t.channel(k, c)) v = (boosted ? 2.0 : 1.0) * rng.normal();
        }
    }
    return t;
}

}  // namespace

TEST(Split, StratifiedCounts) {
    auto y = make_labels(50, 50);
    auto p = stratified_split(y, {0.2, true, 1});
    EXPECT_EQ(p.test.size(), 20u);
    std::size_t t1 = 0;
    for (auto i : p.test) t1 += y[i];
    EXPECT_EQ(t1, 10u);

    y = make_labels(40, 60);
    p = stratified_split(y, {0.2, true, 1});
    std::array<std::size_t, 2> cnt{0, 0};
    for (auto i : p.test) ++cnt[y[i]];
    EXPECT_EQ(cnt[0], 8u);
    EXPECT_EQ(cnt[1], 12u);
}

TEST(Split, DisjointCoverAndDeterministic) {
    Rng rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n0 = 5 + rng.below(40), n1 = 5 + rng.below(40);
        auto y = make_labels(n0, n1);
        rng.shuffle(y);
        const SplitSpec spec{0.1 + 0.6 * rng.uniform(), true, rng.next()};
        const auto p = stratified_split(y, spec);
        std::set<std::size_t> all(p.train.begin(), p.train.end());
        for (auto i : p.test) EXPECT_TRUE(all.insert(i).second);
        EXPECT_EQ(all.size(), y.size());
        std::array<std::size_t, 2> cnt{0, 0}, tot{n0, n1};
        for (auto i : p.test) ++cnt[y[i]];
        for (int c = 0; c < 2; ++c) {
            EXPECT_LE(std::abs(static_cast<double>(cnt[c]) - spec.test_fraction * static_cast<double>(tot[c])), 1.0);
            EXPECT_GE(cnt[c], 1u);
            EXPECT_LT(cnt[c], tot[c]);
        }
        const auto again = stratified_split(y, spec);
        EXPECT_EQ(again.train, p.train);
        EXPECT_EQ(again.test, p.test);
    }
}

TEST(Split, Errors) {
    EXPECT_THROW(stratified_split(make_labels(1, 10), {}), DataError);
    EXPECT_THROW(stratified_split(make_labels(10, 10), {1.0, true, 0}), ConfigError);
    EXPECT_THROW(stratified_split(make_labels(10, 10), {0.0, true, 0}), ConfigError);
}

TEST(Split, FoldsPartitionAndBalance) {
    auto y = make_labels(23, 31);
    const auto folds = stratified_folds(y, 5, 4);
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
        std::array<int, 2> cnt{0, 0};
        for (auto i : f) {
            EXPECT_TRUE(seen.insert(i).second);
            ++cnt[y[i]];
        }
        EXPECT_GE(cnt[0], 4);
        EXPECT_LE(cnt[0], 5);
    }
    EXPECT_EQ(seen.size(), y.size());
}

TEST(Classifier, SeparableBlobsFitPerfectly) {
    std::vector<std::uint8_t> y;
    // Margin of 2 sigma on each side of the separating plane.
    auto fm = blobs(50, 8.0, 3, y);
    const auto m = train(fm, y);
    EXPECT_EQ(evaluate(m, fm, y), 1.0);
    for (double w : m.weights) EXPECT_TRUE(std::isfinite(w));
    EXPECT_TRUE(std::find(m.feature_names.begin(), m.feature_names.end(), "x") != m.feature_names.end());
}

TEST(Classifier, ShuffledLabelsNearChance) {
    std::vector<std::uint8_t> y;
    auto fm = blobs(50, 3.0, 5, y);
    Rng rng(6);
    rng.shuffle(y);
    const auto m = train(fm, y);
    EXPECT_GE(m.cv_accuracy, 0.35);
    EXPECT_LE(m.cv_accuracy, 0.65);
}

TEST(Classifier, ConstantFeatureGivesMajorityRate) {
    FeatureMatrix fm(30, {"k"});
    for (auto& v : fm.values) v = 3.0;
    auto y = make_labels(12, 18);
    const auto m = train(fm, y);
    EXPECT_DOUBLE_EQ(evaluate(m, fm, y), 18.0 / 30.0);
    auto y2 = make_labels(18, 12);
    EXPECT_DOUBLE_EQ(evaluate(train(fm, y2), fm, y2), 18.0 / 30.0);
}

TEST(Classifier, InvertedWeightsScoreZero) {
    std::vector<std::uint8_t> y;
    auto fm = blobs(40, 8.0, 7, y);
    auto m = train(fm, y);
    ASSERT_EQ(evaluate(m, fm, y), 1.0);
    for (auto& w : m.weights) w = -w;
    m.bias = -m.bias;
    EXPECT_EQ(evaluate(m, fm, y), 0.0);
}

TEST(Classifier, SchemaCheckedByName) {
    std::vector<std::uint8_t> y;
    auto fm = blobs(20, 6.0, 8, y);
    const auto m = train(fm, y);
    // Reordered columns give the same result.
    std::vector<std::size_t> swap = {1, 0};
    EXPECT_EQ(evaluate(m, fm.select_columns(swap), y), evaluate(m, fm, y));
    FeatureMatrix other(fm.rows, {"p", "q"});
    EXPECT_THROW(evaluate(m, other, y), DataError);
}

TEST(Classifier, AffineRescalingInvariance) {
    std::vector<std::uint8_t> y;
    auto fm = blobs(40, 2.0, 9, y);
    auto scaled = fm;
    for (std::size_t r = 0; r < fm.rows; ++r) {
        scaled.at(r, 0) = 4.0 * fm.at(r, 0) + 0.5;
        scaled.at(r, 1) = 0.25 * fm.at(r, 1) - 3.0;
    }
    const auto a = train(fm, y), b = train(scaled, y);
    EXPECT_EQ(a.c, b.c);
    for (std::size_t r = 0; r < fm.rows; ++r) {
        const std::span<const double> ra(fm.values.data() + 2 * r, 2), rb(scaled.values.data() + 2 * r, 2);
        EXPECT_NEAR(a.decision(ra), b.decision(rb), 1e-9);
    }
    EXPECT_EQ(evaluate(a, fm, y), evaluate(b, scaled, y));
}

TEST(Classifier, DeterministicAndValidated) {
    std::vector<std::uint8_t> y;
    auto fm = blobs(30, 2.0, 10, y);
    const auto a = train(fm, y), b = train(fm, y);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.bias, b.bias);
    auto bad = fm;
    bad.at(3, 1) = std::nan("");
    EXPECT_THROW(train(bad, y), DataError);
    EXPECT_THROW(train(fm, std::vector<std::uint8_t>(fm.rows, 1)), DataError);
    TrainConfig neg;
    neg.grid = {-1.0};
    EXPECT_THROW(train(fm, y, neg), ConfigError);
}

TEST(SubsetAccuracy, SignalChannelsBeatNoiseChannels) {
    const auto t = contrast_trials(60, 8, {2, 5}, 11);
    const SplitSpec spec{0.2, true, 3};
    const auto good = subset_accuracy(t, ChannelMask::from_indices(8, std::vector<std::size_t>{2, 5}), spec);
    const auto noise = subset_accuracy(t, ChannelMask::from_indices(8, std::vector<std::size_t>{0, 7}), spec);
    EXPECT_GE(good.acc_sel, 0.85);
    EXPECT_GE(good.acc_all, 0.85);
    EXPECT_LE(noise.acc_sel, 0.65);
    EXPECT_LE(good.selected_features.size(), 10u);
}

TEST(SubsetAccuracy, SingleChannelUsesStatFeaturesOnly) {
    const auto t = contrast_trials(30, 3, {1}, 12);
    const auto bank = build_feature_bank(t);
    std::vector<std::size_t> rows(t.n_trials()), one = {1};
    std::iota(rows.begin(), rows.end(), 0);
    EXPECT_EQ(extract_features(bank, rows, one, rows).cols, 19u);
    std::vector<std::size_t> two = {0, 1};
    EXPECT_EQ(extract_features(bank, rows, two, rows).cols, 36u + 38u);
    const double cv = cv_accuracy(bank, rows, one);
    EXPECT_GE(cv, 0.8);
    EXPECT_LE(cv, 1.0);
}
