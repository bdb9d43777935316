#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "eegsel/montage.hpp"

using namespace eegsel;

namespace {

std::string write_tmp(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path.string();
}

}  // namespace

TEST(Montage, LoadsTwoRowFileAndResolvesRefs) {
    auto path = write_tmp("eegsel_two.csv", "name,x,y,z\nC3,-0.71,0,0.70\nC4,0.71,0,0.70\n");
    auto m = load_montage(path);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.refs(), (std::vector<std::size_t>{0, 1}));
    EXPECT_NEAR(m[0].position.norm(), 1.0, 1e-12);
    EXPECT_EQ(relevance_vector(m), (std::vector<double>{1.0, 1.0}));
}

TEST(Montage, RejectsDuplicatesNonFiniteAndShortFiles) {
    EXPECT_THROW(load_montage(write_tmp("eegsel_dup.csv", "name,x,y,z\nCz,0,0,1\nCz,0,0,1\n")), DataError);
    EXPECT_THROW(load_montage(write_tmp("eegsel_nan.csv", "name,x,y,z\nCz,0,0,nan\nC3,1,0,0\n")), DataError);
    EXPECT_THROW(load_montage(write_tmp("eegsel_one.csv", "name,x,y,z\nCz,0,0,1\n")), DataError);
    EXPECT_THROW(load_montage(write_tmp("eegsel_hdr.csv", "label,x,y,z\nCz,0,0,1\nC3,1,0,0\n")), DataError);
}

TEST(Montage, BuiltinPhysionetHas64UniqueUnitElectrodes) {
    auto m = builtin_montage("physionet64");
    ASSERT_EQ(m.size(), 64u);
    for (const auto& e : m.electrodes()) {
        EXPECT_GE(e.position.norm(), 0.99);
        EXPECT_LE(e.position.norm(), 1.01);
    }
    ASSERT_EQ(m.refs().size(), 2u);
    EXPECT_EQ(m[m.refs()[0]].name, "C3");
    EXPECT_EQ(m[m.refs()[1]].name, "C4");
    // Physionet EEGMMIDB channel order starts FC5 .. and ends Iz.
    EXPECT_EQ(m[0].name, "FC5");
    EXPECT_EQ(m[8].name, "C3");
    EXPECT_EQ(m[12].name, "C4");
    EXPECT_EQ(m[63].name, "Iz");
}

TEST(Montage, BuiltinGeometryMatchesTenTenConstruction) {
    auto m = builtin_montage("physionet64");
    // Closed forms of the idealized system: C3 at 45 degrees down the coronal
    // arc, Fz at 45 degrees down the sagittal arc, T7 on the equator.
    const double s = std::sqrt(0.5);
    auto pos = [&](const char* n) { return m[*m.find(n)].position; };
    EXPECT_NEAR(pos("C3").x, -s, 1e-6);
    EXPECT_NEAR(pos("C3").z, s, 1e-6);
    EXPECT_NEAR(pos("Fz").y, s, 1e-6);
    EXPECT_NEAR(pos("T7").x, -1.0, 1e-6);
    EXPECT_NEAR(pos("Oz").y, -1.0, 1e-6);
    // Left/right mirror symmetry.
    for (const auto& [l, r] : {std::pair{"FC3", "FC4"}, {"CP5", "CP6"}, {"F1", "F2"}, {"PO7", "PO8"}}) {
        EXPECT_NEAR(pos(l).x, -pos(r).x, 1e-9);
        EXPECT_NEAR(pos(l).y, pos(r).y, 1e-9);
        EXPECT_NEAR(pos(l).z, pos(r).z, 1e-9);
    }
}

TEST(Montage, Bciiv2aIsSubsetWithRefs) {
    auto m = builtin_montage("bciiv2a22");
    ASSERT_EQ(m.size(), 22u);
    EXPECT_EQ(m[0].name, "Fz");
    EXPECT_EQ(m[m.refs()[0]].name, "C3");
    EXPECT_THROW(builtin_montage("nope"), ConfigError);
}

TEST(SpatialRelevance, ClosedFormValues) {
    std::vector<Electrode> e = {{"C3", {-1, 0, 0}}, {"C4", {1, 0, 0}}, {"X", {0, 0, 1}}};
    Montage m(e);
    EXPECT_DOUBLE_EQ(spatial_relevance(m, 0), 1.0);
    // X is sqrt(2) from both refs.
    EXPECT_NEAR(spatial_relevance(m, 2), std::exp(-1.0), 1e-12);
    EXPECT_THROW(spatial_relevance(m, 3), ConfigError);
    EXPECT_THROW(spatial_relevance(m, 0, {0.0}), ConfigError);
}

TEST(SpatialRelevance, NearestReferenceRule) {
    // k antipodal to C3 (distance 2.0) and 0.5 away from C4 along a chord.
    const double theta = 2.0 * std::asin(0.25);
    std::vector<Electrode> e = {{"C3", {-1, 0, 0}}, {"C4", {std::cos(theta), std::sin(theta), 0}}, {"K", {1, 0, 0}}};
    Montage m(e);
    ASSERT_NEAR(distance(m[2].position, m[0].position), 2.0, 1e-12);
    ASSERT_NEAR(distance(m[2].position, m[1].position), 0.5, 1e-12);
    EXPECT_NEAR(spatial_relevance(m, 2), std::exp(-0.125), 1e-12);
    EXPECT_NEAR(spatial_relevance(m, 2), 0.88250, 1e-5);
}

TEST(SpatialRelevance, UnitDistanceGivesExpMinusHalf) {
    // Two refs and a probe at chord distance exactly 1 from the nearest ref:
    // 60 degrees apart on a great circle.
    std::vector<Electrode> e = {{"C3", {1, 0, 0}}, {"C4", {-1, 0, 0}},
                                {"P", {std::cos(kPi / 3), std::sin(kPi / 3), 0}}};
    Montage m(e);
    EXPECT_NEAR(spatial_relevance(m, 2), std::exp(-0.5), 1e-12);
}

TEST(SpatialRelevance, MonotoneInNearestDistanceAndBounded) {
    auto m = builtin_montage("physionet64");
    auto rel = relevance_vector(m);
    std::vector<double> dist(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
        dist[k] = 1e9;
        for (auto r : m.refs()) dist[k] = std::min(dist[k], distance(m[k].position, m[r].position));
        EXPECT_GT(rel[k], 0.0);
        EXPECT_LE(rel[k], 1.0);
        EXPECT_EQ(rel[k] == 1.0, dist[k] == 0.0);
    }
    for (std::size_t a = 0; a < m.size(); ++a) {
        for (std::size_t b = 0; b < m.size(); ++b) {
            if (dist[a] + 1e-12 < dist[b]) {
                EXPECT_GT(rel[a], rel[b]);
            }
        }
    }
}

TEST(SpatialRelevance, ArgmaxOverNonReferencesIsAdjacentToC3OrC4) {
    auto m = builtin_montage("physionet64");
    auto rel = relevance_vector(m);
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (std::find(m.refs().begin(), m.refs().end(), k) != m.refs().end()) continue;
        if (rel[k] > best_v) {
            best_v = rel[k];
            best = k;
        }
    }
    const std::vector<std::string> ring = {"C1", "C5", "FC3", "CP3", "C2", "C6", "FC4", "CP4"};
    EXPECT_NE(std::find(ring.begin(), ring.end(), m[best].name), ring.end()) << m[best].name;
}

TEST(SpatialRelevance, PermutationEquivariant) {
    auto m = builtin_montage("physionet64");
    auto rel = relevance_vector(m);
    auto names = m.names();
    std::vector<std::string> shuffled = names;
    Rng rng(3);
    rng.shuffle(shuffled);
    auto pm = m.select(shuffled);
    auto prel = relevance_vector(pm);
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
        EXPECT_DOUBLE_EQ(prel[i], rel[*m.find(shuffled[i])]);
    }
}
