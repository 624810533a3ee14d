#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "thermoface/features.hpp"

namespace thermoface {
namespace {

MinutiaeSet random_set(std::mt19937& rng, int n)
{
    std::uniform_int_distribution<int> ux(0, 319), uy(0, 223), uk(0, 2);
    MinutiaeSet set;
    for (int i = 0; i < n; ++i)
        set.points.push_back({ux(rng), uy(rng), static_cast<MinutiaKind>(uk(rng))});
    return set;
}

TEST(BlockFeatures, LengthsAtStandardFrame)
{
    const MinutiaeSet empty;
    EXPECT_EQ(block_features(empty, 8).counts.size(), 1120u);
    EXPECT_EQ(block_features(empty, 16).counts.size(), 280u);
    EXPECT_EQ(block_features(empty, 32).counts.size(), 70u);
}

TEST(BlockFeatures, EmptySetGivesZeros)
{
    const auto fv = block_features(MinutiaeSet{}, 16);
    EXPECT_TRUE(std::all_of(fv.counts.begin(), fv.counts.end(), [](auto c) { return c == 0; }));
    EXPECT_EQ(fv.block_size, 16);
}

TEST(BlockFeatures, CornerPoint)
{
    MinutiaeSet set;
    set.points = {{0, 0, MinutiaKind::termination}};
    const auto fv = block_features(set, 16);
    EXPECT_EQ(fv.counts[0], 1u);
    EXPECT_EQ(std::accumulate(fv.counts.begin(), fv.counts.end(), 0u), 1u);
}

TEST(BlockFeatures, RowMajorBlockOrder)
{
    MinutiaeSet set;
    set.points = {{319, 223, MinutiaKind::bifurcation}, {16, 0, MinutiaKind::termination},
                  {0, 16, MinutiaKind::termination}};
    const auto fv = block_features(set, 16);
    EXPECT_EQ(fv.counts[279], 1u);
    EXPECT_EQ(fv.counts[1], 1u);
    EXPECT_EQ(fv.counts[20], 1u);
}

TEST(BlockFeatures, NormalPointsFollowPolicy)
{
    MinutiaeSet set;
    set.points = {{40, 40, MinutiaKind::normal}, {41, 40, MinutiaKind::termination}};
    const auto without = block_features(set, 8);
    EXPECT_EQ(std::accumulate(without.counts.begin(), without.counts.end(), 0u), 1u);
    const auto with = block_features(set, 8, CountPolicy{true});
    EXPECT_EQ(std::accumulate(with.counts.begin(), with.counts.end(), 0u), 2u);
}

TEST(BlockFeatures, NonStandardFrameUsesCeil)
{
    MinutiaeSet set{100, 50, {{99, 49, MinutiaKind::termination}}};
    const auto fv = block_features(set, 32);
    EXPECT_EQ(fv.counts.size(), 4u * 2u);
    EXPECT_EQ(fv.counts.back(), 1u);
}

TEST(BlockFeatures, RejectsOtherBlockSizes)
{
    for (int bs : {0, 4, 12, 64}) {
        try {
            block_features(MinutiaeSet{}, bs);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidBlockSize);
        }
    }
}

TEST(BlockFeatures, SumAndPermutationInvariance)
{
    std::mt19937 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        auto set = random_set(rng, static_cast<int>(rng() % 200));
        const auto counted = static_cast<unsigned>(std::count_if(
            set.points.begin(), set.points.end(), [](const Minutia& m) { return m.kind != MinutiaKind::normal; }));
        for (int bs : {8, 16, 32}) {
            const auto fv = block_features(set, bs);
            EXPECT_EQ(fv.counts.size(), feature_length(320, 224, bs));
            EXPECT_EQ(std::accumulate(fv.counts.begin(), fv.counts.end(), 0u), counted);
            auto shuffled = set;
            std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
            EXPECT_EQ(block_features(shuffled, bs), fv);
        }
    }
}

TEST(FeatureCsv, HeaderAndRoundTrip)
{
    std::mt19937 rng(1);
    std::vector<FeatureVector> rows;
    for (int i = 0; i < 3; ++i) {
        auto fv = block_features(random_set(rng, 40), 32);
        fv.label = "p" + std::to_string(i);
        rows.push_back(fv);
    }
    std::ostringstream out;
    write_features_csv(out, rows);
    const auto text = out.str();
    EXPECT_EQ(text.substr(0, 15), "label,c0,c1,c2,");
    EXPECT_NE(text.find(",c69\n"), std::string::npos);
    std::istringstream in(text);
    EXPECT_EQ(read_features_csv(in), rows);
}

TEST(FeatureCsv, RejectsRaggedRows)
{
    std::istringstream in("label,c0,c1\na,1,2\nb,1\n");
    EXPECT_THROW(read_features_csv(in), Error);
}

} // namespace
} // namespace thermoface
