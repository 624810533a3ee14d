#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "test_support.hpp"
#include "thermoface/segmentation.hpp"

namespace thermoface {
namespace {

using testing::count_components_bfs;
using testing::from_ascii;

TEST(LabelComponents, SingleBlob)
{
    const auto lab = label_components(from_ascii({"....", ".##.", ".##.", "...."}));
    EXPECT_EQ(lab.component_count(), 1u);
    EXPECT_EQ(lab.size_of(1), 4u);
}

TEST(LabelComponents, DiagonalNeighborsDependOnConnectivity)
{
    const auto img = from_ascii({"#.", ".#"});
    EXPECT_EQ(label_components(img, Connectivity::eight).component_count(), 1u);
    EXPECT_EQ(label_components(img, Connectivity::four).component_count(), 2u);
}

TEST(LabelComponents, FaceCornerBlobAndDot)
{
    // A face-like oval, a blob in the bottom-left corner and a dot on top.
    const auto img = from_ascii({
        "..........#.........",
        "....................",
        "......#######.......",
        ".....#########......",
        "....###########.....",
        "....###########.....",
        ".....#########......",
        "......#######.......",
        "##..................",
        "###.................",
    });
    const auto lab = label_components(img);
    ASSERT_EQ(lab.component_count(), 3u);
    const auto face = largest_component(lab);
    EXPECT_EQ(count_foreground(face), 7u + 9 + 11 + 11 + 9 + 7);
    EXPECT_EQ(face.at(10, 0), 0);
    EXPECT_EQ(face.at(0, 9), 0);
}

TEST(LabelComponents, UShapeMergesLabels)
{
    // Two arms first seen as separate labels, joined at the bottom.
    const auto lab = label_components(from_ascii({"#...#", "#...#", "#####"}), Connectivity::four);
    EXPECT_EQ(lab.component_count(), 1u);
    EXPECT_EQ(lab.size_of(1), 9u);
}

TEST(LabelComponents, PropertiesAgainstFloodFill)
{
    std::mt19937 rng(99);
    std::bernoulli_distribution coin(0.45);
    for (int trial = 0; trial < 200; ++trial) {
        BinaryImage img(17, 13);
        for (auto& v : img.pixels())
            v = coin(rng);
        for (auto conn : {Connectivity::four, Connectivity::eight}) {
            const auto lab = label_components(img, conn);
            EXPECT_EQ(lab.component_count(), count_components_bfs(img, conn == Connectivity::eight));
            EXPECT_EQ(std::accumulate(lab.sizes.begin(), lab.sizes.end(), std::size_t{0}), count_foreground(img));
            std::set<std::uint32_t> used;
            for (std::size_t i = 0; i < img.size(); ++i) {
                EXPECT_EQ(lab.labels[i] == 0, img.pixels()[i] == 0);
                if (lab.labels[i])
                    used.insert(lab.labels[i]);
            }
            // Contiguous 1..K.
            EXPECT_EQ(used.size(), lab.component_count());
            if (!used.empty()) {
                EXPECT_EQ(*used.begin(), 1u);
                EXPECT_EQ(*used.rbegin(), lab.component_count());
            }
        }
        EXPECT_LE(label_components(img, Connectivity::eight).component_count(),
                  label_components(img, Connectivity::four).component_count());
    }
}

TEST(LargestComponent, PicksBiggerBlob)
{
    BinaryImage img(30, 10);
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 10; ++x)
            img.at(x, y) = 1; // 50 px
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 20; x < 25; ++x)
            img.at(x, y) = 1; // 10 px
    const auto out = largest_component(label_components(img));
    EXPECT_EQ(count_foreground(out), 50u);
    EXPECT_EQ(out.at(0, 0), 1);
    EXPECT_EQ(out.at(20, 0), 0);
}

TEST(LargestComponent, SingleComponentIsIdentity)
{
    const auto img = from_ascii({".#.", "###", ".#."});
    EXPECT_EQ(largest_component(label_components(img)), img);
}

TEST(LargestComponent, TieGoesToLowestLabel)
{
    const auto img = from_ascii({"##..##", "......", "......"});
    const auto out = largest_component(label_components(img));
    EXPECT_EQ(out, from_ascii({"##....", "......", "......"}));
}

TEST(LargestComponent, NoForegroundFails)
{
    try {
        largest_component(label_components(BinaryImage(4, 4)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoComponents);
    }
}

TEST(LargestComponent, ResultIsConnectedSubset)
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto img = testing::random_blobs(rng, 40, 30);
        const auto out = largest_component(label_components(img));
        EXPECT_TRUE(testing::is_subset(out, img));
        EXPECT_EQ(count_components_bfs(out, true), 1u);
    }
}

TEST(CropToForeground, Examples)
{
    EXPECT_EQ(crop_to_foreground(BinaryImage(6, 4, 1)), (CropRect{0, 0, 5, 3}));

    BinaryImage dot(9, 9);
    dot.at(4, 6) = 1;
    EXPECT_EQ(crop_to_foreground(dot), (CropRect{4, 6, 4, 6}));

    // L shape: vertical stroke at column 3 rows 2..9, foot to column 7 on row 9.
    BinaryImage ell(12, 12);
    for (std::size_t y = 2; y <= 9; ++y)
        ell.at(3, y) = 1;
    for (std::size_t x = 3; x <= 7; ++x)
        ell.at(x, 9) = 1;
    EXPECT_EQ(crop_to_foreground(ell), (CropRect{3, 2, 7, 9}));
}

TEST(CropToForeground, EdgesTouchForeground)
{
    std::mt19937 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const auto img = testing::random_blobs(rng, 40, 30);
        if (count_foreground(img) == 0)
            continue;
        const auto r = crop_to_foreground(img);
        bool left = false, right = false, top = false, bottom = false;
        for (std::size_t y = 0; y < img.height(); ++y)
            for (std::size_t x = 0; x < img.width(); ++x) {
                if (!img.at(x, y))
                    continue;
                EXPECT_TRUE(x >= r.left && x <= r.right && y >= r.top && y <= r.bottom);
                left |= x == r.left;
                right |= x == r.right;
                top |= y == r.top;
                bottom |= y == r.bottom;
            }
        EXPECT_TRUE(left && right && top && bottom);
    }
}

TEST(CropToForeground, EmptyFails)
{
    EXPECT_THROW(crop_to_foreground(BinaryImage(3, 3)), Error);
}

TEST(ApplyMask, Examples)
{
    GrayImage gray(4, 3);
    for (std::size_t i = 0; i < gray.size(); ++i)
        gray.pixels()[i] = static_cast<std::uint8_t>(10 + i);
    const CropRect full{0, 0, 3, 2};
    EXPECT_EQ(apply_mask(gray, BinaryImage(4, 3, 1), full), gray);
    EXPECT_EQ(apply_mask(gray, BinaryImage(4, 3, 0), full), GrayImage(4, 3, 0));

    BinaryImage checker(4, 3);
    for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 4; ++x)
            checker.at(x, y) = (x + y) % 2;
    const auto masked = apply_mask(gray, checker, CropRect{1, 1, 3, 2});
    ASSERT_EQ(masked.width(), 3u);
    ASSERT_EQ(masked.height(), 2u);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 3; ++x)
            EXPECT_EQ(masked.at(x, y), checker.at(x + 1, y + 1) ? gray.at(x + 1, y + 1) : 0);
}

TEST(ApplyMask, ShapeMismatch)
{
    try {
        apply_mask(GrayImage(4, 4), BinaryImage(3, 4), CropRect{0, 0, 2, 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
}

TEST(SegmentFace, CropsWarmOvalFromCoolBackground)
{
    GrayImage img(60, 40, 20);
    for (std::size_t y = 0; y < 40; ++y)
        for (std::size_t x = 0; x < 60; ++x) {
            const double dx = (x - 30.0) / 20.0, dy = (y - 20.0) / 12.0;
            if (dx * dx + dy * dy <= 1.0)
                img.at(x, y) = 150;
        }
    img.at(2, 2) = 255; // hot speck, smaller than the face
    const auto face = segment_face(img);
    EXPECT_EQ(face.width(), 41u);
    EXPECT_EQ(face.height(), 25u);
    EXPECT_EQ(face.at(20, 12), 150);
    EXPECT_EQ(face.at(0, 0), 0);
}

} // namespace
} // namespace thermoface
