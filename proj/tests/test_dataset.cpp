#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "thermoface/dataset.hpp"
#include "thermoface/image_io.hpp"

namespace thermoface {
namespace {

class TempDir {
public:
    explicit TempDir(const std::string& tag)
        : path_(fs::temp_directory_path() / ("thermoface_" + tag + "_" + std::to_string(::getpid())))
    {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void make_tree(const fs::path& root, std::size_t persons, std::size_t samples)
{
    for (std::size_t p = 0; p < persons; ++p) {
        const auto dir = root / ("person" + std::to_string(p));
        fs::create_directories(dir);
        for (std::size_t s = 0; s < samples; ++s)
            save_pgm(dir / ("img" + std::to_string(s) + ".pgm"), GrayImage(4, 4, static_cast<std::uint8_t>(s)));
    }
}

TEST(TrainQuota, FloorPerPerson)
{
    EXPECT_EQ(train_quota(34, 0.8), 27u);
    EXPECT_EQ(train_quota(10, 0.5), 5u);
    EXPECT_EQ(train_quota(3, 0.1), 1u);  // never leaves a person out of training
    EXPECT_EQ(train_quota(3, 0.99), 2u); // nor out of testing
}

TEST(Ingest, SevenBySeventyFourSplit)
{
    TempDir tmp("ingest_7x34");
    make_tree(tmp.path(), 7, 34);
    const auto ds = ingest(tmp.path(), 0.8, 1);
    EXPECT_EQ(ds.persons.size(), 7u);
    EXPECT_EQ(ds.samples.size(), 238u);
    EXPECT_EQ(ds.indices(Split::train).size(), 7u * 27);
    EXPECT_EQ(ds.indices(Split::test).size(), 7u * 7);
}

TEST(Ingest, LexicographicAndDeterministic)
{
    TempDir tmp("ingest_order");
    make_tree(tmp.path(), 3, 12);
    fs::create_directories(tmp.path() / "empty_person");
    std::ofstream(tmp.path() / "person0" / "notes.txt") << "ignored";
    const auto a = ingest(tmp.path(), 0.5, 9);
    EXPECT_EQ(a.persons, (std::vector<std::string>{"person0", "person1", "person2"}));
    for (std::size_t i = 1; i < a.samples.size(); ++i)
        EXPECT_LT(a.samples[i - 1].path, a.samples[i].path);
    EXPECT_EQ(a.samples[2].path.filename(), "img10.pgm"); // img0, img1, img10, img11, img2...

    const auto b = ingest(tmp.path(), 0.5, 9);
    EXPECT_EQ(a.split, b.split);
    const auto c = ingest(tmp.path(), 0.5, 10);
    EXPECT_NE(a.split, c.split);
}

TEST(Ingest, Errors)
{
    TempDir tmp("ingest_errors");
    auto expect_code = [&](ErrorCode code, auto&& fn) {
        try {
            fn();
            FAIL() << error_name(code);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), code);
        }
    };
    expect_code(ErrorCode::EmptyDataset, [&] { ingest(tmp.path()); });
    make_tree(tmp.path(), 1, 3);
    expect_code(ErrorCode::NeedTwoClasses, [&] { ingest(tmp.path()); });
    make_tree(tmp.path(), 2, 3);
    expect_code(ErrorCode::InvalidConfig, [&] { ingest(tmp.path(), 1.0); });

    const auto dangling = tmp.path() / "person1" / "zz.pgm";
    fs::create_symlink(tmp.path() / "missing.pgm", dangling);
    try {
        ingest(tmp.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
        EXPECT_NE(std::string(e.what()).find(dangling.string()), std::string::npos);
    }
}

TEST(AssignSplit, DisjointCoveringAndStratified)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        Dataset ds;
        const std::size_t persons = 2 + rng() % 6;
        for (std::size_t p = 0; p < persons; ++p) {
            ds.persons.push_back("p" + std::to_string(p));
            const std::size_t n = 2 + rng() % 20;
            for (std::size_t k = 0; k < n; ++k)
                ds.samples.push_back({"x", p});
        }
        // Interleave persons so the split cannot rely on contiguous blocks.
        std::shuffle(ds.samples.begin(), ds.samples.end(), rng);
        const double ratio = 0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
        assign_split(ds, ratio, rng());
        ASSERT_EQ(ds.split.size(), ds.samples.size());
        for (std::size_t p = 0; p < persons; ++p) {
            std::size_t n = 0, train = 0;
            for (std::size_t i = 0; i < ds.samples.size(); ++i)
                if (ds.samples[i].person == p) {
                    ++n;
                    train += ds.split[i] == Split::train;
                }
            EXPECT_EQ(train, train_quota(n, ratio));
            EXPECT_GE(train, 1u);
            EXPECT_LT(train, n);
        }
    }
}

} // namespace
} // namespace thermoface
