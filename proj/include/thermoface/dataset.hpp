#pragma once

// Image collections laid out as <person>/<sample>.{png,pgm,ppm}, with a
// per-person train/test split.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "thermoface/error.hpp"
#include "thermoface/random.hpp"

namespace thermoface {

namespace fs = std::filesystem;

enum class Split : std::uint8_t { train, test };

struct Sample {
    fs::path path;
    std::size_t person = 0; // index into Dataset::persons
};

struct Dataset {
    std::vector<std::string> persons;
    std::vector<Sample> samples;
    std::vector<Split> split; // one entry per sample

    std::vector<std::size_t> indices(Split which) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == which)
                out.push_back(i);
        return out;
    }
};

/// Number of a person's n samples that go to training: floor(ratio * n),
/// kept within [1, n - 1] so both splits see every person.
inline std::size_t train_quota(std::size_t n, double ratio)
{
    if (n < 2)
        return n;
    const auto q = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    return std::clamp<std::size_t>(q, 1, n - 1);
}

/// Reassigns the split. Each person's samples are shuffled with the seed and
/// the first train_quota of them are marked train.
inline void assign_split(Dataset& ds, double ratio, std::uint64_t seed)
{
    if (!(ratio > 0.0 && ratio < 1.0))
        throw Error(ErrorCode::InvalidConfig, "split ratio must lie in (0, 1)");
    ds.split.assign(ds.samples.size(), Split::test);
    std::mt19937_64 rng(seed);
    for (std::size_t p = 0; p < ds.persons.size(); ++p) {
        std::vector<std::size_t> mine;
        for (std::size_t i = 0; i < ds.samples.size(); ++i)
            if (ds.samples[i].person == p)
                mine.push_back(i);
        detail::shuffle(mine, rng);
        const auto quota = train_quota(mine.size(), ratio);
        for (std::size_t k = 0; k < quota; ++k)
            ds.split[mine[k]] = Split::train;
    }
}

inline bool is_image_file(const fs::path& p)
{
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

/// Enumerates <dir>/<person>/<sample> in lexicographic order and splits it.
inline Dataset ingest(const fs::path& dir, double ratio = 0.8, std::uint64_t seed = 1)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw Error(ErrorCode::IoError, "not a directory: " + dir.string());

    std::vector<fs::path> person_dirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && entry.path().filename().string().front() != '.')
            person_dirs.push_back(entry.path());
    std::sort(person_dirs.begin(), person_dirs.end());

    Dataset ds;
    for (const auto& pd : person_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(pd))
            if ((entry.is_regular_file() || entry.is_symlink()) && is_image_file(entry.path()))
                files.push_back(entry.path());
        if (files.empty())
            continue;
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            if (!std::ifstream(f, std::ios::binary))
                throw Error(ErrorCode::IoError, "cannot read " + f.string());
            ds.samples.push_back({f, ds.persons.size()});
        }
        ds.persons.push_back(pd.filename().string());
    }
    if (ds.samples.empty())
        throw Error(ErrorCode::EmptyDataset, "no images under " + dir.string());
    if (ds.persons.size() < 2)
        throw Error(ErrorCode::NeedTwoClasses, "only one person under " + dir.string());
    assign_split(ds, ratio, seed);
    return ds;
}

} // namespace thermoface
