#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "thermoface/error.hpp"
#include "thermoface/minutiae.hpp"

namespace thermoface {

struct FeatureVector {
    int block_size = 16;
    std::vector<std::uint32_t> counts; // row-major block order
    std::optional<std::string> label;  // person identifier

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline bool is_supported_block_size(int block_size)
{
    return block_size == 8 || block_size == 16 || block_size == 32;
}

inline std::size_t blocks_across(std::size_t extent, int block_size)
{
    return (extent + static_cast<std::size_t>(block_size) - 1) / static_cast<std::size_t>(block_size);
}

inline std::size_t feature_length(std::size_t width, std::size_t height, int block_size)
{
    return blocks_across(width, block_size) * blocks_across(height, block_size);
}

/// Counts minutiae per block_size x block_size tile of the frame.
inline FeatureVector block_features(const MinutiaeSet& set, int block_size, const CountPolicy& policy = {})
{
    if (!is_supported_block_size(block_size))
        throw Error(ErrorCode::InvalidBlockSize, std::to_string(block_size) + " is not 8, 16 or 32");
    FeatureVector fv;
    fv.block_size = block_size;
    const auto across = blocks_across(set.width, block_size);
    fv.counts.assign(feature_length(set.width, set.height, block_size), 0);
    const auto bs = static_cast<std::size_t>(block_size);
    for (const auto& p : set.points) {
        if (!policy.counts(p.kind))
            continue;
        const auto bx = static_cast<std::size_t>(p.x) / bs;
        const auto by = static_cast<std::size_t>(p.y) / bs;
        ++fv.counts.at(by * across + bx);
    }
    return fv;
}

/// CSV with a header row `label,c0,...,c(N-1)` and one row per vector.
inline void write_features_csv(std::ostream& out, const std::vector<FeatureVector>& rows)
{
    const std::size_t n = rows.empty() ? 0 : rows.front().counts.size();
    out << "label";
    for (std::size_t i = 0; i < n; ++i)
        out << ",c" << i;
    out << '\n';
    for (const auto& fv : rows) {
        if (fv.counts.size() != n)
            throw Error(ErrorCode::ShapeMismatch, "feature rows differ in length");
        out << fv.label.value_or("");
        for (auto c : fv.counts)
            out << ',' << c;
        out << '\n';
    }
}

/// Block size is inferred from the row length at the standard 320x224 frame
/// (0 when the length matches none of them).
inline std::vector<FeatureVector> read_features_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("label", 0) != 0)
        throw Error(ErrorCode::FormatError, "feature CSV must start with a label header");
    std::vector<FeatureVector> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream cells(line);
        std::string cell;
        FeatureVector fv;
        std::getline(cells, cell, ',');
        if (!cell.empty())
            fv.label = cell;
        while (std::getline(cells, cell, ',')) {
            try {
                fv.counts.push_back(static_cast<std::uint32_t>(std::stoul(cell)));
            } catch (const std::exception&) {
                throw Error(ErrorCode::FormatError, "bad feature count '" + cell + "'");
            }
        }
        fv.block_size = 0;
        for (int bs : {8, 16, 32})
            if (fv.counts.size() == feature_length(normalized_width, normalized_height, bs))
                fv.block_size = bs;
        if (!rows.empty() && rows.front().counts.size() != fv.counts.size())
            throw Error(ErrorCode::ShapeMismatch, "feature rows differ in length");
        rows.push_back(std::move(fv));
    }
    return rows;
}

} // namespace thermoface
