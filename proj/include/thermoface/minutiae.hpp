#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "thermoface/error.hpp"
#include "thermoface/image.hpp"
#include "thermoface/skeleton.hpp"

namespace thermoface {

inline constexpr std::size_t normalized_width = 320;
inline constexpr std::size_t normalized_height = 224;

enum class MinutiaKind : std::uint8_t { termination, bifurcation, normal };

constexpr char kind_code(MinutiaKind k)
{
    switch (k) {
    case MinutiaKind::termination: return 'T';
    case MinutiaKind::bifurcation: return 'B';
    case MinutiaKind::normal: return 'N';
    }
    return '?';
}

struct Minutia {
    int x = 0; // column
    int y = 0; // row
    MinutiaKind kind = MinutiaKind::termination;

    friend bool operator==(const Minutia&, const Minutia&) = default;
};

struct MinutiaeSet {
    std::size_t width = normalized_width;
    std::size_t height = normalized_height;
    std::vector<Minutia> points;

    friend bool operator==(const MinutiaeSet&, const MinutiaeSet&) = default;
};

enum class Extractor { neighbor_count, crossing_number };

constexpr std::string_view extractor_name(Extractor e)
{
    return e == Extractor::neighbor_count ? "neighbor_count" : "crossing_number";
}

/// Which kinds enter the block counts. Normal points are ridge
/// continuations, not minutiae, so they are left out unless asked for.
struct CountPolicy {
    bool include_normal = false;

    bool counts(MinutiaKind k) const noexcept { return k != MinutiaKind::normal || include_normal; }
};

struct SpuriousFilter {
    int border_margin = 8; // pixels from the frame edge
    double min_distance = 5.0;
};

/// Nearest-neighbor resample to the target frame, then re-thin.
inline SkeletonImage normalize_size(const SkeletonImage& img, std::size_t target_w = normalized_width,
                                    std::size_t target_h = normalized_height)
{
    if (target_w == 0 || target_h == 0)
        throw Error(ErrorCode::InvalidTarget, "target size must be positive");
    if (img.empty())
        throw Error(ErrorCode::EmptyImage);
    BinaryImage resized(target_w, target_h);
    for (std::size_t y = 0; y < target_h; ++y) {
        const std::size_t sy = y * img.height() / target_h;
        for (std::size_t x = 0; x < target_w; ++x)
            resized.at(x, y) = img.at(x * img.width() / target_w, sy);
    }
    return medial_axis(resized);
}

namespace detail {

inline unsigned neighbor_ring(const BinaryImage& img, std::size_t x, std::size_t y)
{
    unsigned m = 0;
    for (int k = 0; k < 8; ++k) {
        const auto nx = static_cast<std::ptrdiff_t>(x) + ring_dx[k];
        const auto ny = static_cast<std::ptrdiff_t>(y) + ring_dy[k];
        m |= static_cast<unsigned>(img.get_or(nx, ny, 0) != 0) << k;
    }
    return m;
}

} // namespace detail

/// Crossing number of a foreground pixel: half the number of value changes
/// walking its eight neighbors W, NW, N, NE, E, SE, S, SW and back to W.
inline int crossing_number(const BinaryImage& img, std::size_t x, std::size_t y)
{
    static constexpr int dx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    static constexpr int dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    int p[9];
    for (int i = 0; i < 8; ++i)
        p[i] = img.get_or(static_cast<std::ptrdiff_t>(x) + dx[i], static_cast<std::ptrdiff_t>(y) + dy[i], 0) ? 1 : 0;
    p[8] = p[0];
    int sum = 0;
    for (int i = 0; i < 8; ++i)
        sum += p[i] != p[i + 1];
    return sum / 2;
}

/// 3x3 window count: one neighbor is a termination, two a normal
/// point, three a bifurcation. Other counts yield nothing.
inline MinutiaeSet extract_neighbor_count(const SkeletonImage& img)
{
    MinutiaeSet out{img.width(), img.height(), {}};
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x) {
            if (!img.at(x, y))
                continue;
            const int n = std::popcount(detail::neighbor_ring(img, x, y));
            const auto xi = static_cast<int>(x), yi = static_cast<int>(y);
            if (n == 1)
                out.points.push_back({xi, yi, MinutiaKind::termination});
            else if (n == 2)
                out.points.push_back({xi, yi, MinutiaKind::normal});
            else if (n == 3)
                out.points.push_back({xi, yi, MinutiaKind::bifurcation});
        }
    return out;
}

/// CN == 1 is a termination, CN >= 3 a bifurcation.
inline MinutiaeSet extract_crossing_number(const SkeletonImage& img)
{
    MinutiaeSet out{img.width(), img.height(), {}};
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x) {
            if (!img.at(x, y))
                continue;
            const int cn = crossing_number(img, x, y);
            if (cn == 1)
                out.points.push_back({static_cast<int>(x), static_cast<int>(y), MinutiaKind::termination});
            else if (cn >= 3)
                out.points.push_back({static_cast<int>(x), static_cast<int>(y), MinutiaKind::bifurcation});
        }
    return out;
}

inline MinutiaeSet extract_minutiae(const SkeletonImage& img, Extractor extractor)
{
    return extractor == Extractor::neighbor_count ? extract_neighbor_count(img)
                                                  : extract_crossing_number(img);
}

/// Drops terminations and bifurcations near the frame edge, and every
/// member of a same-kind pair closer than min_distance. Normal points pass.
inline MinutiaeSet filter_spurious(const MinutiaeSet& set, const SpuriousFilter& rule = {})
{
    const auto w = static_cast<int>(set.width);
    const auto h = static_cast<int>(set.height);
    const double d2 = rule.min_distance * rule.min_distance;
    const auto& pts = set.points;
    std::vector<bool> drop(pts.size(), false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (p.kind == MinutiaKind::normal)
            continue;
        const int m = rule.border_margin;
        if (p.x < m || p.y < m || p.x >= w - m || p.y >= h - m)
            drop[i] = true;
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const auto& q = pts[j];
            if (q.kind != p.kind)
                continue;
            const double dx = p.x - q.x, dy = p.y - q.y;
            if (dx * dx + dy * dy <= d2)
                drop[i] = drop[j] = true;
        }
    }
    MinutiaeSet out{set.width, set.height, {}};
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!drop[i])
            out.points.push_back(pts[i]);
    return out;
}

/// Text form: "w h" header, then one "x y K" line per point, K in {T, B, N}.
inline void write_minutiae(std::ostream& out, const MinutiaeSet& set)
{
    out << set.width << ' ' << set.height << '\n';
    for (const auto& p : set.points)
        out << p.x << ' ' << p.y << ' ' << kind_code(p.kind) << '\n';
}

inline MinutiaeSet read_minutiae(std::istream& in)
{
    MinutiaeSet set;
    if (!(in >> set.width >> set.height))
        throw Error(ErrorCode::FormatError, "missing minutiae header");
    Minutia m;
    char k;
    while (in >> m.x >> m.y >> k) {
        switch (k) {
        case 'T': m.kind = MinutiaKind::termination; break;
        case 'B': m.kind = MinutiaKind::bifurcation; break;
        case 'N': m.kind = MinutiaKind::normal; break;
        default: throw Error(ErrorCode::FormatError, std::string("unknown minutia kind ") + k);
        }
        set.points.push_back(m);
    }
    if (!in.eof())
        throw Error(ErrorCode::FormatError, "malformed minutia line");
    return set;
}

} // namespace thermoface
