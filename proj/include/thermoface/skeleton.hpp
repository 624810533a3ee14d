#pragma once

// Medial-axis thinning: Zhang-Suen two-subiteration scheme, made
// topology-safe so the result keeps the input's eight-connected component
// count and never contains a 2x2 all-foreground block.

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "thermoface/image.hpp"

namespace thermoface {

namespace detail {

// Ring positions clockwise from north: N NE E SE S SW W NW.
inline constexpr std::array<int, 8> ring_dx = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr std::array<int, 8> ring_dy = {-1, -1, 0, 1, 1, 1, 0, -1};

// Number of eight-connected groups formed by the set ring pixels,
// considering only adjacency among the ring pixels themselves.
constexpr int ring_groups(unsigned mask)
{
    int groups = 0;
    unsigned seen = 0;
    for (int start = 0; start < 8; ++start) {
        if (!(mask >> start & 1u) || (seen >> start & 1u))
            continue;
        ++groups;
        unsigned frontier = 1u << start;
        seen |= frontier;
        while (frontier) {
            const int i = std::countr_zero(frontier);
            frontier &= frontier - 1;
            for (int j = 0; j < 8; ++j) {
                if (!(mask >> j & 1u) || (seen >> j & 1u))
                    continue;
                const int dx = ring_dx[i] - ring_dx[j];
                const int dy = ring_dy[i] - ring_dy[j];
                if (dx >= -1 && dx <= 1 && dy >= -1 && dy <= 1) {
                    seen |= 1u << j;
                    frontier |= 1u << j;
                }
            }
        }
    }
    return groups;
}

inline constexpr auto ring_group_table = [] {
    std::array<std::uint8_t, 256> t{};
    for (unsigned m = 0; m < 256; ++m)
        t[m] = static_cast<std::uint8_t>(ring_groups(m));
    return t;
}();

// 0 -> 1 transitions walking the ring once around.
constexpr int ring_transitions(unsigned mask)
{
    int a = 0;
    for (int i = 0; i < 8; ++i)
        a += !(mask >> i & 1u) && (mask >> ((i + 1) & 7) & 1u);
    return a;
}

// Binary image with a one-pixel background frame, so neighborhood reads
// never leave the buffer and off-image pixels count as background.
class PaddedMask {
public:
    explicit PaddedMask(const BinaryImage& img)
        : w_(img.width()), h_(img.height()), stride_(img.width() + 2),
          px_((img.width() + 2) * (img.height() + 2), 0)
    {
        for (std::size_t y = 0; y < h_; ++y)
            for (std::size_t x = 0; x < w_; ++x)
                px_[index(x, y)] = img.at(x, y) ? 1 : 0;
        const auto s = static_cast<std::ptrdiff_t>(stride_);
        for (int k = 0; k < 8; ++k)
            offset_[k] = ring_dy[k] * s + ring_dx[k];
    }

    std::size_t index(std::size_t x, std::size_t y) const noexcept { return (y + 1) * stride_ + x + 1; }

    unsigned ring(std::size_t i) const noexcept
    {
        unsigned m = 0;
        for (int k = 0; k < 8; ++k)
            m |= static_cast<unsigned>(px_[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + offset_[k])]) << k;
        return m;
    }

    std::size_t neighbor(std::size_t i, int k) const noexcept
    {
        return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + offset_[k]);
    }

    std::uint8_t& operator[](std::size_t i) noexcept { return px_[i]; }
    std::uint8_t operator[](std::size_t i) const noexcept { return px_[i]; }

    std::size_t width() const noexcept { return w_; }
    std::size_t height() const noexcept { return h_; }
    std::size_t stride() const noexcept { return stride_; }
    std::size_t buffer_size() const noexcept { return px_.size(); }

    BinaryImage unpad() const
    {
        BinaryImage out(w_, h_);
        for (std::size_t y = 0; y < h_; ++y)
            for (std::size_t x = 0; x < w_; ++x)
                out.at(x, y) = px_[index(x, y)];
        return out;
    }

private:
    std::size_t w_, h_, stride_;
    std::vector<std::uint8_t> px_;
    std::array<std::ptrdiff_t, 8> offset_{};
};

// Removing a pixel whose foreground ring forms one group cannot split or
// erase its component.
inline bool locally_removable(unsigned ring)
{
    return ring_group_table[ring] == 1;
}

// One Zhang-Suen subiteration. Candidates are chosen in parallel from the
// current state, then removed one by one while re-checking that each
// removal is still locally safe. Returns true if anything was removed.
inline bool zhang_suen_pass(PaddedMask& m, int subiteration)
{
    std::vector<std::size_t> candidates;
    for (std::size_t y = 0; y < m.height(); ++y) {
        for (std::size_t x = 0; x < m.width(); ++x) {
            const auto i = m.index(x, y);
            if (!m[i])
                continue;
            const unsigned r = m.ring(i);
            const int b = std::popcount(r);
            if (b < 2 || b > 6 || ring_transitions(r) != 1)
                continue;
            const bool n = r & 0x01u, e = r & 0x04u, s = r & 0x10u, w = r & 0x40u;
            const bool ok = subiteration == 0 ? !(n && e && s) && !(e && s && w)
                                              : !(n && e && w) && !(n && s && w);
            if (ok)
                candidates.push_back(i);
        }
    }
    bool changed = false;
    for (auto i : candidates) {
        const unsigned r = m.ring(i);
        if (std::popcount(r) >= 2 && locally_removable(r)) {
            m[i] = 0;
            changed = true;
        }
    }
    return changed;
}

// Pixels that lose every eight-connected path to `anchors` once `removed` is cleared.
inline std::vector<std::size_t> detached_if_removed(const PaddedMask& m, std::size_t removed,
                                                    const std::array<std::size_t, 3>& anchors)
{
    std::vector<std::uint8_t> seen(m.buffer_size(), 0);
    seen[removed] = 1;
    std::vector<std::size_t> stack(anchors.begin(), anchors.end());
    for (auto a : anchors)
        seen[a] = 1;
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        for (int k = 0; k < 8; ++k) {
            const auto j = m.neighbor(i, k);
            if (m[j] && !seen[j]) {
                seen[j] = 1;
                stack.push_back(j);
            }
        }
    }
    std::vector<std::size_t> detached;
    for (int k = 0; k < 8; ++k) {
        const auto start = m.neighbor(removed, k);
        if (!m[start] || seen[start])
            continue;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            detached.push_back(i);
            for (int q = 0; q < 8; ++q) {
                const auto j = m.neighbor(i, q);
                if (m[j] && !seen[j]) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
    }
    return detached;
}

// Clears one pixel from every remaining 2x2 all-foreground block. Prefers a
// pixel that is locally removable; if none of the four is, removes the one
// whose removal strands the fewest pixels, together with those pixels, so
// the component count is still unchanged.
inline bool break_square_blocks(PaddedMask& m)
{
    bool changed = false;
    const auto s = m.stride();
    for (std::size_t y = 0; y + 1 < m.height(); ++y) {
        for (std::size_t x = 0; x + 1 < m.width(); ++x) {
            const auto tl = m.index(x, y);
            const std::array<std::size_t, 4> block = {tl, tl + 1, tl + s, tl + s + 1};
            if (!(m[block[0]] && m[block[1]] && m[block[2]] && m[block[3]]))
                continue;
            changed = true;

            int chosen = -1;
            for (int k = 0; k < 4 && chosen < 0; ++k) {
                const unsigned r = m.ring(block[k]);
                if (locally_removable(r) && ring_transitions(r) == 1)
                    chosen = k;
            }
            for (int k = 0; k < 4 && chosen < 0; ++k)
                if (locally_removable(m.ring(block[k])))
                    chosen = k;
            if (chosen >= 0) {
                m[block[chosen]] = 0;
                continue;
            }

            std::vector<std::size_t> best_detached;
            for (int k = 0; k < 4; ++k) {
                std::array<std::size_t, 3> anchors{};
                for (int q = 0, n = 0; q < 4; ++q)
                    if (q != k)
                        anchors[n++] = block[q];
                auto detached = detached_if_removed(m, block[k], anchors);
                if (chosen < 0 || detached.size() < best_detached.size()) {
                    chosen = k;
                    best_detached = std::move(detached);
                }
            }
            m[block[chosen]] = 0;
            for (auto i : best_detached)
                m[i] = 0;
        }
    }
    return changed;
}

} // namespace detail

/// Thins foreground regions to one-pixel-wide curves.
///
/// Guarantees: the output is a subset of the input, has the same number of
/// eight-connected components, contains no 2x2 all-foreground block, and is
/// a fixed point (thinning it again changes nothing). Pixels outside the
/// frame are treated as background.
inline SkeletonImage medial_axis(const BinaryImage& img)
{
    detail::PaddedMask m(img);
    for (;;) {
        bool changed = detail::zhang_suen_pass(m, 0);
        changed |= detail::zhang_suen_pass(m, 1);
        if (changed)
            continue;
        if (!detail::break_square_blocks(m))
            break;
    }
    return m.unpad();
}

/// True if no 2x2 window is entirely foreground.
inline bool is_thin(const BinaryImage& img)
{
    for (std::size_t y = 0; y + 1 < img.height(); ++y)
        for (std::size_t x = 0; x + 1 < img.width(); ++x)
            if (img.at(x, y) && img.at(x + 1, y) && img.at(x, y + 1) && img.at(x + 1, y + 1))
                return false;
    return true;
}

} // namespace thermoface
