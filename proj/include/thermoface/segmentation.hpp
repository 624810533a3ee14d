#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "thermoface/error.hpp"
#include "thermoface/image.hpp"
#include "thermoface/imaging.hpp"

namespace thermoface {

enum class Connectivity { four, eight };

struct ComponentLabeling {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint32_t> labels;     // 0 = background, components 1..K
    std::vector<std::size_t> sizes;        // sizes[k - 1] = pixel count of label k

    std::size_t component_count() const noexcept { return sizes.size(); }
    std::size_t size_of(std::uint32_t label) const { return sizes.at(label - 1); }
};

/// Inclusive pixel bounds.
struct CropRect {
    std::size_t left = 0;
    std::size_t top = 0;
    std::size_t right = 0;
    std::size_t bottom = 0;

    std::size_t width() const noexcept { return right - left + 1; }
    std::size_t height() const noexcept { return bottom - top + 1; }

    friend bool operator==(const CropRect&, const CropRect&) = default;
};

namespace detail {

// Union-find over provisional labels; the root of a set is always its smallest label.
class LabelEquivalence {
public:
    std::uint32_t make()
    {
        parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
        return parent_.back();
    }

    std::uint32_t find(std::uint32_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (a < b)
            parent_[b] = a;
        else
            parent_[a] = b;
    }

    std::size_t size() const noexcept { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
};

} // namespace detail

/// Two-pass labeling with union-find equivalences. Final labels are
/// numbered 1..K in raster order of each component's first pixel.
inline ComponentLabeling label_components(const BinaryImage& img,
                                          Connectivity connectivity = Connectivity::eight)
{
    const std::size_t w = img.width();
    const std::size_t h = img.height();
    ComponentLabeling out;
    out.width = w;
    out.height = h;
    out.labels.assign(w * h, 0);

    detail::LabelEquivalence eq;
    eq.make(); // provisional label 0 is background

    // First pass: provisional labels from the already-visited neighbors.
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (!img.at(x, y))
                continue;
            std::uint32_t found[4];
            std::size_t n = 0;
            auto visit = [&](std::ptrdiff_t dx, std::ptrdiff_t dy) {
                const auto nx = static_cast<std::ptrdiff_t>(x) + dx;
                const auto ny = static_cast<std::ptrdiff_t>(y) + dy;
                if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(w))
                    return;
                const auto l = out.labels[static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx)];
                if (l)
                    found[n++] = l;
            };
            visit(-1, 0);
            visit(0, -1);
            if (connectivity == Connectivity::eight) {
                visit(-1, -1);
                visit(1, -1);
            }
            std::uint32_t label;
            if (n == 0) {
                label = eq.make();
            } else {
                label = *std::min_element(found, found + n);
                for (std::size_t i = 0; i < n; ++i)
                    eq.unite(label, found[i]);
            }
            out.labels[y * w + x] = label;
        }
    }

    // Second pass: resolve equivalences and renumber densely.
    std::vector<std::uint32_t> final_label(eq.size(), 0);
    std::uint32_t next = 0;
    for (auto& l : out.labels) {
        if (!l)
            continue;
        const auto root = eq.find(l);
        if (!final_label[root]) {
            final_label[root] = ++next;
            out.sizes.push_back(0);
        }
        l = final_label[root];
        ++out.sizes[l - 1];
    }
    return out;
}

/// Keeps only the largest component; ties go to the lowest label.
inline BinaryImage largest_component(const ComponentLabeling& labeling)
{
    if (labeling.sizes.empty())
        throw Error(ErrorCode::NoComponents);
    const auto best = static_cast<std::uint32_t>(
        std::max_element(labeling.sizes.begin(), labeling.sizes.end()) - labeling.sizes.begin() + 1);
    BinaryImage out(labeling.width, labeling.height);
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = labeling.labels[i] == best ? 1 : 0;
    return out;
}

/// Tightest rectangle holding every foreground pixel.
inline CropRect crop_to_foreground(const BinaryImage& img)
{
    CropRect r{img.width(), img.height(), 0, 0};
    bool any = false;
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
            if (!img.at(x, y))
                continue;
            any = true;
            r.left = std::min(r.left, x);
            r.right = std::max(r.right, x);
            r.top = std::min(r.top, y);
            r.bottom = std::max(r.bottom, y);
        }
    }
    if (!any)
        throw Error(ErrorCode::NoComponents);
    return r;
}

/// Crops `gray` to `rect`, zeroing pixels where the mask is background.
inline GrayImage apply_mask(const GrayImage& gray, const BinaryImage& mask, const CropRect& rect)
{
    if (!gray.same_shape(mask))
        throw Error(ErrorCode::ShapeMismatch, "gray and mask differ in size");
    if (rect.left > rect.right || rect.top > rect.bottom || rect.right >= gray.width() ||
        rect.bottom >= gray.height())
        throw Error(ErrorCode::ShapeMismatch, "crop rectangle outside image");
    GrayImage out(rect.width(), rect.height());
    for (std::size_t y = 0; y < out.height(); ++y)
        for (std::size_t x = 0; x < out.width(); ++x) {
            const auto sx = rect.left + x;
            const auto sy = rect.top + y;
            out.at(x, y) = mask.at(sx, sy) ? gray.at(sx, sy) : 0;
        }
    return out;
}

/// Binarize, keep the largest blob, crop and mask: gray thermogram to face region.
inline GrayImage segment_face(const GrayImage& gray, Connectivity connectivity = Connectivity::eight)
{
    const auto face = largest_component(label_components(mean_threshold(gray), connectivity));
    return apply_mask(gray, face, crop_to_foreground(face));
}

} // namespace thermoface
