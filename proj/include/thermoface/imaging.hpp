#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "thermoface/error.hpp"
#include "thermoface/image.hpp"

namespace thermoface {

enum class MagnitudeRule {
    euclidean, // sqrt(Px^2 + Py^2)
    l1,        // |Px| + |Py|
};

/// Luma conversion with weights 0.2989 / 0.5870 / 0.1140, rounded half up.
inline GrayImage to_grayscale(const RgbImage& img)
{
    GrayImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double v = 0.2989 * src[i].r + 0.5870 * src[i].g + 0.1140 * src[i].b;
        dst[i] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
    return out;
}

/// Global mean of the image as a real number.
inline double mean_value(const GrayImage& img)
{
    if (img.empty())
        throw Error(ErrorCode::EmptyImage);
    std::uint64_t sum = 0;
    for (auto v : img.pixels())
        sum += v;
    return static_cast<double>(sum) / static_cast<double>(img.size());
}

/// 1 where g >= mean(g), else 0.
inline BinaryImage mean_threshold(const GrayImage& img)
{
    const double mean = mean_value(img);
    BinaryImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = static_cast<double>(src[i]) >= mean ? 1 : 0;
    return out;
}

inline BinaryImage bit_plane(const GrayImage& img, int plane)
{
    if (plane < 0 || plane > 7)
        throw Error(ErrorCode::InvalidPlane, "plane " + std::to_string(plane) + " not in [0,7]");
    BinaryImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = static_cast<std::uint8_t>((src[i] >> plane) & 1u);
    return out;
}

/// Flat 3x3 grayscale erosion (minimum filter), edge-replicated borders.
inline GrayImage gray_erode(const GrayImage& img)
{
    GrayImage out(img.width(), img.height());
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            std::uint8_t m = 255;
            for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
                for (std::ptrdiff_t dx = -1; dx <= 1; ++dx)
                    m = std::min(m, img.clamped(x + dx, y + dy));
            out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = m;
        }
    }
    return out;
}

/// Sobel gradients with edge-replicated borders.
///
/// Px uses [-1 0 1; -2 0 2; -1 0 1] and Py uses [1 2 1; 0 0 0; -1 -2 -1],
/// both applied as correlation so a dark-to-bright step left to right gives
/// Px > 0 and a bright-above-dark step gives Py > 0. Orientation is
/// atan2(Py, Px), 0 where both vanish.
inline GradientField sobel(const GrayImage& img, MagnitudeRule rule = MagnitudeRule::euclidean)
{
    if (img.width() < 3 || img.height() < 3)
        throw Error(ErrorCode::ImageTooSmall, "sobel needs at least 3x3");

    GradientField field;
    field.width = img.width();
    field.height = img.height();
    field.magnitude.resize(img.size());
    field.orientation.resize(img.size());

    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            auto p = [&](std::ptrdiff_t dx, std::ptrdiff_t dy) {
                return static_cast<int>(img.clamped(x + dx, y + dy));
            };
            const int px = -p(-1, -1) + p(1, -1) - 2 * p(-1, 0) + 2 * p(1, 0) - p(-1, 1) + p(1, 1);
            const int py = p(-1, -1) + 2 * p(0, -1) + p(1, -1) - p(-1, 1) - 2 * p(0, 1) - p(1, 1);
            const auto i = static_cast<std::size_t>(y * w + x);
            const double fx = px;
            const double fy = py;
            field.magnitude[i] = rule == MagnitudeRule::euclidean ? std::sqrt(fx * fx + fy * fy)
                                                                  : std::abs(fx) + std::abs(fy);
            field.orientation[i] = (px == 0 && py == 0) ? 0.0 : std::atan2(fy, fx);
        }
    }
    return field;
}

/// 1 where magnitude >= mean magnitude of the field.
inline BinaryImage edge_binarize(const GradientField& field)
{
    BinaryImage out(field.width, field.height);
    if (field.magnitude.empty())
        return out;
    double sum = 0.0;
    for (double m : field.magnitude)
        sum += m;
    // The slack absorbs summation rounding so a uniform field maps to all ones.
    const double mean = sum / static_cast<double>(field.magnitude.size());
    const double cut = mean - 1e-12 * mean;
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = field.magnitude[i] >= cut ? 1 : 0;
    return out;
}

} // namespace thermoface
