#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "thermoface/error.hpp"

namespace thermoface {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 2-D raster. The Tag parameter keeps gray and binary images
/// apart in the type system even though both store bytes.
template <typename T, typename Tag>
class Raster {
public:
    using value_type = T;

    Raster() = default;

    Raster(std::size_t width, std::size_t height, T fill = T{})
        : width_(width), height_(height), pixels_(width * height, fill)
    {
    }

    Raster(std::size_t width, std::size_t height, std::vector<T> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels))
    {
        if (pixels_.size() != width_ * height_)
            throw Error(ErrorCode::ShapeMismatch, "pixel count does not match width x height");
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }

    T& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
    const T& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }

    // Signed lookup returning `outside` beyond the frame.
    T get_or(std::ptrdiff_t x, std::ptrdiff_t y, T outside) const
    {
        if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(width_) ||
            y >= static_cast<std::ptrdiff_t>(height_))
            return outside;
        return pixels_[static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)];
    }

    // Signed lookup with edge replication.
    const T& clamped(std::ptrdiff_t x, std::ptrdiff_t y) const
    {
        const auto w = static_cast<std::ptrdiff_t>(width_);
        const auto h = static_cast<std::ptrdiff_t>(height_);
        x = x < 0 ? 0 : (x >= w ? w - 1 : x);
        y = y < 0 ? 0 : (y >= h ? h - 1 : y);
        return pixels_[static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)];
    }

    std::span<T> pixels() noexcept { return pixels_; }
    std::span<const T> pixels() const noexcept { return pixels_; }
    const std::vector<T>& data() const noexcept { return pixels_; }

    bool same_shape(std::size_t w, std::size_t h) const noexcept
    {
        return width_ == w && height_ == h;
    }

    template <typename U, typename OtherTag>
    bool same_shape(const Raster<U, OtherTag>& other) const noexcept
    {
        return same_shape(other.width(), other.height());
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<T> pixels_;
};

struct RgbTag {};
struct GrayTag {};
struct BinaryTag {};

using RgbImage = Raster<Rgb, RgbTag>;
/// 8-bit grayscale, values 0..255.
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// Values are 0 (background) or 1 (foreground).
using BinaryImage = Raster<std::uint8_t, BinaryTag>;
/// A BinaryImage whose foreground is a one-pixel-wide curve network.
using SkeletonImage = BinaryImage;

inline std::size_t count_foreground(const BinaryImage& img)
{
    std::size_t n = 0;
    for (auto v : img.pixels())
        n += v != 0;
    return n;
}

/// Sobel output: per-pixel gradient magnitude and orientation (radians, (-pi, pi]).
struct GradientField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> magnitude;
    std::vector<double> orientation;
};

} // namespace thermoface
