#pragma once

// Binary PGM/PPM (P5/P6) and PNG input, PGM/PPM output.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <variant>

#include <png.h>

#include "thermoface/error.hpp"
#include "thermoface/image.hpp"
#include "thermoface/imaging.hpp"

namespace thermoface {

using AnyImage = std::variant<GrayImage, RgbImage>;

namespace detail {

inline std::size_t read_pnm_int(std::istream& in)
{
    // Skip whitespace and '#' comments.
    int c = in.peek();
    while (c != EOF) {
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else {
            break;
        }
        c = in.peek();
    }
    std::size_t value = 0;
    bool any = false;
    while (in.peek() != EOF && std::isdigit(in.peek())) {
        value = value * 10 + static_cast<std::size_t>(in.get() - '0');
        any = true;
    }
    if (!any)
        throw Error(ErrorCode::FormatError, "malformed PNM header");
    return value;
}

inline AnyImage read_png_file(const std::filesystem::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw Error(ErrorCode::IoError, path.string() + ": " + image.message);

    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
    }
    const std::size_t w = image.width;
    const std::size_t h = image.height;
    if (!color)
        return GrayImage(w, h, std::move(buffer));
    std::vector<Rgb> px(w * h);
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = Rgb{buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
    return RgbImage(w, h, std::move(px));
}

} // namespace detail

/// Reads a P5 (gray) or P6 (color) stream with maxval <= 255.
inline AnyImage read_pnm(std::istream& in)
{
    char magic[2] = {};
    if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw Error(ErrorCode::FormatError, "expected P5 or P6 magic");
    const std::size_t w = detail::read_pnm_int(in);
    const std::size_t h = detail::read_pnm_int(in);
    const std::size_t maxval = detail::read_pnm_int(in);
    if (w == 0 || h == 0 || maxval == 0 || maxval > 255)
        throw Error(ErrorCode::FormatError, "unsupported PNM dimensions or maxval");
    in.get(); // single whitespace before raster

    const std::size_t channels = magic[1] == '5' ? 1 : 3;
    std::vector<std::uint8_t> raw(w * h * channels);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        throw Error(ErrorCode::FormatError, "truncated PNM raster");
    auto scale = [maxval](std::uint8_t v) {
        return maxval == 255 ? v : static_cast<std::uint8_t>((v * 255u + maxval / 2) / maxval);
    };
    if (channels == 1) {
        std::transform(raw.begin(), raw.end(), raw.begin(), scale);
        return GrayImage(w, h, std::move(raw));
    }
    std::vector<Rgb> px(w * h);
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = Rgb{scale(raw[3 * i]), scale(raw[3 * i + 1]), scale(raw[3 * i + 2])};
    return RgbImage(w, h, std::move(px));
}

/// Loads .pgm, .ppm or .png by extension.
inline AnyImage load_image(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png")
        return detail::read_png_file(path);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    try {
        return read_pnm(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

/// Loads any supported file as grayscale, converting color input.
inline GrayImage load_gray(const std::filesystem::path& path)
{
    auto img = load_image(path);
    if (auto* rgb = std::get_if<RgbImage>(&img))
        return to_grayscale(*rgb);
    return std::get<GrayImage>(std::move(img));
}

inline void write_pgm(std::ostream& out, const GrayImage& img)
{
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
}

/// Binary images are written with foreground as 255.
inline void write_pgm(std::ostream& out, const BinaryImage& img)
{
    GrayImage g(img.width(), img.height());
    std::transform(img.pixels().begin(), img.pixels().end(), g.pixels().begin(),
                   [](std::uint8_t v) -> std::uint8_t { return v ? 255 : 0; });
    write_pgm(out, g);
}

inline void write_ppm(std::ostream& out, const RgbImage& img)
{
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    for (const auto& p : img.pixels()) {
        const char rgb[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
        out.write(rgb, 3);
    }
}

template <typename Image>
void save_pgm(const std::filesystem::path& path, const Image& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_pgm(out, img);
    if (!out)
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

} // namespace thermoface
