#pragma once

// Synthetic thermograms: one random branching vessel tree per person,
// drawn warm on a face-shaped oval over a cool background. Each sample
// rotates, shifts and adds noise to the person's template.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "thermoface/dataset.hpp"
#include "thermoface/error.hpp"
#include "thermoface/image.hpp"
#include "thermoface/image_io.hpp"
#include "thermoface/random.hpp"

namespace thermoface {

struct SynthOptions {
    std::size_t width = 352;
    std::size_t height = 256;
    double oval_a = 150.0; // semi-axes of the face
    double oval_b = 107.0;
    double background = 40.0; // bit 4 clear, like the skin
    double face_level = 100.0;
    double field_amplitude = 1.8; // per-person smooth temperature variation
    double vessel_gain = 20.0;    // vessels run this much warmer than skin
    double vessel_width = 3.0;
    double noise_sigma = 0.7; // clipped at +-2
    double max_rotation_deg = 5.0;
    double max_shift = 4.0;
    int min_roots = 3;
    int max_roots = 5;
    int max_depth = 3;
};

struct Segment {
    double x0, y0, x1, y1; // face-centered template coordinates
};

struct PersonTemplate {
    std::vector<Segment> vessels;
    // field(x, y) = sum_k amp[k] * cos(fx[k] x + fy[k] y + phase[k])
    std::vector<double> amp, fx, fy, phase;
    double scale_a = 1.0, scale_b = 1.0;
};

namespace detail {

inline bool inside_oval(double x, double y, double a, double b, double shrink)
{
    const double u = x / (a * shrink), v = y / (b * shrink);
    return u * u + v * v <= 1.0;
}

inline void grow_vessel(std::vector<Segment>& out, std::mt19937_64& rng, double x, double y, double dir, int depth,
                        double a, double b, const SynthOptions& opt)
{
    const int pieces = 2 + static_cast<int>(uniform_index(rng, 2));
    for (int i = 0; i < pieces; ++i) {
        const double len = uniform_real(rng, 14.0, 26.0);
        dir += uniform_real(rng, -0.35, 0.35);
        const double nx = x + len * std::cos(dir), ny = y + len * std::sin(dir);
        if (!inside_oval(nx, ny, a, b, 0.85))
            return;
        out.push_back({x, y, nx, ny});
        x = nx;
        y = ny;
    }
    if (depth >= opt.max_depth || unit_uniform(rng) < 0.15)
        return;
    const double spread = uniform_real(rng, 0.5, 0.9);
    grow_vessel(out, rng, x, y, dir - spread, depth + 1, a, b, opt);
    grow_vessel(out, rng, x, y, dir + spread, depth + 1, a, b, opt);
}

inline double segment_distance(const Segment& s, double x, double y)
{
    const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((x - s.x0) * dx + (y - s.y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(x - (s.x0 + t * dx), y - (s.y0 + t * dy));
}

/// Vessel strength in [0, 1] on an integer grid covering the oval.
struct VesselRaster {
    int x_min = 0, y_min = 0, w = 0, h = 0;
    std::vector<float> value;

    double at(int x, int y) const
    {
        x -= x_min;
        y -= y_min;
        if (x < 0 || y < 0 || x >= w || y >= h)
            return 0.0;
        return value[static_cast<std::size_t>(y) * w + x];
    }

    double sample(double x, double y) const
    {
        const double fx = std::floor(x), fy = std::floor(y);
        const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
        const double tx = x - fx, ty = y - fy;
        return (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) + (1 - tx) * ty * at(ix, iy + 1) +
               tx * ty * at(ix + 1, iy + 1);
    }
};

inline VesselRaster rasterize_vessels(const PersonTemplate& t, const SynthOptions& opt)
{
    VesselRaster r;
    r.x_min = -static_cast<int>(opt.oval_a * 1.1) - 4;
    r.y_min = -static_cast<int>(opt.oval_b * 1.1) - 4;
    r.w = -2 * r.x_min + 1;
    r.h = -2 * r.y_min + 1;
    r.value.assign(static_cast<std::size_t>(r.w) * r.h, 0.0f);
    const double half = opt.vessel_width / 2.0;
    for (const auto& s : t.vessels) {
        const int x0 = static_cast<int>(std::floor(std::min(s.x0, s.x1) - half - 1));
        const int x1 = static_cast<int>(std::ceil(std::max(s.x0, s.x1) + half + 1));
        const int y0 = static_cast<int>(std::floor(std::min(s.y0, s.y1) - half - 1));
        const int y1 = static_cast<int>(std::ceil(std::max(s.y0, s.y1) + half + 1));
        for (int y = std::max(y0, r.y_min); y <= std::min(y1, r.y_min + r.h - 1); ++y)
            for (int x = std::max(x0, r.x_min); x <= std::min(x1, r.x_min + r.w - 1); ++x) {
                const double v = std::clamp(half + 0.5 - segment_distance(s, x, y), 0.0, 1.0);
                auto& cell = r.value[static_cast<std::size_t>(y - r.y_min) * r.w + (x - r.x_min)];
                cell = std::max(cell, static_cast<float>(v));
            }
    }
    return r;
}

} // namespace detail

/// Random vessel tree and temperature field for one person.
inline PersonTemplate make_person(std::mt19937_64& rng, const SynthOptions& opt = {})
{
    PersonTemplate t;
    t.scale_a = detail::uniform_real(rng, 0.96, 1.04);
    t.scale_b = detail::uniform_real(rng, 0.96, 1.04);
    const double a = opt.oval_a * t.scale_a, b = opt.oval_b * t.scale_b;
    const int roots = opt.min_roots + static_cast<int>(detail::uniform_index(rng, opt.max_roots - opt.min_roots + 1));
    for (int i = 0; i < roots; ++i) {
        double x = 0, y = 0;
        do {
            x = detail::uniform_real(rng, -a, a) * 0.6;
            y = detail::uniform_real(rng, -b, b) * 0.6;
        } while (!detail::inside_oval(x, y, a, b, 0.6));
        const double dir = detail::uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
        detail::grow_vessel(t.vessels, rng, x, y, dir, 0, a, b, opt);
    }
    for (int k = 0; k < 3; ++k) {
        t.amp.push_back(detail::uniform_real(rng, 0.0, opt.field_amplitude / 3.0));
        t.fx.push_back(detail::uniform_real(rng, -0.03, 0.03));
        t.fy.push_back(detail::uniform_real(rng, -0.03, 0.03));
        t.phase.push_back(detail::uniform_real(rng, 0.0, 2.0 * std::numbers::pi));
    }
    return t;
}

/// Binary vessel mask of the template, unrotated and centered.
inline BinaryImage vessel_mask(const PersonTemplate& t, const SynthOptions& opt = {})
{
    const auto r = detail::rasterize_vessels(t, opt);
    BinaryImage img(opt.width, opt.height);
    const double cx = static_cast<double>(opt.width) / 2.0, cy = static_cast<double>(opt.height) / 2.0;
    for (std::size_t y = 0; y < opt.height; ++y)
        for (std::size_t x = 0; x < opt.width; ++x)
            img.at(x, y) = r.at(static_cast<int>(std::lround(x - cx)), static_cast<int>(std::lround(y - cy))) >= 0.5;
    return img;
}

/// One thermogram of the person with a random pose and noise.
inline GrayImage render_sample(const PersonTemplate& t, std::mt19937_64& rng, const SynthOptions& opt = {})
{
    const auto raster = detail::rasterize_vessels(t, opt);
    const double theta = detail::uniform_real(rng, -opt.max_rotation_deg, opt.max_rotation_deg) * std::numbers::pi / 180.0;
    const double tx = detail::uniform_real(rng, -opt.max_shift, opt.max_shift);
    const double ty = detail::uniform_real(rng, -opt.max_shift, opt.max_shift);
    const double c = std::cos(theta), s = std::sin(theta);
    const double cx = static_cast<double>(opt.width) / 2.0, cy = static_cast<double>(opt.height) / 2.0;
    const double a = opt.oval_a * t.scale_a, b = opt.oval_b * t.scale_b;

    GrayImage img(opt.width, opt.height);
    for (std::size_t y = 0; y < opt.height; ++y)
        for (std::size_t x = 0; x < opt.width; ++x) {
            // Back into template coordinates.
            const double ux = static_cast<double>(x) - cx - tx, uy = static_cast<double>(y) - cy - ty;
            const double qx = c * ux + s * uy, qy = -s * ux + c * uy;
            const double noise = std::clamp(opt.noise_sigma * detail::gaussian(rng), -2.0, 2.0);
            double v = opt.background + noise;
            if (detail::inside_oval(qx, qy, a, b, 1.0)) {
                v = opt.face_level + noise;
                for (std::size_t k = 0; k < t.amp.size(); ++k)
                    v += t.amp[k] * std::cos(t.fx[k] * qx + t.fy[k] * qy + t.phase[k]);
                v += opt.vessel_gain * raster.sample(qx, qy);
            }
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    return img;
}

/// The templates synth_generate draws for these arguments.
inline std::vector<PersonTemplate> synth_templates(std::size_t num_persons, std::uint64_t seed,
                                                   const SynthOptions& opt = {})
{
    std::mt19937_64 master(seed);
    std::vector<PersonTemplate> out;
    for (std::size_t p = 0; p < num_persons; ++p) {
        std::mt19937_64 rng(master());
        out.push_back(make_person(rng, opt));
    }
    return out;
}

/// Writes <out>/pNN/sNN.pgm for every person and sample plus manifest.csv,
/// and returns the dataset split 0.8 with the same seed.
inline Dataset synth_generate(std::size_t num_persons, std::size_t samples_per_person, std::uint64_t seed,
                              const fs::path& out_dir, const SynthOptions& opt = {})
{
    if (num_persons < 2)
        throw Error(ErrorCode::NeedTwoClasses, "synth needs at least two persons");
    if (samples_per_person < 2)
        throw Error(ErrorCode::InvalidConfig, "synth needs at least two samples per person");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

    auto name = [](char prefix, std::size_t i, std::size_t n) {
        const auto width = std::max<std::size_t>(2, std::to_string(n - 1).size());
        auto digits = std::to_string(i);
        return prefix + std::string(width - std::min(width, digits.size()), '0') + digits;
    };

    std::mt19937_64 master(seed);
    Dataset ds;
    std::ofstream manifest(out_dir / "manifest.csv");
    if (!manifest)
        throw Error(ErrorCode::IoError, "cannot write " + (out_dir / "manifest.csv").string());
    manifest << "path,person\n";
    for (std::size_t p = 0; p < num_persons; ++p) {
        std::mt19937_64 rng(master());
        const auto person = make_person(rng, opt);
        const auto pid = name('p', p, num_persons);
        fs::create_directories(out_dir / pid, ec);
        if (ec)
            throw Error(ErrorCode::IoError, "cannot create " + (out_dir / pid).string() + ": " + ec.message());
        for (std::size_t k = 0; k < samples_per_person; ++k) {
            const fs::path rel = fs::path(pid) / (name('s', k, samples_per_person) + ".pgm");
            save_pgm(out_dir / rel, render_sample(person, rng, opt));
            manifest << rel.generic_string() << ',' << pid << '\n';
            ds.samples.push_back({out_dir / rel, p});
        }
        ds.persons.push_back(pid);
    }
    if (!manifest.flush())
        throw Error(ErrorCode::IoError, "cannot write " + (out_dir / "manifest.csv").string());
    assign_split(ds, 0.8, seed);
    return ds;
}

} // namespace thermoface
