#pragma once

// The three blood-perfusion extraction routes, each ending in a thinned
// curve network over the cropped face.

#include <optional>
#include <string>
#include <string_view>

#include "thermoface/error.hpp"
#include "thermoface/image.hpp"
#include "thermoface/imaging.hpp"
#include "thermoface/skeleton.hpp"

namespace thermoface {

enum class PerfusionTag { bitplane, erosion, sobel };

constexpr std::string_view perfusion_name(PerfusionTag t)
{
    switch (t) {
    case PerfusionTag::bitplane: return "bitplane";
    case PerfusionTag::erosion: return "erosion";
    case PerfusionTag::sobel: return "sobel";
    }
    return "?";
}

inline PerfusionTag parse_perfusion(std::string_view name)
{
    if (name == "bitplane")
        return PerfusionTag::bitplane;
    if (name == "erosion")
        return PerfusionTag::erosion;
    if (name == "sobel")
        return PerfusionTag::sobel;
    throw Error(ErrorCode::InvalidConfig, "unknown perfusion method '" + std::string(name) + "'");
}

struct PerfusionMethod {
    PerfusionTag tag = PerfusionTag::bitplane;
    int bit_plane = 4;                                  // bitplane only
    MagnitudeRule magnitude_rule = MagnitudeRule::euclidean; // sobel only

    static PerfusionMethod bitplane(int plane) { return {PerfusionTag::bitplane, plane, MagnitudeRule::euclidean}; }
    static PerfusionMethod erosion() { return {PerfusionTag::erosion, 4, MagnitudeRule::euclidean}; }
    static PerfusionMethod sobel(MagnitudeRule rule = MagnitudeRule::euclidean)
    {
        return {PerfusionTag::sobel, 4, rule};
    }

    std::optional<int> plane() const
    {
        return tag == PerfusionTag::bitplane ? std::optional<int>(bit_plane) : std::nullopt;
    }
};

/// Every intermediate of one extraction, for debugging dumps.
struct PerfusionStages {
    std::optional<BinaryImage> plane;    // bitplane
    std::optional<GrayImage> eroded;     // erosion
    std::optional<BinaryImage> edge_map; // sobel (and thresholded erosion)
    SkeletonImage skeleton;
};

inline PerfusionStages extract_perfusion_stages(const GrayImage& face, const PerfusionMethod& method)
{
    if (face.empty())
        throw Error(ErrorCode::EmptyImage, "empty face crop");
    PerfusionStages st;
    switch (method.tag) {
    case PerfusionTag::bitplane:
        st.plane = bit_plane(face, method.bit_plane);
        st.skeleton = medial_axis(*st.plane);
        break;
    case PerfusionTag::erosion:
        st.eroded = gray_erode(face);
        st.edge_map = mean_threshold(*st.eroded);
        st.skeleton = medial_axis(*st.edge_map);
        break;
    case PerfusionTag::sobel:
        st.edge_map = edge_binarize(sobel(face, method.magnitude_rule));
        st.skeleton = medial_axis(*st.edge_map);
        break;
    }
    return st;
}

inline SkeletonImage extract_perfusion(const GrayImage& face, const PerfusionMethod& method)
{
    return extract_perfusion_stages(face, method).skeleton;
}

} // namespace thermoface
