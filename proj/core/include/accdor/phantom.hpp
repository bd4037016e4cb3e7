#pragma once

#include "accdor/imaging.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace accdor {

struct IntRange {
    int lo = 0;
    int hi = 0;

    friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// Synthetic anterior-segment image: a bright ring (cornea above, iris/lens
/// below) around a dark chamber, on a dim background. Inside the chamber sit
/// compact bright cells and horizontal streak artifacts; more streaks lie
/// outside the chamber. Noise is Gaussian, clipped to +-noise_clip.
struct PhantomConfig {
    int height = 400;
    int width = 366;
    int chamber_intensity = 15;
    int segment_intensity = 170;
    int background_intensity = 45;
    double noise_sigma = 5.0;
    double noise_clip = 5.0;
    IntRange cell_count_range{4, 12};
    IntRange cell_intensity_range{75, 200};
    IntRange cell_area_range{1, 9};
    IntRange artifact_count_range{3, 8};
    IntRange outside_artifact_count_range{0, 3};
    IntRange artifact_intensity_range{72, 110};
    IntRange artifact_length_range{5, 9};
    double split_segment_probability = 0.3;
    int split_gap = 3; // half-height of the band removed from the ring when split

    void validate() const;
};

void to_json(nlohmann::json& j, const IntRange& r);
void from_json(const nlohmann::json& j, IntRange& r);
void to_json(nlohmann::json& j, const PhantomConfig& c);
void from_json(const nlohmann::json& j, PhantomConfig& c);

struct GroundTruth {
    BinaryMask chamber_mask;
    std::vector<Point> cell_points;
};

struct Phantom {
    GrayImage image;
    GroundTruth truth;
    bool split_segment = false;
};

/// Deterministic in (config, seed). Throws InvalidConfig when the geometry
/// does not fit or the requested objects cannot be placed.
Phantom generate_phantom(const PhantomConfig& config, std::uint64_t seed);

} // namespace accdor
