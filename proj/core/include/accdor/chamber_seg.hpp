#pragma once

#include "accdor/imaging.hpp"
#include "accdor/segmenter.hpp"

#include <vector>

namespace accdor {

/// One prompt offset component, either in pixels or as a fraction of the image width.
struct OffsetValue {
    double value = 0.0;
    bool fraction_of_width = false;

    double resolve(int image_width) const {
        return fraction_of_width ? value * static_cast<double>(image_width) : value;
    }
};

struct PromptOffset {
    OffsetValue row;
    OffsetValue col;
};

/// Heuristic prompt generation settings.
struct HpgConfig {
    double r_as = 0.7;  // merge the second-largest object when its area ratio exceeds this
    int n_prompts = 2;
    std::vector<PromptOffset> offsets{
        {{0.0, false}, {0.05, true}},
        {{0.0, false}, {-0.05, true}},
    };

    void validate() const;
};

struct PromptSet {
    std::vector<Point> points;
    Centroid source_centroid;
};

/// The final chamber mask. Every connected component contains at least one prompt.
struct ChamberMask {
    BinaryMask mask;
    PromptSet prompts_used;
};

/// Binarizes at the mean intensity and keeps the largest 8-connected object,
/// plus the second-largest when area(second) / area(largest) > r_as.
BinaryMask anterior_segment_mask(const GrayImage& image, double r_as);

/// Rounds centroid + offset for each configured offset and clamps to the image.
PromptSet prompts_from_centroid(const Centroid& centroid, int height, int width,
                                const HpgConfig& config);

PromptSet generate_prompts(const GrayImage& image, const HpgConfig& config = {});

/// Picks the candidate containing the most prompts (ties: higher score, then
/// earlier candidate) and keeps only its components that contain a prompt.
ChamberMask select_chamber_mask(const SegmenterOutput& output, const PromptSet& prompts);

ChamberMask segment_chamber(const GrayImage& image, PromptableSegmenter& segmenter,
                            const HpgConfig& config = {});

} // namespace accdor
