#include "accdor/chamber_seg.hpp"

#include "accdor/errors.hpp"
#include "accdor/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace accdor {

void HpgConfig::validate() const {
    if (!(r_as > 0.0 && r_as <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "r_as must lie in (0, 1]");
    }
    if (n_prompts < 1) {
        throw Error(ErrorCode::InvalidConfig, "n_prompts must be at least 1");
    }
    if (offsets.size() != static_cast<std::size_t>(n_prompts)) {
        throw Error(ErrorCode::InvalidConfig, "expected " + std::to_string(n_prompts) +
                                                  " prompt offsets, got " +
                                                  std::to_string(offsets.size()));
    }
}

BinaryMask anterior_segment_mask(const GrayImage& image, double r_as) {
    const auto px = image.pixels();
    const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
    if (*lo == *hi) {
        throw Error(ErrorCode::DegenerateImage, "image has a single intensity");
    }
    const ComponentSet objects = connected_components(binarize(image, mean_intensity(image)));
    if (objects.empty()) {
        throw Error(ErrorCode::NoAnteriorSegment, "no object above the mean intensity");
    }
    std::size_t keep = 1;
    if (objects.size() >= 2) {
        const double ratio = static_cast<double>(objects.components[1].pixel_count) /
                             static_cast<double>(objects.components[0].pixel_count);
        if (ratio > r_as) {
            keep = 2;
        }
    }
    return components_to_mask(std::span(objects.components.data(), keep), image.height(),
                              image.width());
}

PromptSet prompts_from_centroid(const Centroid& centroid, int height, int width,
                                const HpgConfig& config) {
    config.validate();
    PromptSet prompts;
    prompts.source_centroid = centroid;
    for (const auto& offset : config.offsets) {
        const double r = std::round(centroid.row + offset.row.resolve(width));
        const double c = std::round(centroid.col + offset.col.resolve(width));
        prompts.points.push_back({
            static_cast<int>(std::clamp(r, 0.0, static_cast<double>(height - 1))),
            static_cast<int>(std::clamp(c, 0.0, static_cast<double>(width - 1))),
        });
    }
    return prompts;
}

PromptSet generate_prompts(const GrayImage& image, const HpgConfig& config) {
    config.validate();
    const BinaryMask segment = anterior_segment_mask(image, config.r_as);
    return prompts_from_centroid(mask_centroid(segment), image.height(), image.width(), config);
}

ChamberMask select_chamber_mask(const SegmenterOutput& output, const PromptSet& prompts) {
    if (output.candidates.empty()) {
        throw Error(ErrorCode::BackendError, "segmenter returned no candidate masks");
    }
    auto contained = [&](const BinaryMask& mask) {
        return static_cast<std::size_t>(std::count_if(
            prompts.points.begin(), prompts.points.end(),
            [&](const Point& p) { return mask.contains(p) && mask.at(p); }));
    };

    const MaskCandidate* best = nullptr;
    std::size_t best_hits = 0;
    for (const auto& cand : output.candidates) {
        const std::size_t hits = contained(cand.mask);
        if (hits == 0) continue;
        if (best == nullptr || hits > best_hits || (hits == best_hits && cand.score > best->score)) {
            best = &cand;
            best_hits = hits;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorCode::PromptOutsideAllMasks, "no candidate mask contains a prompt point");
    }

    const ComponentSet parts = connected_components(best->mask);
    std::vector<Component> kept;
    for (const auto& comp : parts.components) {
        const bool has_prompt = std::any_of(
            prompts.points.begin(), prompts.points.end(), [&](const Point& p) {
                return std::find(comp.pixels.begin(), comp.pixels.end(), p) != comp.pixels.end();
            });
        if (has_prompt) {
            kept.push_back(comp);
        }
    }
    return ChamberMask{components_to_mask(kept, best->mask.height(), best->mask.width()), prompts};
}

ChamberMask segment_chamber(const GrayImage& image, PromptableSegmenter& segmenter,
                            const HpgConfig& config) {
    const PromptSet prompts = generate_prompts(image, config);
    const SegmenterOutput output = segmenter.segment(image, prompts.points);
    for (const auto& cand : output.candidates) {
        if (cand.mask.height() != image.height() || cand.mask.width() != image.width()) {
            throw Error(ErrorCode::ShapeError, "candidate mask does not match image dimensions");
        }
    }
    return select_chamber_mask(output, prompts);
}

} // namespace accdor
