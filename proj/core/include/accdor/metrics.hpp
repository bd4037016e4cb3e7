#pragma once

#include "accdor/boxes.hpp"
#include "accdor/imaging.hpp"

#include <cstddef>
#include <span>
#include <string_view>

namespace accdor {

struct PixelConfusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

/// Per-image box/point confusion. tp + fn = ground-truth points, tp + fp = predicted boxes.
struct BoxConfusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t gt_count() const noexcept { return tp + fn; }
    std::size_t pred_count() const noexcept { return tp + fp; }

    friend bool operator==(const BoxConfusion&, const BoxConfusion&) = default;
};

enum class ScoreLevel { Image, Box };

std::string_view to_string(ScoreLevel level);

struct DetectionScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ScoreLevel level = ScoreLevel::Box;
};

/// 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall);

PixelConfusion pixel_confusion(const BinaryMask& pred, const BinaryMask& gt);

/// TP / (TP + FP + FN); 1.0 when both masks are empty. Throws ShapeError on mismatched dims.
double iou(const BinaryMask& pred, const BinaryMask& gt);

/// 2TP / (2TP + FP + FN); 1.0 when both masks are empty.
double dice(const BinaryMask& pred, const BinaryMask& gt);

/// Greedy point matching. Predictions are visited in (row, col) order of their
/// centres; each claims the nearest unclaimed ground-truth point it contains
/// (distance ties broken by the point's (row, col)). Claimed points are removed
/// from consideration.
BoxConfusion match_boxes(std::span<const CandidateBox> predictions, std::span<const Point> gt);

/// Per-image precision and recall averaged over images; F1 from the averages.
/// An image with ground truth but no predictions, or predictions but no ground
/// truth, scores (0, 0). An image with neither scores (1, 1).
DetectionScores image_scores(std::span<const BoxConfusion> per_image);

/// Precision, recall and F1 from confusions summed over all images.
DetectionScores box_scores(std::span<const BoxConfusion> per_image);

} // namespace accdor
