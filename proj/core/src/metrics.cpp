#include "accdor/metrics.hpp"

#include "accdor/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace accdor {

std::string_view to_string(ScoreLevel level) {
    return level == ScoreLevel::Image ? "image" : "box";
}

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

PixelConfusion pixel_confusion(const BinaryMask& pred, const BinaryMask& gt) {
    if (!pred.same_shape(gt)) {
        throw Error(ErrorCode::ShapeError, "masks differ in size");
    }
    PixelConfusion c;
    const auto p = pred.bits();
    const auto g = gt.bits();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] && g[i]) ++c.tp;
        else if (p[i]) ++c.fp;
        else if (g[i]) ++c.fn;
    }
    return c;
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
    const PixelConfusion c = pixel_confusion(pred, gt);
    const std::size_t denom = c.tp + c.fp + c.fn;
    return denom == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double dice(const BinaryMask& pred, const BinaryMask& gt) {
    const PixelConfusion c = pixel_confusion(pred, gt);
    const std::size_t denom = 2 * c.tp + c.fp + c.fn;
    return denom == 0 ? 1.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

BoxConfusion match_boxes(std::span<const CandidateBox> predictions, std::span<const Point> gt) {
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].center < predictions[b].center;
    });

    std::vector<bool> claimed(gt.size(), false);
    BoxConfusion c;
    for (const std::size_t i : order) {
        const CandidateBox& box = predictions[i];
        std::size_t pick = gt.size();
        long long best_d2 = std::numeric_limits<long long>::max();
        for (std::size_t j = 0; j < gt.size(); ++j) {
            if (claimed[j] || !box.contains(gt[j])) continue;
            const long long dr = gt[j].row - box.center.row;
            const long long dc = gt[j].col - box.center.col;
            const long long d2 = dr * dr + dc * dc;
            if (d2 < best_d2 || (d2 == best_d2 && gt[j] < gt[pick])) {
                best_d2 = d2;
                pick = j;
            }
        }
        if (pick < gt.size()) {
            claimed[pick] = true;
            ++c.tp;
        } else {
            ++c.fp;
        }
    }
    c.fn = gt.size() - c.tp;
    return c;
}

DetectionScores image_scores(std::span<const BoxConfusion> per_image) {
    if (per_image.empty()) {
        throw Error(ErrorCode::EmptyDataset, "image-level scores need at least one image");
    }
    double sum_p = 0.0;
    double sum_r = 0.0;
    for (const auto& c : per_image) {
        const bool has_gt = c.gt_count() > 0;
        const bool has_pred = c.pred_count() > 0;
        if (!has_gt && !has_pred) {
            sum_p += 1.0;
            sum_r += 1.0;
        } else if (has_gt && has_pred) {
            sum_p += static_cast<double>(c.tp) / static_cast<double>(c.pred_count());
            sum_r += static_cast<double>(c.tp) / static_cast<double>(c.gt_count());
        }
        // Missing predictions, or predictions on an empty image, contribute (0, 0).
    }
    const auto n = static_cast<double>(per_image.size());
    DetectionScores s;
    s.level = ScoreLevel::Image;
    s.precision = sum_p / n;
    s.recall = sum_r / n;
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

DetectionScores box_scores(std::span<const BoxConfusion> per_image) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (const auto& c : per_image) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
    }
    DetectionScores s;
    s.level = ScoreLevel::Box;
    s.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    s.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

} // namespace accdor
