#pragma once

// Repeated split evaluation: zero-shot chamber segmentation once per image,
// then for every repeat an alpha search on train/validation and scoring of the
// Isodata baseline, the unfiltered adjusted cutoff, and the filtered detector
// on the test split.

#include "accdor/cell_detect.hpp"
#include "accdor/chamber_seg.hpp"
#include "accdor/dataset.hpp"
#include "accdor/metrics.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace accdor {

struct LabeledImage {
    std::string id;
    GrayImage image;
    std::optional<BinaryMask> chamber_truth;
    std::vector<Point> cells;
};

std::vector<LabeledImage> load_images(const DatasetManifest& manifest);

using SegmenterFactory = std::function<std::unique_ptr<PromptableSegmenter>()>;

/// Segments every image with one segmenter per worker.
std::vector<ChamberMask> segment_all(std::span<const LabeledImage> images,
                                     const SegmenterFactory& make_segmenter,
                                     const HpgConfig& config, int jobs = 1);

struct ProtocolConfig {
    CdmConfig cdm;
    TrainConfig train;
    SplitSpec split;
    std::size_t baseline_beta_min = 1; // minimum area for the plain Isodata detector
    int jobs = 1;
};

struct MethodResult {
    DetectionScores image;
    DetectionScores box;
    std::vector<BoxConfusion> per_image;
};

/// Confusions and image/box scores for a detector's output on a set of images.
MethodResult score_method(std::span<const std::vector<CandidateBox>> detections,
                          std::span<const std::vector<Point>> truths);

struct RepeatResult {
    int repeat = 0;
    SplitIndices split;
    AlphaSearchReport alpha_search;
    MethodResult baseline;   // Isodata, alpha = 1
    MethodResult unfiltered; // adjusted cutoff at the selected alpha
    MethodResult cdm;        // adjusted cutoff + classifier
    std::optional<double> mean_iou;  // test split, when masks are annotated
    std::optional<double> mean_dice;
};

struct ProtocolReport {
    std::vector<std::string> image_ids;
    std::vector<RepeatResult> repeats;
};

RepeatResult run_repeat(std::span<const LabeledImage> images, std::span<const ChamberMask> chambers,
                        const ProtocolConfig& config, int repeat_index);

/// Runs repeats 0 .. repeats-1 (at most config.split.repeats).
ProtocolReport run_protocol(std::span<const LabeledImage> images,
                            std::span<const ChamberMask> chambers, const ProtocolConfig& config,
                            int repeats);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
MeanStd mean_std(std::span<const double> values);

nlohmann::json scores_to_json(const DetectionScores& s);
nlohmann::json method_to_json(const MethodResult& m, std::span<const std::string> ids);
nlohmann::json alpha_report_to_json(const AlphaSearchReport& report);
nlohmann::json report_to_json(const ProtocolReport& report);

} // namespace accdor
