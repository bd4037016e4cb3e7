#pragma once

#include "accdor/boxes.hpp"
#include "accdor/classifier.hpp"
#include "accdor/imaging.hpp"
#include "accdor/metrics.hpp"
#include "accdor/thresholding.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace accdor {

struct CdmConfig {
    std::size_t beta_min = 1;
    std::size_t beta_max = 25;
    double alpha_min = 0.70;
    double alpha_max = 0.99;
    double alpha_step = 0.01;
    int box_h = 20;
    int box_w = 20;

    void validate() const;

    /// alpha_min, alpha_min + step, ... up to alpha_max (inclusive, 1e-9 slack),
    /// each rounded to 1e-9.
    std::vector<double> alpha_grid() const;
};

/// Threshold at alpha * Isodata, keep 8-connected components with area in
/// [beta_min, beta_max] whose rounded centroid lies inside the chamber, and
/// centre one box on each survivor.
std::vector<CandidateBox> detect_candidates(const GrayImage& image, const BinaryMask& chamber,
                                            double alpha, const CdmConfig& config);

/// Same, reusing a precomputed Isodata result for the image.
std::vector<CandidateBox> detect_candidates(const GrayImage& image, const BinaryMask& chamber,
                                            const ThresholdResult& base, double alpha,
                                            const CdmConfig& config);

/// box_h x box_w patch starting at center - (floor(h/2), floor(w/2)); zero outside the image.
Crop extract_crop(const GrayImage& image, const CandidateBox& box);

/// RealCell iff some ground-truth point falls inside the box.
CropLabel label_crop(const CandidateBox& box, std::span<const Point> gt_points);

/// Keeps boxes whose crop probability is >= 0.5; the kept boxes carry that probability as score.
std::vector<CandidateBox> filter_boxes(const GrayImage& image, std::span<const CandidateBox> boxes,
                                       const MlpParams& classifier);

std::vector<CandidateBox> detect_cells(const GrayImage& image, const BinaryMask& chamber,
                                       double alpha, const MlpParams& classifier,
                                       const CdmConfig& config);

/// An annotated image with its chamber mask. Non-owning.
struct DetectionSample {
    const GrayImage* image = nullptr;
    const BinaryMask* chamber = nullptr;
    std::span<const Point> cells;
};

struct AlphaScore {
    double alpha = 0.0;
    DetectionScores filtered;   // validation boxes kept by the classifier
    DetectionScores unfiltered; // all validation candidates
    std::size_t train_crops = 0;
    std::size_t val_candidates = 0;
    int epochs_run = 0;
};

struct AlphaSearchReport {
    std::vector<AlphaScore> per_alpha;
    double best_alpha = 0.0;
};

struct AlphaSearchResult {
    AlphaSearchReport report;
    MlpParams classifier;
};

/// Picks the alpha with the highest filtered F1; ties go to the larger alpha.
/// Throws AlphaSearchFailed when every alpha scores zero.
double best_alpha_of(std::span<const AlphaScore> per_alpha);

/// For each alpha on the grid: candidates on both splits, a classifier trained on
/// labelled train crops (validation crops drive early stopping), and box-level F1
/// of the classifier-filtered validation boxes. Alphas without train or validation
/// candidates score zero. `jobs` > 1 evaluates alphas concurrently.
AlphaSearchResult search_alpha(std::span<const DetectionSample> train,
                               std::span<const DetectionSample> val, const CdmConfig& config,
                               const TrainConfig& train_config, int jobs = 1);

} // namespace accdor
