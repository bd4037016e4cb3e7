#include "accdor/cell_detect.hpp"

#include "accdor/errors.hpp"
#include "accdor/parallel.hpp"

#include <cmath>
#include <string>

namespace accdor {

void CdmConfig::validate() const {
    if (beta_min < 1 || beta_min > beta_max) {
        throw Error(ErrorCode::InvalidConfig, "need 1 <= beta_min <= beta_max");
    }
    if (!(alpha_min > 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "need 0 < alpha_min <= alpha_max <= 1");
    }
    if (!(alpha_step > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "alpha_step must be positive");
    }
    if (box_h < 1 || box_w < 1) {
        throw Error(ErrorCode::InvalidConfig, "box dimensions must be positive");
    }
}

std::vector<double> CdmConfig::alpha_grid() const {
    validate();
    std::vector<double> grid;
    const auto steps = static_cast<long>(std::floor((alpha_max - alpha_min) / alpha_step + 1e-9));
    for (long i = 0; i <= steps; ++i) {
        grid.push_back(std::round((alpha_min + static_cast<double>(i) * alpha_step) * 1e9) / 1e9);
    }
    return grid;
}

std::vector<CandidateBox> detect_candidates(const GrayImage& image, const BinaryMask& chamber,
                                            const ThresholdResult& base, double alpha,
                                            const CdmConfig& config) {
    config.validate();
    if (chamber.height() != image.height() || chamber.width() != image.width()) {
        throw Error(ErrorCode::ShapeError, "chamber mask does not match image dimensions");
    }
    const double cutoff = adjusted_cutoff(base, alpha);
    const ComponentSet kept = filter_by_area(connected_components(binarize(image, cutoff)),
                                             config.beta_min, config.beta_max);
    std::vector<CandidateBox> boxes;
    for (const auto& comp : kept.components) {
        const Point center{static_cast<int>(std::lround(comp.centroid.row)),
                           static_cast<int>(std::lround(comp.centroid.col))};
        if (!chamber.at(center)) {
            continue;
        }
        boxes.push_back({center, config.box_h, config.box_w, comp.pixel_count, 1.0});
    }
    return boxes;
}

std::vector<CandidateBox> detect_candidates(const GrayImage& image, const BinaryMask& chamber,
                                            double alpha, const CdmConfig& config) {
    return detect_candidates(image, chamber, isodata_threshold(image), alpha, config);
}

Crop extract_crop(const GrayImage& image, const CandidateBox& box) {
    Crop crop;
    crop.height = box.height;
    crop.width = box.width;
    crop.patch.assign(static_cast<std::size_t>(box.height) * box.width, 0.0);
    const int top = box.center.row - box.height / 2;
    const int left = box.center.col - box.width / 2;
    for (int r = 0; r < box.height; ++r) {
        for (int c = 0; c < box.width; ++c) {
            const Point src{top + r, left + c};
            if (image.contains(src)) {
                crop.patch[static_cast<std::size_t>(r) * box.width + c] = image.at(src) / 255.0;
            }
        }
    }
    return crop;
}

CropLabel label_crop(const CandidateBox& box, std::span<const Point> gt_points) {
    for (const Point& p : gt_points) {
        if (box.contains(p)) return CropLabel::RealCell;
    }
    return CropLabel::NotCell;
}

std::vector<CandidateBox> filter_boxes(const GrayImage& image, std::span<const CandidateBox> boxes,
                                       const MlpParams& classifier) {
    std::vector<CandidateBox> kept;
    for (const auto& box : boxes) {
        const double p = forward(classifier, extract_crop(image, box));
        if (p >= 0.5) {
            CandidateBox k = box;
            k.score = p;
            kept.push_back(k);
        }
    }
    return kept;
}

std::vector<CandidateBox> detect_cells(const GrayImage& image, const BinaryMask& chamber,
                                       double alpha, const MlpParams& classifier,
                                       const CdmConfig& config) {
    const auto candidates = detect_candidates(image, chamber, alpha, config);
    return filter_boxes(image, candidates, classifier);
}

double best_alpha_of(std::span<const AlphaScore> per_alpha) {
    const AlphaScore* best = nullptr;
    for (const auto& s : per_alpha) {
        if (best == nullptr || s.filtered.f1 > best->filtered.f1 ||
            (s.filtered.f1 == best->filtered.f1 && s.alpha > best->alpha)) {
            best = &s;
        }
    }
    if (best == nullptr || !(best->filtered.f1 > 0.0)) {
        throw Error(ErrorCode::AlphaSearchFailed, "no alpha produced a nonzero validation F1");
    }
    return best->alpha;
}

namespace {

struct CachedSample {
    const DetectionSample* sample;
    ThresholdResult base;
};

std::vector<CachedSample> with_thresholds(std::span<const DetectionSample> samples) {
    std::vector<CachedSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back({&s, isodata_threshold(*s.image)});
    }
    return out;
}

struct AlphaOutcome {
    AlphaScore score;
    MlpParams classifier;
};

AlphaOutcome evaluate_alpha(double alpha, std::span<const CachedSample> train,
                            std::span<const CachedSample> val, const CdmConfig& config,
                            const TrainConfig& train_config) {
    AlphaOutcome out;
    out.score.alpha = alpha;

    std::vector<Crop> train_crops;
    for (const auto& t : train) {
        for (const auto& box :
             detect_candidates(*t.sample->image, *t.sample->chamber, t.base, alpha, config)) {
            Crop crop = extract_crop(*t.sample->image, box);
            crop.label = label_crop(box, t.sample->cells);
            train_crops.push_back(std::move(crop));
        }
    }

    std::vector<std::vector<CandidateBox>> val_boxes;
    std::vector<Crop> val_crops;
    std::vector<BoxConfusion> unfiltered;
    for (const auto& v : val) {
        auto boxes = detect_candidates(*v.sample->image, *v.sample->chamber, v.base, alpha, config);
        for (const auto& box : boxes) {
            Crop crop = extract_crop(*v.sample->image, box);
            crop.label = label_crop(box, v.sample->cells);
            val_crops.push_back(std::move(crop));
        }
        unfiltered.push_back(match_boxes(boxes, v.sample->cells));
        val_boxes.push_back(std::move(boxes));
    }
    out.score.train_crops = train_crops.size();
    out.score.val_candidates = val_crops.size();
    out.score.unfiltered = box_scores(unfiltered);

    if (train_crops.empty() || val_crops.empty()) {
        out.score.filtered = DetectionScores{};
        return out;
    }

    auto [params, report] = train_classifier(train_crops, val_crops, train_config);
    out.score.epochs_run = report.epochs_run;

    std::vector<BoxConfusion> filtered;
    for (std::size_t i = 0; i < val.size(); ++i) {
        const auto kept = filter_boxes(*val[i].sample->image, val_boxes[i], params);
        filtered.push_back(match_boxes(kept, val[i].sample->cells));
    }
    out.score.filtered = box_scores(filtered);
    out.classifier = std::move(params);
    return out;
}

} // namespace

AlphaSearchResult search_alpha(std::span<const DetectionSample> train,
                               std::span<const DetectionSample> val, const CdmConfig& config,
                               const TrainConfig& train_config, int jobs) {
    config.validate();
    train_config.validate();
    if (train.empty() || val.empty()) {
        throw Error(ErrorCode::EmptyDataset, "alpha search needs nonempty train and validation splits");
    }
    const auto train_cached = with_thresholds(train);
    const auto val_cached = with_thresholds(val);
    const auto grid = config.alpha_grid();

    std::vector<AlphaOutcome> outcomes(grid.size());
    parallel_for(grid.size(), jobs, [&](std::size_t, std::size_t i) {
        TrainConfig tc = train_config;
        tc.seed = derive_seed(train_config.seed, i);
        outcomes[i] = evaluate_alpha(grid[i], train_cached, val_cached, config, tc);
    });

    AlphaSearchResult result;
    for (const auto& o : outcomes) {
        result.report.per_alpha.push_back(o.score);
    }
    result.report.best_alpha = best_alpha_of(result.report.per_alpha);
    for (auto& o : outcomes) {
        if (o.score.alpha == result.report.best_alpha) {
            result.classifier = std::move(o.classifier);
            break;
        }
    }
    return result;
}

} // namespace accdor
