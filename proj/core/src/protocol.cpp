#include "accdor/protocol.hpp"

#include "accdor/errors.hpp"
#include "accdor/image_io.hpp"
#include "accdor/parallel.hpp"

#include <cmath>
#include <map>

namespace accdor {

using nlohmann::json;

std::vector<LabeledImage> load_images(const DatasetManifest& manifest) {
    std::vector<LabeledImage> out;
    out.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        LabeledImage li{e.id, read_gray(manifest.resolve(e.image)), std::nullopt, e.cells};
        if (!e.chamber_mask.empty()) {
            li.chamber_truth = read_mask(manifest.resolve(e.chamber_mask));
        }
        out.push_back(std::move(li));
    }
    return out;
}

std::vector<ChamberMask> segment_all(std::span<const LabeledImage> images,
                                     const SegmenterFactory& make_segmenter,
                                     const HpgConfig& config, int jobs) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(images.size(),
                                                                              std::max(jobs, 1)));
    std::vector<std::unique_ptr<PromptableSegmenter>> segmenters(workers);
    std::vector<std::optional<ChamberMask>> results(images.size());
    parallel_for(images.size(), static_cast<int>(workers), [&](std::size_t worker, std::size_t i) {
        if (!segmenters[worker]) segmenters[worker] = make_segmenter();
        results[i] = segment_chamber(images[i].image, *segmenters[worker], config);
    });
    std::vector<ChamberMask> out;
    out.reserve(results.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

MethodResult score_method(std::span<const std::vector<CandidateBox>> detections,
                          std::span<const std::vector<Point>> truths) {
    if (detections.size() != truths.size()) {
        throw Error(ErrorCode::InvalidArgument, "detections and ground truth differ in length");
    }
    MethodResult m;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        m.per_image.push_back(match_boxes(detections[i], truths[i]));
    }
    m.image = image_scores(m.per_image);
    m.box = box_scores(m.per_image);
    return m;
}

RepeatResult run_repeat(std::span<const LabeledImage> images, std::span<const ChamberMask> chambers,
                        const ProtocolConfig& config, int repeat_index) {
    if (images.size() != chambers.size()) {
        throw Error(ErrorCode::InvalidArgument, "one chamber mask per image is required");
    }
    RepeatResult result;
    result.repeat = repeat_index;
    result.split = split_indices(images.size(), config.split, repeat_index);

    auto samples = [&](const std::vector<std::size_t>& which) {
        std::vector<DetectionSample> s;
        for (const std::size_t i : which) {
            s.push_back({&images[i].image, &chambers[i].mask, images[i].cells});
        }
        return s;
    };
    const auto train = samples(result.split.train);
    const auto val = samples(result.split.val);

    TrainConfig tc = config.train;
    tc.seed = derive_seed(config.train.seed, static_cast<std::uint64_t>(repeat_index));
    AlphaSearchResult search = search_alpha(train, val, config.cdm, tc, config.jobs);
    result.alpha_search = search.report;
    const double alpha = search.report.best_alpha;

    CdmConfig baseline_cfg = config.cdm;
    baseline_cfg.beta_min = config.baseline_beta_min;

    std::vector<std::vector<CandidateBox>> baseline;
    std::vector<std::vector<CandidateBox>> unfiltered;
    std::vector<std::vector<CandidateBox>> cdm;
    std::vector<std::vector<Point>> truths;
    std::vector<double> ious;
    std::vector<double> dices;
    for (const std::size_t i : result.split.test) {
        const auto& li = images[i];
        const BinaryMask& chamber = chambers[i].mask;
        const ThresholdResult base = isodata_threshold(li.image);
        baseline.push_back(detect_candidates(li.image, chamber, base, 1.0, baseline_cfg));
        auto candidates = detect_candidates(li.image, chamber, base, alpha, config.cdm);
        cdm.push_back(filter_boxes(li.image, candidates, search.classifier));
        unfiltered.push_back(std::move(candidates));
        truths.push_back(li.cells);
        if (li.chamber_truth) {
            ious.push_back(iou(chamber, *li.chamber_truth));
            dices.push_back(dice(chamber, *li.chamber_truth));
        }
    }
    result.baseline = score_method(baseline, truths);
    result.unfiltered = score_method(unfiltered, truths);
    result.cdm = score_method(cdm, truths);
    if (!ious.empty()) {
        result.mean_iou = mean_std(ious).mean;
        result.mean_dice = mean_std(dices).mean;
    }
    return result;
}

ProtocolReport run_protocol(std::span<const LabeledImage> images,
                            std::span<const ChamberMask> chambers, const ProtocolConfig& config,
                            int repeats) {
    config.split.validate();
    if (repeats < 1 || repeats > config.split.repeats) {
        throw Error(ErrorCode::InvalidArgument, "repeats must lie in [1, split.repeats]");
    }
    ProtocolReport report;
    for (const auto& li : images) report.image_ids.push_back(li.id);
    for (int r = 0; r < repeats; ++r) {
        report.repeats.push_back(run_repeat(images, chambers, config, r));
    }
    return report;
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

json scores_to_json(const DetectionScores& s) {
    return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json method_to_json(const MethodResult& m, std::span<const std::string> ids) {
    json per_image = json::array();
    for (std::size_t i = 0; i < m.per_image.size(); ++i) {
        const auto& c = m.per_image[i];
        per_image.push_back({{"image", i < ids.size() ? ids[i] : std::to_string(i)},
                             {"tp", c.tp},
                             {"fp", c.fp},
                             {"fn", c.fn}});
    }
    return json{{"image_level", scores_to_json(m.image)},
                {"box_level", scores_to_json(m.box)},
                {"per_image", std::move(per_image)}};
}

json alpha_report_to_json(const AlphaSearchReport& report) {
    json rows = json::array();
    for (const auto& s : report.per_alpha) {
        rows.push_back({{"alpha", s.alpha},
                        {"filtered", scores_to_json(s.filtered)},
                        {"unfiltered", scores_to_json(s.unfiltered)},
                        {"train_crops", s.train_crops},
                        {"val_candidates", s.val_candidates},
                        {"epochs_run", s.epochs_run}});
    }
    return json{{"best_alpha", report.best_alpha}, {"per_alpha", std::move(rows)}};
}

json report_to_json(const ProtocolReport& report) {
    static constexpr const char* kMethods[] = {"thres", "cdm_without_filter", "cdm"};
    auto method_of = [](const RepeatResult& r, int k) -> const MethodResult& {
        return k == 0 ? r.baseline : (k == 1 ? r.unfiltered : r.cdm);
    };

    json repeats = json::array();
    std::map<std::string, std::vector<double>> series;
    for (const auto& r : report.repeats) {
        std::vector<std::string> test_ids;
        for (const std::size_t i : r.split.test) test_ids.push_back(report.image_ids[i]);

        json methods = json::object();
        for (int k = 0; k < 3; ++k) {
            const MethodResult& m = method_of(r, k);
            methods[kMethods[k]] = method_to_json(m, test_ids);
            for (const auto& [level, s] : {std::pair{"image_level", m.image}, std::pair{"box_level", m.box}}) {
                const std::string prefix = std::string(kMethods[k]) + "/" + level + "/";
                series[prefix + "precision"].push_back(s.precision);
                series[prefix + "recall"].push_back(s.recall);
                series[prefix + "f1"].push_back(s.f1);
            }
        }
        json entry{{"repeat", r.repeat},
                   {"split_sizes", {r.split.train.size(), r.split.val.size(), r.split.test.size()}},
                   {"alpha_search", alpha_report_to_json(r.alpha_search)},
                   {"methods", std::move(methods)}};
        if (r.mean_iou) {
            entry["segmentation"] = {{"iou", *r.mean_iou}, {"dice", *r.mean_dice}};
            series["segmentation/iou"].push_back(*r.mean_iou);
            series["segmentation/dice"].push_back(*r.mean_dice);
        }
        series["best_alpha"].push_back(r.alpha_search.best_alpha);
        repeats.push_back(std::move(entry));
    }

    json summary = json::object();
    for (const auto& [key, values] : series) {
        const MeanStd ms = mean_std(values);
        summary[key] = {{"mean", ms.mean}, {"std", ms.std}};
    }
    return json{{"repeats", std::move(repeats)}, {"summary", std::move(summary)}};
}

} // namespace accdor
