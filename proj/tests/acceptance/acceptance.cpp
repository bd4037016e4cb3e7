// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "support/builders.hpp"
#include "support/oracles.hpp"

#include <cli.hpp>

#include <accdor/chamber_seg.hpp>
#include <accdor/classifier.hpp>
#include <accdor/errors.hpp>
#include <accdor/imaging.hpp>
#include <accdor/metrics.hpp>
#include <accdor/parallel.hpp>
#include <accdor/phantom.hpp>
#include <accdor/protocol.hpp>
#include <accdor/segmenter.hpp>
#include <accdor/thresholding.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace accdor;
using namespace accdor::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void check(const std::string& name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

bool constant(const GrayImage& img) {
    const auto px = img.pixels();
    return std::all_of(px.begin(), px.end(), [&](auto v) { return v == px[0]; });
}

GrayImage nonconstant_image(std::mt19937_64& rng, int max_side) {
    for (;;) {
        GrayImage img = random_image(rng, max_side, max_side);
        if (!constant(img)) return img;
    }
}

Outcome isodata_fixed_point() {
    std::mt19937_64 rng(1001);
    const auto start = Clock::now();
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const GrayImage img = nonconstant_image(rng, 64);
        const double t = isodata_threshold(img).threshold;
        const auto [lo, hi] = class_means(img, t);
        worst = std::max(worst, std::abs(t - (lo + hi) / 2));
    }
    const double secs = seconds_since(start);
    return {worst <= 0.5 && secs < 10, fmt("1000 images, max |T - mid| = %.4f, %.2f s", worst, secs)};
}

Outcome threshold_monotonicity() {
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> alpha(0.01, 1.0);
    int violations = 0;
    for (int i = 0; i < 500; ++i) {
        const GrayImage img = nonconstant_image(rng, 64);
        double a1 = alpha(rng), a2 = alpha(rng);
        while (a1 == a2) a2 = alpha(rng);
        if (a1 > a2) std::swap(a1, a2);
        const auto base = isodata_threshold(img);
        const BinaryMask lo = binarize(img, adjusted_cutoff(base, a1));
        const BinaryMask hi = binarize(img, adjusted_cutoff(base, a2));
        for (int r = 0; r < img.height(); ++r) {
            for (int c = 0; c < img.width(); ++c) violations += hi.at(r, c) && !lo.at(r, c);
        }
    }
    return {violations == 0, fmt("500 pairs, %.0f pixels above the higher cutoff but not the lower", violations)};
}

Outcome component_oracle() {
    std::mt19937_64 rng(1003);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const BinaryMask m = random_mask(rng, 32, 32);
        for (const bool eight : {false, true}) {
            auto expected = union_find_components(m, eight);
            std::stable_sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
                return a.size() != b.size() ? a.size() > b.size() : a.front() < b.front();
            });
            std::vector<std::vector<Point>> got;
            for (const auto& comp : connected_components(m, eight ? Connectivity::Eight : Connectivity::Four).components) {
                auto px = comp.pixels;
                std::sort(px.begin(), px.end());
                got.push_back(std::move(px));
            }
            mismatches += got != expected;
        }
    }
    return {mismatches == 0, fmt("1000 masks x 2 connectivities, %.0f mismatches", mismatches)};
}

std::pair<std::vector<CandidateBox>, std::vector<Point>> random_instance(std::mt19937_64& rng, int max_n, int extent) {
    std::uniform_int_distribution<int> n(0, max_n);
    std::uniform_int_distribution<int> coord(0, extent);
    std::uniform_int_distribution<int> side(1, 20);
    std::vector<CandidateBox> preds(n(rng));
    for (auto& b : preds) {
        b.center = {coord(rng), coord(rng)};
        b.height = side(rng);
        b.width = side(rng);
    }
    std::vector<Point> gt(n(rng));
    for (auto& p : gt) p = {coord(rng), coord(rng)};
    return {preds, gt};
}

Outcome matching_oracle() {
    std::mt19937_64 rng(1004);
    int disagree = 0, beyond_max = 0, bounded = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto [preds, gt] = random_instance(rng, 8, 25);
        const BoxConfusion got = match_boxes(preds, gt);
        disagree += !(got == greedy_match_reference(preds, gt));
        if (preds.size() <= 8 && gt.size() <= 8) {
            ++bounded;
            beyond_max += got.tp > exhaustive_max_matching(preds, gt);
        }
    }
    return {disagree == 0 && beyond_max == 0 && bounded == 1000,
            fmt("1000 instances, %.0f disagreements, %.0f above maximum matching (%.0f bounded)", disagree, beyond_max,
                bounded)};
}

Outcome metric_identities() {
    std::mt19937_64 rng(1005);
    std::uniform_int_distribution<int> side(1, 32);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const int h = side(rng), w = side(rng);
        BinaryMask a = random_mask(rng, h, w), b(a.height(), a.width());
        std::bernoulli_distribution on(0.4);
        for (int r = 0; r < b.height(); ++r) {
            for (int c = 0; c < b.width(); ++c) b.set(r, c, on(rng));
        }
        const double j = iou(a, b);
        worst = std::max(worst, std::abs(dice(a, b) - 2 * j / (1 + j)));
    }
    const auto missed = image_scores(std::vector<BoxConfusion>{{0, 0, 4}});
    const auto spurious = image_scores(std::vector<BoxConfusion>{{0, 3, 0}});
    const bool edges = missed.precision == 0 && missed.recall == 0 && spurious.precision == 0 && spurious.recall == 0;
    return {worst <= 1e-12 && edges,
            fmt("1000 pairs, max |dice - 2iou/(1+iou)| = %.3g; missed-only (P,R) = (%g,%g), spurious-only (P,R) = (%g,",
                worst, missed.precision, missed.recall, spurious.precision) +
                fmt("%g)", spurious.recall)};
}

Outcome classifier_gradient() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1006);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const MlpParams p = random_params(rng, {15, 9, 6, 4, 1});
        const auto crops = random_crops(rng, 6, 3, 5);
        worst = std::max(worst, relative_error(bce_gradient(p, crops), numeric_gradient(p, crops, 1e-6)));
    }
    const auto crops = separable_crops();
    TrainConfig cfg;
    cfg.seed = 1;
    const auto [params, report] = train_classifier(crops, crops, cfg);
    const double loss = bce_loss(params, crops);
    const double secs = seconds_since(start);
    return {worst < 1e-4 && loss < 0.01 && report.epochs_run <= 500 && secs < 60,
            fmt("max relative error %.3g over 20 instances; separable loss %.3g after %.0f epochs; %.1f s", worst, loss,
                report.epochs_run, secs)};
}

std::vector<LabeledImage> phantom_suite(int n) {
    std::vector<LabeledImage> out;
    const PhantomConfig cfg;
    for (int i = 0; i < n; ++i) {
        Phantom p = generate_phantom(cfg, derive_seed(0, static_cast<std::uint64_t>(i)));
        char id[32];
        std::snprintf(id, sizeof id, "phantom_%04d", i);
        out.push_back({id, std::move(p.image), std::move(p.truth.chamber_mask), std::move(p.truth.cell_points)});
    }
    return out;
}

Outcome chamber_segmentation() {
    PhantomConfig cfg;
    cfg.split_segment_probability = 0.3;
    const auto start = Clock::now();
    OracleSegmenter seg;
    double iou_sum = 0, dice_sum = 0;
    int splits = 0;
    for (int i = 0; i < 50; ++i) {
        const Phantom p = generate_phantom(cfg, derive_seed(7, static_cast<std::uint64_t>(i)));
        splits += p.split_segment;
        const ChamberMask out = segment_chamber(p.image, seg);
        iou_sum += iou(out.mask, p.truth.chamber_mask);
        dice_sum += dice(out.mask, p.truth.chamber_mask);
    }
    const double secs = seconds_since(start);
    const double mi = iou_sum / 50, md = dice_sum / 50;
    return {mi >= 0.95 && md >= 0.97 && splits > 0 && secs < 120,
            fmt("50 phantoms (%.0f split), mean IoU %.4f, mean Dice %.4f, %.1f s", splits, mi, md, secs)};
}

struct ProtocolMeans {
    double baseline_recall = 0, baseline_f1 = 0;
    double unfiltered_recall = 0, unfiltered_f1 = 0;
    double cdm_recall = 0, cdm_f1 = 0;
    double recall_lo = 0, recall_hi = 0, precision_lo = 0, precision_hi = 0;
    double alpha_lo = 0, alpha_hi = 0;
    double seconds = 0;
};

ProtocolMeans run_cdm_protocol() {
    const auto start = Clock::now();
    const auto images = phantom_suite(50);
    const auto chambers = segment_all(images, [] { return std::make_unique<OracleSegmenter>(); }, HpgConfig{});
    const ProtocolConfig cfg;
    const ProtocolReport report = run_protocol(images, chambers, cfg, 3);
    ProtocolMeans m;
    const double n = static_cast<double>(report.repeats.size());
    for (const auto& r : report.repeats) {
        m.baseline_recall += r.baseline.box.recall / n;
        m.baseline_f1 += r.baseline.box.f1 / n;
        m.unfiltered_recall += r.unfiltered.box.recall / n;
        m.unfiltered_f1 += r.unfiltered.box.f1 / n;
        m.cdm_recall += r.cdm.box.recall / n;
        m.cdm_f1 += r.cdm.box.f1 / n;
        const auto& lo = r.alpha_search.per_alpha.front();
        const auto& hi = r.alpha_search.per_alpha.back();
        m.alpha_lo = lo.alpha;
        m.alpha_hi = hi.alpha;
        m.recall_lo += lo.unfiltered.recall / n;
        m.recall_hi += hi.unfiltered.recall / n;
        m.precision_lo += lo.unfiltered.precision / n;
        m.precision_hi += hi.unfiltered.precision / n;
    }
    m.seconds = seconds_since(start);
    return m;
}

int cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
    TempDir dir;
    // Smaller classifier and grid than the defaults so two full runs stay short.
    const nlohmann::json cfg{
        {"cdm", {{"alpha_min", 0.80}, {"alpha_max", 0.95}, {"alpha_step", 0.05}}},
        {"train", {{"hidden", {64, 16}}, {"max_epochs", 200}}},
    };
    std::ofstream(dir / "config.json") << cfg.dump(2);
    std::string reports[2];
    for (int run = 0; run < 2; ++run) {
        const std::string root = (dir / ("run" + std::to_string(run))).string();
        const std::string config = (dir / "config.json").string();
        if (cli({"phantom-gen", "--config", config, "--count", "12", "--seed", "5", "--out", root + "/data"}) != 0 ||
            cli({"eval", "--config", config, "--manifest", root + "/data/manifest.json", "--repeats", "2", "--out",
                 root + "/eval"}) != 0) {
            return {false, "pipeline run failed"};
        }
        reports[run] = slurp(root + "/eval/metrics.json");
    }
    const bool same = !reports[0].empty() && reports[0] == reports[1];
    return {same, fmt("two phantom-gen + eval runs (12 images, 2 repeats), metrics.json %.0f bytes, ",
                      static_cast<double>(reports[0].size())) +
                      (same ? "identical" : "different")};
}

} // namespace

int main() {
    check("isodata fixed point", isodata_fixed_point);
    check("threshold monotonicity", threshold_monotonicity);
    check("component oracle", component_oracle);
    check("matching oracle", matching_oracle);
    check("metric identities", metric_identities);
    check("classifier gradient check", classifier_gradient);
    check("chamber segmentation on phantoms", chamber_segmentation);

    ProtocolMeans m;
    bool ran = false;
    std::string error;
    try {
        m = run_cdm_protocol();
        ran = true;
    } catch (const std::exception& e) {
        error = e.what();
    }
    check("cell detection protocol on phantoms", [&]() -> Outcome {
        if (!ran) return {false, "exception: " + error};
        const bool a = m.baseline_recall <= 0.85;
        const bool b = m.cdm_recall >= m.baseline_recall + 0.05 && m.cdm_f1 >= m.baseline_f1 + 0.03;
        const bool c = m.unfiltered_recall >= m.cdm_recall && m.cdm_recall >= m.baseline_recall;
        return {a && b && c && m.seconds < 900,
                fmt("box recall baseline %.4f, unfiltered %.4f, cdm %.4f; ", m.baseline_recall, m.unfiltered_recall,
                    m.cdm_recall) +
                    fmt("box F1 baseline %.4f, unfiltered %.4f, cdm %.4f; 50 phantoms, 3 repeats, %.0f s", m.baseline_f1,
                        m.unfiltered_f1, m.cdm_f1, m.seconds)};
    });
    check("alpha trend", [&]() -> Outcome {
        if (!ran) return {false, "exception: " + error};
        const bool ends = std::abs(m.alpha_lo - 0.70) < 1e-9 && std::abs(m.alpha_hi - 0.99) < 1e-9;
        return {ends && m.recall_lo > m.recall_hi && m.precision_hi > m.precision_lo,
                fmt("unfiltered recall %.4f at 0.70 vs %.4f at 0.99; ", m.recall_lo, m.recall_hi) +
                    fmt("unfiltered precision %.4f at 0.70 vs %.4f at 0.99", m.precision_lo, m.precision_hi)};
    });
    check("determinism", determinism);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
