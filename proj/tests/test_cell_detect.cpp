#include "support/builders.hpp"

#include <accdor/cell_detect.hpp>
#include <accdor/errors.hpp>
#include <accdor/phantom.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace accdor;
using namespace accdor::testing;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

MlpParams constant_classifier(double logit) {
    MlpParams p = init_mlp(1, {400, 4, 1});
    for (auto& l : p.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    p.layers.back().bias[0] = logit;
    return p;
}

AlphaScore scored(double alpha, double f1) {
    AlphaScore s;
    s.alpha = alpha;
    s.filtered.f1 = f1;
    return s;
}

} // namespace

TEST(DetectCandidates, SingleBrightPixel) {
    GrayImage img(10, 10, 10);
    img.set(4, 6, 200);
    const auto boxes = detect_candidates(img, BinaryMask(10, 10, true), 0.9, CdmConfig{});
    ASSERT_EQ(boxes.size(), 1u);
    EXPECT_EQ(boxes[0].center, (Point{4, 6}));
    EXPECT_EQ(boxes[0].component_area, 1u);
    EXPECT_EQ(boxes[0].height, 20);
    EXPECT_EQ(boxes[0].width, 20);
}

TEST(DetectCandidates, AreaBoundsAreInclusive) {
    GrayImage img(40, 40, 10);
    for (int c = 0; c < 25; ++c) img.set(5, c, 200);
    for (int c = 0; c < 26; ++c) img.set(20, c, 200);
    img.set(35, 35, 200);
    const auto boxes = detect_candidates(img, BinaryMask(40, 40, true), 1.0, CdmConfig{});
    ASSERT_EQ(boxes.size(), 2u);
    EXPECT_EQ(boxes[0].component_area, 25u);
    EXPECT_EQ(boxes[1].component_area, 1u);
}

TEST(DetectCandidates, CentroidOutsideChamberIsDropped) {
    GrayImage img(10, 10, 10);
    img.set(1, 1, 200);
    img.set(8, 8, 200);
    BinaryMask chamber(10, 10);
    for (int r = 5; r < 10; ++r) {
        for (int c = 5; c < 10; ++c) chamber.set(r, c, true);
    }
    const auto boxes = detect_candidates(img, chamber, 1.0, CdmConfig{});
    ASSERT_EQ(boxes.size(), 1u);
    EXPECT_EQ(boxes[0].center, (Point{8, 8}));
}

TEST(DetectCandidates, CentroidIsRounded) {
    GrayImage img(10, 10, 10);
    img.set(2, 2, 200);
    img.set(2, 3, 200);
    const auto boxes = detect_candidates(img, BinaryMask(10, 10, true), 1.0, CdmConfig{});
    ASSERT_EQ(boxes.size(), 1u);
    EXPECT_EQ(boxes[0].center, (Point{2, 3}));
}

TEST(DetectCandidates, ShapeMismatch) {
    GrayImage img(5, 5, 1);
    img.set(2, 2, 100);
    EXPECT_EQ(code_of([&] { detect_candidates(img, BinaryMask(5, 4), 1.0, CdmConfig{}); }), ErrorCode::ShapeError);
}

TEST(ExtractCrop, InteriorIsScaledSource) {
    GrayImage img(40, 40);
    for (int r = 0; r < 40; ++r) {
        for (int c = 0; c < 40; ++c) img.set(r, c, static_cast<std::uint8_t>((r * 7 + c * 3) % 256));
    }
    CandidateBox b;
    b.center = {20, 20};
    const Crop crop = extract_crop(img, b);
    ASSERT_EQ(crop.patch.size(), 400u);
    for (int r = 0; r < 20; ++r) {
        for (int c = 0; c < 20; ++c) {
            EXPECT_DOUBLE_EQ(crop.patch[r * 20 + c], img.at(10 + r, 10 + c) / 255.0);
        }
    }
}

TEST(ExtractCrop, ZeroPaddedAtBorder) {
    GrayImage img(30, 30, 255);
    CandidateBox b;
    b.center = {0, 0};
    const Crop crop = extract_crop(img, b);
    for (int r = 0; r < 20; ++r) {
        for (int c = 0; c < 20; ++c) {
            const double expected = (r >= 10 && c >= 10) ? 1.0 : 0.0;
            EXPECT_EQ(crop.patch[r * 20 + c], expected);
        }
    }
}

TEST(LabelCrop, Containment) {
    CandidateBox b;
    b.center = {10, 10};
    EXPECT_EQ(label_crop(b, std::vector<Point>{{12, 14}}), CropLabel::RealCell);
    EXPECT_EQ(label_crop(b, std::vector<Point>{{10, 21}}), CropLabel::NotCell);
    EXPECT_EQ(label_crop(b, std::vector<Point>{{0, 20}}), CropLabel::RealCell);
    EXPECT_EQ(label_crop(b, {}), CropLabel::NotCell);
}

TEST(FilterBoxes, ConstantClassifiers) {
    const Phantom p = generate_phantom(PhantomConfig{}, 4);
    const auto candidates = detect_candidates(p.image, p.truth.chamber_mask, 0.8, CdmConfig{});
    ASSERT_FALSE(candidates.empty());
    const auto all = filter_boxes(p.image, candidates, constant_classifier(30.0));
    ASSERT_EQ(all.size(), candidates.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(all[i].center, candidates[i].center);
        EXPECT_EQ(all[i].component_area, candidates[i].component_area);
    }
    EXPECT_TRUE(filter_boxes(p.image, candidates, constant_classifier(-30.0)).empty());
}

TEST(CdmConfig, AlphaGrid) {
    const auto grid = CdmConfig{}.alpha_grid();
    ASSERT_EQ(grid.size(), 30u);
    EXPECT_EQ(grid.front(), 0.70);
    EXPECT_EQ(grid[10], 0.80);
    EXPECT_EQ(grid.back(), 0.99);
    CdmConfig one;
    one.alpha_min = one.alpha_max = 0.9;
    EXPECT_EQ(one.alpha_grid(), std::vector<double>{0.9});
}

TEST(CdmConfig, Validation) {
    CdmConfig c;
    c.beta_min = 0;
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
    c = {};
    c.alpha_max = 1.2;
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
    c = {};
    c.alpha_step = 0;
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
}

TEST(BestAlpha, ArgmaxWithLargerAlphaOnTies) {
    EXPECT_EQ(best_alpha_of(std::vector{scored(0.80, 0.75), scored(0.90, 0.80), scored(0.98, 0.70)}), 0.90);
    EXPECT_EQ(best_alpha_of(std::vector{scored(0.85, 0.80), scored(0.92, 0.80)}), 0.92);
    EXPECT_EQ(best_alpha_of(std::vector{scored(0.92, 0.80), scored(0.85, 0.80)}), 0.92);
    EXPECT_EQ(code_of([] { best_alpha_of(std::vector{scored(0.8, 0.0)}); }), ErrorCode::AlphaSearchFailed);
    EXPECT_EQ(code_of([] { best_alpha_of({}); }), ErrorCode::AlphaSearchFailed);
}

class AlphaSearchSmall : public ::testing::Test {
  protected:
    void SetUp() override {
        for (std::uint64_t s = 0; s < 5; ++s) phantoms.push_back(generate_phantom(PhantomConfig{}, 100 + s));
        auto sample = [](const Phantom& p) {
            return DetectionSample{&p.image, &p.truth.chamber_mask, p.truth.cell_points};
        };
        for (int i = 0; i < 4; ++i) train.push_back(sample(phantoms[i]));
        val.push_back(sample(phantoms[4]));
        cdm.alpha_min = 0.80;
        cdm.alpha_max = 0.95;
        cdm.alpha_step = 0.05;
        tc.hidden = {16};
        tc.max_epochs = 15;
        tc.seed = 3;
    }

    std::vector<Phantom> phantoms;
    std::vector<DetectionSample> train;
    std::vector<DetectionSample> val;
    CdmConfig cdm;
    TrainConfig tc;
};

TEST_F(AlphaSearchSmall, ReportCoversGridAndPicksAGridPoint) {
    const auto result = search_alpha(train, val, cdm, tc);
    ASSERT_EQ(result.report.per_alpha.size(), 4u);
    const auto grid = cdm.alpha_grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(result.report.per_alpha[i].alpha, grid[i]);
        EXPECT_GT(result.report.per_alpha[i].train_crops, 0u);
    }
    EXPECT_EQ(result.report.best_alpha, best_alpha_of(result.report.per_alpha));
    EXPECT_EQ(result.classifier.layer_dims, (std::vector<int>{400, 16, 1}));
}

TEST_F(AlphaSearchSmall, ParallelMatchesSerial) {
    const auto a = search_alpha(train, val, cdm, tc, 1);
    const auto b = search_alpha(train, val, cdm, tc, 3);
    EXPECT_EQ(a.classifier, b.classifier);
    EXPECT_EQ(a.report.best_alpha, b.report.best_alpha);
    for (std::size_t i = 0; i < a.report.per_alpha.size(); ++i) {
        EXPECT_EQ(a.report.per_alpha[i].filtered.f1, b.report.per_alpha[i].filtered.f1);
    }
}

TEST_F(AlphaSearchSmall, UnfilteredRecallFallsWithAlpha) {
    const auto r = search_alpha(train, val, cdm, tc).report;
    EXPECT_GE(r.per_alpha.front().unfiltered.recall, r.per_alpha.back().unfiltered.recall);
}

TEST_F(AlphaSearchSmall, EmptySplitsAreRejected) {
    EXPECT_EQ(code_of([&] { search_alpha({}, val, cdm, tc); }), ErrorCode::EmptyDataset);
    EXPECT_EQ(code_of([&] { search_alpha(train, {}, cdm, tc); }), ErrorCode::EmptyDataset);
}
