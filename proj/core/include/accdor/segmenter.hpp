#pragma once

#include "accdor/imaging.hpp"

#include <span>
#include <vector>

namespace accdor {

struct MaskCandidate {
    BinaryMask mask;
    double score = 0.0;
};

struct SegmenterOutput {
    std::vector<MaskCandidate> candidates;
};

/// A backend that, given an image and foreground point prompts, proposes
/// masks intended to include those points. Implementations may hold a
/// connection and are not required to be thread-safe; use one per worker.
class PromptableSegmenter {
  public:
    virtual ~PromptableSegmenter() = default;
    virtual SegmenterOutput segment(const GrayImage& image, std::span<const Point> points) = 0;
};

struct OracleConfig {
    int fill_tolerance = 10;
    /// Close interior holes of the fill so the result behaves like a region
    /// mask: small bright objects inside the region stay part of it.
    bool fill_holes = true;
};

/// Region growing from each prompt: 8-connected flood fill over pixels within
/// fill_tolerance of the prompt's own intensity. The union of all fills is
/// returned as a single candidate with score 1.0.
SegmenterOutput oracle_segment(const GrayImage& image, std::span<const Point> points,
                               const OracleConfig& config = {});

class OracleSegmenter final : public PromptableSegmenter {
  public:
    explicit OracleSegmenter(OracleConfig config = {}) : config_(config) {}

    SegmenterOutput segment(const GrayImage& image, std::span<const Point> points) override {
        return oracle_segment(image, points, config_);
    }

    const OracleConfig& config() const noexcept { return config_; }

  private:
    OracleConfig config_;
};

} // namespace accdor
