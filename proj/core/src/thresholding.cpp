#include "accdor/thresholding.hpp"

#include "accdor/errors.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace accdor {

namespace {

using Histogram = std::array<std::uint64_t, 256>;

Histogram histogram(const GrayImage& image) {
    Histogram hist{};
    for (const std::uint8_t v : image.pixels()) {
        ++hist[v];
    }
    return hist;
}

// Midpoint of the class means when splitting at T. Both classes must be nonempty.
double class_midpoint(const Histogram& hist, double threshold) {
    std::uint64_t n_low = 0;
    std::uint64_t n_high = 0;
    double s_low = 0.0;
    double s_high = 0.0;
    for (int v = 0; v < 256; ++v) {
        const auto n = hist[static_cast<std::size_t>(v)];
        if (static_cast<double>(v) <= threshold) {
            n_low += n;
            s_low += static_cast<double>(n) * v;
        } else {
            n_high += n;
            s_high += static_cast<double>(n) * v;
        }
    }
    return 0.5 * (s_low / static_cast<double>(n_low) + s_high / static_cast<double>(n_high));
}

} // namespace

double mean_intensity(const GrayImage& image) {
    if (image.size() == 0) {
        throw Error(ErrorCode::InvalidImage, "mean of an empty image");
    }
    std::uint64_t sum = 0;
    for (const std::uint8_t v : image.pixels()) {
        sum += v;
    }
    return static_cast<double>(sum) / static_cast<double>(image.size());
}

ThresholdResult isodata_threshold(const GrayImage& image, const IsodataOptions& options) {
    const Histogram hist = histogram(image);
    int lo = 255;
    int hi = 0;
    for (int v = 0; v < 256; ++v) {
        if (hist[static_cast<std::size_t>(v)] != 0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (lo == hi) {
        throw Error(ErrorCode::DegenerateImage,
                    "image has a single intensity (" + std::to_string(lo) + ")");
    }

    // Any T in [min, max) leaves both classes nonempty, and every midpoint stays in that range.
    ThresholdResult result;
    double t = mean_intensity(image);
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const double next = class_midpoint(hist, t);
        result.iterations = iter;
        if (std::abs(next - t) < options.tolerance) {
            result.threshold = t;
            result.converged = true;
            return result;
        }
        t = next;
    }
    result.threshold = t;
    result.converged = false;
    return result;
}

double adjusted_cutoff(const ThresholdResult& base, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidAlpha, "alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    return alpha * base.threshold;
}

double adjusted_cutoff(const GrayImage& image, double alpha, const IsodataOptions& options) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidAlpha, "alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    return adjusted_cutoff(isodata_threshold(image, options), alpha);
}

} // namespace accdor
