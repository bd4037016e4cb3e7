#pragma once

#include "accdor/imaging.hpp"

namespace accdor {

struct ThresholdResult {
    double threshold = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct IsodataOptions {
    double tolerance = 0.5; // stop once |T - (mu_low + mu_high) / 2| < tolerance
    int max_iterations = 100;
};

double mean_intensity(const GrayImage& image);

/// Iterative intermeans (Isodata) threshold seeded with the mean intensity.
/// The low class is pixels <= T, the high class pixels > T. Throws
/// DegenerateImage when the image holds a single intensity.
ThresholdResult isodata_threshold(const GrayImage& image, const IsodataOptions& options = {});

/// alpha * Isodata threshold, alpha in (0, 1].
double adjusted_cutoff(const GrayImage& image, double alpha, const IsodataOptions& options = {});

/// The same scaling applied to a precomputed base threshold.
double adjusted_cutoff(const ThresholdResult& base, double alpha);

} // namespace accdor
