#include "accdor/phantom.hpp"

#include "accdor/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

namespace accdor {

namespace {

// Compact growth order for cells: centre, vertical, horizontal, diagonals.
constexpr std::array<std::array<int, 2>, 9> kCellOffsets{{
    {0, 0}, {-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1},
}};

constexpr int kMinSide = 48;
constexpr int kMinSeparation = 12; // Chebyshev distance between object centres
constexpr int kPlacementAttempts = 20000;

struct Ellipse {
    double cr;
    double cc;
    double ar; // vertical semi-axis
    double ac; // horizontal semi-axis

    double norm(double r, double c) const {
        const double dr = (r - cr) / ar;
        const double dc = (c - cc) / ac;
        return dr * dr + dc * dc;
    }
    bool inside(double r, double c) const { return norm(r, c) <= 1.0; }
};

void check_range(const IntRange& r, const char* name, int lo, int hi) {
    if (r.lo > r.hi || r.lo < lo || r.hi > hi) {
        throw Error(ErrorCode::InvalidConfig, std::string(name) + " must satisfy " +
                                                  std::to_string(lo) + " <= lo <= hi <= " +
                                                  std::to_string(hi));
    }
}

int uniform_int(std::mt19937_64& rng, const IntRange& r) {
    return std::uniform_int_distribution<int>(r.lo, r.hi)(rng);
}

std::uint8_t to_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

bool far_from(const std::vector<Point>& placed, Point p) {
    return std::none_of(placed.begin(), placed.end(), [&](const Point& q) {
        return std::max(std::abs(q.row - p.row), std::abs(q.col - p.col)) < kMinSeparation;
    });
}

} // namespace

void PhantomConfig::validate() const {
    if (height < kMinSide || width < kMinSide) {
        throw Error(ErrorCode::InvalidConfig, "phantom must be at least " + std::to_string(kMinSide) +
                                                  " pixels on each side");
    }
    for (int v : {chamber_intensity, segment_intensity, background_intensity}) {
        if (v < 0 || v > 255) throw Error(ErrorCode::InvalidConfig, "intensities must lie in [0, 255]");
    }
    if (!(noise_sigma >= 0.0) || !(noise_clip >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "noise parameters must be non-negative");
    }
    if (!(segment_intensity > chamber_intensity + 4.0 * noise_sigma)) {
        throw Error(ErrorCode::InvalidConfig, "segment and chamber intensities are not separable");
    }
    check_range(cell_count_range, "cell_count_range", 0, 1000);
    check_range(cell_intensity_range, "cell_intensity_range", 0, 255);
    check_range(cell_area_range, "cell_area_range", 1, 9);
    check_range(artifact_count_range, "artifact_count_range", 0, 1000);
    check_range(outside_artifact_count_range, "outside_artifact_count_range", 0, 1000);
    check_range(artifact_intensity_range, "artifact_intensity_range", 0, 255);
    check_range(artifact_length_range, "artifact_length_range", 1, 25);
    if (cell_intensity_range.lo <= chamber_intensity + noise_clip) {
        throw Error(ErrorCode::InvalidConfig, "cells must be brighter than the noisy chamber");
    }
    if (!(split_segment_probability >= 0.0 && split_segment_probability <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "split_segment_probability must lie in [0, 1]");
    }
    if (split_gap < 0) {
        throw Error(ErrorCode::InvalidConfig, "split_gap must be non-negative");
    }
}

void to_json(nlohmann::json& j, const IntRange& r) { j = nlohmann::json::array({r.lo, r.hi}); }

void from_json(const nlohmann::json& j, IntRange& r) {
    r.lo = j.at(0).get<int>();
    r.hi = j.at(1).get<int>();
}

void to_json(nlohmann::json& j, const PhantomConfig& c) {
    j = nlohmann::json{
        {"height", c.height},
        {"width", c.width},
        {"chamber_intensity", c.chamber_intensity},
        {"segment_intensity", c.segment_intensity},
        {"background_intensity", c.background_intensity},
        {"noise_sigma", c.noise_sigma},
        {"noise_clip", c.noise_clip},
        {"cell_count_range", c.cell_count_range},
        {"cell_intensity_range", c.cell_intensity_range},
        {"cell_area_range", c.cell_area_range},
        {"artifact_count_range", c.artifact_count_range},
        {"outside_artifact_count_range", c.outside_artifact_count_range},
        {"artifact_intensity_range", c.artifact_intensity_range},
        {"artifact_length_range", c.artifact_length_range},
        {"split_segment_probability", c.split_segment_probability},
        {"split_gap", c.split_gap},
    };
}

void from_json(const nlohmann::json& j, PhantomConfig& c) {
    PhantomConfig d;
    c.height = j.value("height", d.height);
    c.width = j.value("width", d.width);
    c.chamber_intensity = j.value("chamber_intensity", d.chamber_intensity);
    c.segment_intensity = j.value("segment_intensity", d.segment_intensity);
    c.background_intensity = j.value("background_intensity", d.background_intensity);
    c.noise_sigma = j.value("noise_sigma", d.noise_sigma);
    c.noise_clip = j.value("noise_clip", d.noise_clip);
    c.cell_count_range = j.value("cell_count_range", d.cell_count_range);
    c.cell_intensity_range = j.value("cell_intensity_range", d.cell_intensity_range);
    c.cell_area_range = j.value("cell_area_range", d.cell_area_range);
    c.artifact_count_range = j.value("artifact_count_range", d.artifact_count_range);
    c.outside_artifact_count_range =
        j.value("outside_artifact_count_range", d.outside_artifact_count_range);
    c.artifact_intensity_range = j.value("artifact_intensity_range", d.artifact_intensity_range);
    c.artifact_length_range = j.value("artifact_length_range", d.artifact_length_range);
    c.split_segment_probability = j.value("split_segment_probability", d.split_segment_probability);
    c.split_gap = j.value("split_gap", d.split_gap);
}

Phantom generate_phantom(const PhantomConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto jitter = [&](double span) { return (unit(rng) * 2.0 - 1.0) * span; };

    const double H = config.height;
    const double W = config.width;
    const Ellipse chamber{H * (0.42 + jitter(0.02)), W * (0.5 + jitter(0.02)),
                          H * 0.17 * (1.0 + jitter(0.05)), W * 0.30 * (1.0 + jitter(0.05))};
    // The outer boundary sits lower so the iris/lens band is thicker than the cornea.
    const Ellipse outer{chamber.cr + H * 0.05, chamber.cc, chamber.ar + H * 0.13,
                        chamber.ac + W * 0.14};
    const bool split = unit(rng) < config.split_segment_probability;

    const int h = config.height;
    const int w = config.width;
    std::vector<std::uint8_t> base(static_cast<std::size_t>(h) * w);
    BinaryMask chamber_mask(h, w);
    BinaryMask ring(h, w);
    std::vector<int> ring_rows;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            std::uint8_t v = static_cast<std::uint8_t>(config.background_intensity);
            if (chamber.inside(r, c)) {
                v = static_cast<std::uint8_t>(config.chamber_intensity);
                chamber_mask.set(r, c, true);
            } else if (outer.inside(r, c)) {
                v = static_cast<std::uint8_t>(config.segment_intensity);
                ring.set(r, c, true);
                ring_rows.push_back(r);
            }
            base[static_cast<std::size_t>(r) * w + c] = v;
        }
    }

    if (split && !ring_rows.empty()) {
        // Cut at the median ring row so the two arcs carry similar area.
        const int cut = ring_rows[ring_rows.size() / 2];
        for (int r = std::max(0, cut - config.split_gap); r <= std::min(h - 1, cut + config.split_gap);
             ++r) {
            for (int c = 0; c < w; ++c) {
                if (ring.at(r, c)) {
                    ring.set(r, c, false);
                    base[static_cast<std::size_t>(r) * w + c] =
                        static_cast<std::uint8_t>(config.background_intensity);
                }
            }
        }
    }

    auto inside_chamber_with_margin = [&](int r, int c, int margin_r, int margin_c) {
        const Ellipse inset{chamber.cr, chamber.cc, chamber.ar - margin_r, chamber.ac - margin_c};
        return inset.ar > 0 && inset.ac > 0 && inset.inside(r, c);
    };
    auto sample_in_chamber = [&](int margin_r, int margin_c, const std::vector<Point>& placed) {
        std::uniform_int_distribution<int> rows(static_cast<int>(chamber.cr - chamber.ar),
                                                static_cast<int>(chamber.cr + chamber.ar));
        std::uniform_int_distribution<int> cols(static_cast<int>(chamber.cc - chamber.ac),
                                                static_cast<int>(chamber.cc + chamber.ac));
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
            const Point p{rows(rng), cols(rng)};
            if (inside_chamber_with_margin(p.row, p.col, margin_r, margin_c) && far_from(placed, p)) {
                return p;
            }
        }
        throw Error(ErrorCode::InvalidConfig, "cannot place all objects inside the chamber");
    };

    std::vector<Point> placed;
    std::vector<Point> cells;
    const int n_cells = uniform_int(rng, config.cell_count_range);
    for (int i = 0; i < n_cells; ++i) {
        const Point center = sample_in_chamber(4, 4, placed);
        const int area = uniform_int(rng, config.cell_area_range);
        const int peak = uniform_int(rng, config.cell_intensity_range);
        for (int k = 0; k < area; ++k) {
            const auto [dr, dc] = kCellOffsets[static_cast<std::size_t>(k)];
            const double falloff = k == 0 ? 1.0 : (dr == 0 || dc == 0 ? 0.85 : 0.7);
            base[static_cast<std::size_t>(center.row + dr) * w + center.col + dc] = to_u8(peak * falloff);
        }
        placed.push_back(center);
        cells.push_back(center);
    }

    auto draw_streak = [&](Point center, int length, int intensity) {
        const int left = center.col - length / 2;
        for (int k = 0; k < length; ++k) {
            base[static_cast<std::size_t>(center.row) * w + left + k] = static_cast<std::uint8_t>(intensity);
        }
    };

    const int n_artifacts = uniform_int(rng, config.artifact_count_range);
    for (int i = 0; i < n_artifacts; ++i) {
        const int length = uniform_int(rng, config.artifact_length_range);
        const Point center = sample_in_chamber(4, length / 2 + 4, placed);
        draw_streak(center, length, uniform_int(rng, config.artifact_intensity_range));
        placed.push_back(center);
    }

    const int n_outside = uniform_int(rng, config.outside_artifact_count_range);
    std::uniform_int_distribution<int> any_row(2, h - 3);
    std::uniform_int_distribution<int> any_col(2, w - 3);
    for (int i = 0; i < n_outside; ++i) {
        const int length = uniform_int(rng, config.artifact_length_range);
        bool done = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !done; ++attempt) {
            const Point p{any_row(rng), any_col(rng)};
            const int left = p.col - length / 2;
            if (left - 2 < 0 || left + length + 2 > w) continue;
            bool clear = true;
            for (int r = p.row - 2; r <= p.row + 2 && clear; ++r) {
                for (int c = left - 2; c < left + length + 2 && clear; ++c) {
                    clear = !chamber_mask.at(r, c) && !ring.at(r, c);
                }
            }
            if (clear && far_from(placed, p)) {
                draw_streak(p, length, uniform_int(rng, config.artifact_intensity_range));
                placed.push_back(p);
                done = true;
            }
        }
        if (!done) {
            throw Error(ErrorCode::InvalidConfig, "cannot place artifacts outside the chamber");
        }
    }

    std::normal_distribution<double> noise(0.0, config.noise_sigma);
    std::vector<std::uint8_t> pixels(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double n = config.noise_sigma > 0.0
                             ? std::clamp(noise(rng), -config.noise_clip, config.noise_clip)
                             : 0.0;
        pixels[i] = to_u8(base[i] + n);
    }

    return Phantom{GrayImage(h, w, std::move(pixels)), GroundTruth{std::move(chamber_mask), std::move(cells)},
                   split};
}

} // namespace accdor
