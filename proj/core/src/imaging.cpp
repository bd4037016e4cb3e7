#include "accdor/imaging.hpp"

#include "accdor/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace accdor {

namespace {

void check_dims(int height, int width) {
    if (height < 1 || width < 1) {
        throw Error(ErrorCode::InvalidImage, "raster dimensions must be positive, got " +
                                                 std::to_string(height) + "x" +
                                                 std::to_string(width));
    }
}

std::size_t area_of(int height, int width) {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
}

constexpr std::array<std::array<int, 2>, 8> kNeighbours8{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};
constexpr std::array<std::array<int, 2>, 4> kNeighbours4{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

} // namespace

GrayImage::GrayImage(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
    check_dims(height, width);
    data_.assign(area_of(height, width), fill);
}

GrayImage::GrayImage(int height, int width, std::vector<std::uint8_t> data)
    : height_(height), width_(width), data_(std::move(data)) {
    check_dims(height, width);
    if (data_.size() != area_of(height, width)) {
        throw Error(ErrorCode::InvalidImage, "pixel buffer length does not match dimensions");
    }
}

BinaryMask::BinaryMask(int height, int width, bool fill) : height_(height), width_(width) {
    check_dims(height, width);
    bits_.assign(area_of(height, width), fill ? 1 : 0);
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
    check_dims(height, width);
    if (bits_.size() != area_of(height, width)) {
        throw Error(ErrorCode::InvalidImage, "mask buffer length does not match dimensions");
    }
    for (auto& b : bits_) {
        b = b != 0 ? 1 : 0;
    }
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

GrayImage to_grayscale(const RgbImage& image) {
    if (image.height < 1 || image.width < 1 ||
        image.data.size() != 3 * area_of(image.height, image.width)) {
        throw Error(ErrorCode::InvalidImage, "RGB raster is empty or malformed");
    }
    std::vector<std::uint8_t> gray(area_of(image.height, image.width));
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const unsigned r = image.data[3 * i];
        const unsigned g = image.data[3 * i + 1];
        const unsigned b = image.data[3 * i + 2];
        // Rec.601 weights in thousandths, rounded half up.
        const unsigned y = (299 * r + 587 * g + 114 * b + 500) / 1000;
        gray[i] = static_cast<std::uint8_t>(std::min(y, 255u));
    }
    return GrayImage(image.height, image.width, std::move(gray));
}

BinaryMask binarize(const GrayImage& image, double threshold) {
    std::vector<std::uint8_t> bits(image.size());
    const auto px = image.pixels();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = static_cast<double>(px[i]) > threshold ? 1 : 0;
    }
    return BinaryMask(image.height(), image.width(), std::move(bits));
}

ComponentSet connected_components(const BinaryMask& mask, Connectivity connectivity) {
    const int h = mask.height();
    const int w = mask.width();
    const auto bits = mask.bits();
    std::vector<std::uint8_t> visited(bits.size(), 0);
    std::vector<Component> found;
    std::vector<Point> stack;

    const bool eight = connectivity == Connectivity::Eight;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t seed = static_cast<std::size_t>(r) * w + c;
            if (!bits[seed] || visited[seed]) {
                continue;
            }
            Component comp;
            visited[seed] = 1;
            stack.push_back({r, c});
            double sum_r = 0.0;
            double sum_c = 0.0;
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                comp.pixels.push_back(p);
                sum_r += p.row;
                sum_c += p.col;
                auto visit = [&](int dr, int dc) {
                    const int nr = p.row + dr;
                    const int nc = p.col + dc;
                    if (nr < 0 || nc < 0 || nr >= h || nc >= w) {
                        return;
                    }
                    const std::size_t idx = static_cast<std::size_t>(nr) * w + nc;
                    if (bits[idx] && !visited[idx]) {
                        visited[idx] = 1;
                        stack.push_back({nr, nc});
                    }
                };
                if (eight) {
                    for (const auto& d : kNeighbours8) visit(d[0], d[1]);
                } else {
                    for (const auto& d : kNeighbours4) visit(d[0], d[1]);
                }
            }
            comp.pixel_count = comp.pixels.size();
            const auto n = static_cast<double>(comp.pixel_count);
            comp.centroid = {sum_r / n, sum_c / n};
            found.push_back(std::move(comp));
        }
    }

    // Discovery order is row-major by anchor, so a stable sort on area keeps the anchor tie-break.
    std::stable_sort(found.begin(), found.end(), [](const Component& a, const Component& b) {
        return a.pixel_count > b.pixel_count;
    });
    for (std::size_t i = 0; i < found.size(); ++i) {
        found[i].label = static_cast<int>(i + 1);
    }
    return ComponentSet{std::move(found)};
}

ComponentSet filter_by_area(const ComponentSet& set, std::size_t min_area, std::size_t max_area) {
    if (min_area > max_area) {
        throw Error(ErrorCode::InvalidRange, "min_area " + std::to_string(min_area) +
                                                 " exceeds max_area " + std::to_string(max_area));
    }
    ComponentSet out;
    for (const auto& comp : set.components) {
        if (comp.pixel_count >= min_area && comp.pixel_count <= max_area) {
            out.components.push_back(comp);
        }
    }
    return out;
}

Centroid mask_centroid(const BinaryMask& mask) {
    double sum_r = 0.0;
    double sum_c = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (mask.at(r, c)) {
                sum_r += r;
                sum_c += c;
                ++n;
            }
        }
    }
    if (n == 0) {
        throw Error(ErrorCode::InvalidImage, "centroid of an empty mask is undefined");
    }
    return {sum_r / static_cast<double>(n), sum_c / static_cast<double>(n)};
}

BinaryMask components_to_mask(std::span<const Component> components, int height, int width) {
    BinaryMask mask(height, width);
    for (const auto& comp : components) {
        for (const Point& p : comp.pixels) {
            mask.set(p, true);
        }
    }
    return mask;
}

BinaryMask fill_holes(const BinaryMask& mask) {
    const int h = mask.height();
    const int w = mask.width();
    // Background reachable from the border (4-connected, dual of 8-connected objects).
    std::vector<std::uint8_t> outside(mask.size(), 0);
    std::vector<Point> stack;
    auto seed = [&](int r, int c) {
        const std::size_t idx = static_cast<std::size_t>(r) * w + c;
        if (!mask.at(r, c) && !outside[idx]) {
            outside[idx] = 1;
            stack.push_back({r, c});
        }
    };
    for (int c = 0; c < w; ++c) {
        seed(0, c);
        seed(h - 1, c);
    }
    for (int r = 0; r < h; ++r) {
        seed(r, 0);
        seed(r, w - 1);
    }
    while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        for (const auto& d : kNeighbours4) {
            const int nr = p.row + d[0];
            const int nc = p.col + d[1];
            if (nr >= 0 && nc >= 0 && nr < h && nc < w) {
                seed(nr, nc);
            }
        }
    }
    std::vector<std::uint8_t> bits(mask.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = outside[i] ? 0 : 1;
    }
    return BinaryMask(h, w, std::move(bits));
}

} // namespace accdor
