#include "accdor/segmenter.hpp"

#include "accdor/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace accdor {

SegmenterOutput oracle_segment(const GrayImage& image, std::span<const Point> points,
                               const OracleConfig& config) {
    if (config.fill_tolerance < 0) {
        throw Error(ErrorCode::InvalidConfig, "fill_tolerance must be non-negative");
    }
    const int h = image.height();
    const int w = image.width();
    BinaryMask region(h, w);
    std::vector<std::uint8_t> visited(image.size(), 0);
    std::vector<Point> stack;

    for (const Point& prompt : points) {
        if (!image.contains(prompt)) {
            throw Error(ErrorCode::InvalidArgument, "prompt (" + std::to_string(prompt.row) + ", " +
                                                        std::to_string(prompt.col) +
                                                        ") lies outside the image");
        }
        const int ref = image.at(prompt);
        std::fill(visited.begin(), visited.end(), std::uint8_t{0});
        visited[static_cast<std::size_t>(prompt.row) * w + prompt.col] = 1;
        stack.push_back(prompt);
        while (!stack.empty()) {
            const Point p = stack.back();
            stack.pop_back();
            region.set(p, true);
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int nr = p.row + dr;
                    const int nc = p.col + dc;
                    if ((dr == 0 && dc == 0) || nr < 0 || nc < 0 || nr >= h || nc >= w) {
                        continue;
                    }
                    const std::size_t idx = static_cast<std::size_t>(nr) * w + nc;
                    if (visited[idx]) {
                        continue;
                    }
                    visited[idx] = 1;
                    if (std::abs(static_cast<int>(image.at(nr, nc)) - ref) <= config.fill_tolerance) {
                        stack.push_back({nr, nc});
                    }
                }
            }
        }
    }

    SegmenterOutput out;
    out.candidates.push_back({config.fill_holes ? fill_holes(region) : std::move(region), 1.0});
    return out;
}

} // namespace accdor
