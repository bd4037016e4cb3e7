#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace accdor {

/// Pixel coordinate. Origin is the top-left corner; row grows downward, col grows rightward.
struct Point {
    int row = 0;
    int col = 0;

    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;
};

/// Fractional (row, col) position, e.g. a centroid.
struct Centroid {
    double row = 0.0;
    double col = 0.0;

    friend bool operator==(const Centroid&, const Centroid&) = default;
};

/// Row-major 8-bit intensity raster.
class GrayImage {
  public:
    GrayImage(int height, int width, std::uint8_t fill = 0);
    GrayImage(int height, int width, std::vector<std::uint8_t> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::uint8_t at(int row, int col) const { return data_[index(row, col)]; }
    std::uint8_t at(Point p) const { return at(p.row, p.col); }
    void set(int row, int col, std::uint8_t value) { data_[index(row, col)] = value; }

    bool contains(Point p) const noexcept {
        return p.row >= 0 && p.col >= 0 && p.row < height_ && p.col < width_;
    }

    std::span<const std::uint8_t> pixels() const noexcept { return data_; }
    std::span<std::uint8_t> pixels() noexcept { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

  private:
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_;
    int width_;
    std::vector<std::uint8_t> data_;
};

/// Interleaved 8-bit RGB raster.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data; // R, G, B per pixel
};

/// Row-major boolean raster; true marks object pixels.
class BinaryMask {
  public:
    BinaryMask(int height, int width, bool fill = false);
    BinaryMask(int height, int width, std::vector<std::uint8_t> bits);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return bits_.size(); }

    bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
    bool at(Point p) const { return at(p.row, p.col); }
    void set(int row, int col, bool value) { bits_[index(row, col)] = value ? 1 : 0; }
    void set(Point p, bool value) { set(p.row, p.col, value); }

    bool contains(Point p) const noexcept {
        return p.row >= 0 && p.col >= 0 && p.row < height_ && p.col < width_;
    }

    /// Number of object pixels.
    std::size_t count() const noexcept;

    /// 0/1 byte per pixel.
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool same_shape(const BinaryMask& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

  private:
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_;
    int width_;
    std::vector<std::uint8_t> bits_;
};

enum class Connectivity { Four = 4, Eight = 8 };

/// A maximal connected region of object pixels. `pixels.front()` is the
/// topmost-leftmost member.
struct Component {
    int label = 0;
    std::size_t pixel_count = 0;
    Centroid centroid;
    std::vector<Point> pixels;

    Point anchor() const { return pixels.front(); }
};

/// Components ordered by pixel_count descending, ties broken by the anchor
/// pixel in (row, col) order. Labels are 1-based positions in that order.
struct ComponentSet {
    std::vector<Component> components;

    std::size_t size() const noexcept { return components.size(); }
    bool empty() const noexcept { return components.empty(); }
};

inline constexpr std::size_t kUnboundedArea = std::numeric_limits<std::size_t>::max();

GrayImage to_grayscale(const RgbImage& image);

/// true iff intensity > threshold.
BinaryMask binarize(const GrayImage& image, double threshold);

ComponentSet connected_components(const BinaryMask& mask,
                                  Connectivity connectivity = Connectivity::Eight);

/// Keeps components with min_area <= pixel_count <= max_area.
ComponentSet filter_by_area(const ComponentSet& set, std::size_t min_area, std::size_t max_area);

/// Mean pixel coordinate of the object pixels. Throws InvalidImage on an empty mask.
Centroid mask_centroid(const BinaryMask& mask);

/// Rasterizes a list of components into a mask of the given shape.
BinaryMask components_to_mask(std::span<const Component> components, int height, int width);

/// Flips bits of background regions that cannot reach the image border.
BinaryMask fill_holes(const BinaryMask& mask);

} // namespace accdor
