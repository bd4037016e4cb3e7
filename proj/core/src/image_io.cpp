#include "accdor/image_io.hpp"

#include "accdor/errors.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

namespace accdor {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (auto& ch : ext) {
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return ext;
}

class PgmHeaderReader {
  public:
    explicit PgmHeaderReader(std::string_view bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            throw Error(ErrorCode::InvalidImage, "malformed PGM header");
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (1L << 30)) throw Error(ErrorCode::InvalidImage, "PGM header value too large");
            ++pos_;
        }
        return static_cast<int>(value);
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

  private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

GrayImage read_png(const std::filesystem::path& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw Error(ErrorCode::IoError, "cannot read PNG " + path.string() + ": " + img.message);
    }
    img.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&img);
        throw Error(ErrorCode::IoError, "cannot decode PNG " + path.string() + ": " + img.message);
    }
    return GrayImage(static_cast<int>(img.height), static_cast<int>(img.width), std::move(buffer));
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width());
    img.height = static_cast<png_uint_32>(image.height());
    img.format = PNG_FORMAT_GRAY;
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    if (!png_image_write_to_stdio(&img, file.get(), 0, image.pixels().data(), 0, nullptr)) {
        throw Error(ErrorCode::IoError, "PNG encode failed for " + path.string() + ": " + img.message);
    }
}

} // namespace

std::string encode_pgm(const GrayImage& image) {
    std::ostringstream header;
    header << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    std::string out = header.str();
    const auto px = image.pixels();
    out.append(reinterpret_cast<const char*>(px.data()), px.size());
    return out;
}

GrayImage decode_pgm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw Error(ErrorCode::InvalidImage, "not a binary PGM (P5)");
    }
    PgmHeaderReader reader(bytes);
    reader.advance(2);
    const int width = reader.next_int();
    const int height = reader.next_int();
    const int maxval = reader.next_int();
    if (maxval != 255) {
        throw Error(ErrorCode::InvalidImage, "only maxval 255 PGM is supported");
    }
    // Exactly one whitespace byte separates the header from the raster.
    if (reader.pos() >= bytes.size() ||
        !std::isspace(static_cast<unsigned char>(bytes[reader.pos()]))) {
        throw Error(ErrorCode::InvalidImage, "malformed PGM header terminator");
    }
    reader.advance(1);
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidImage, "PGM has empty dimensions");
    }
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - reader.pos() < n) {
        throw Error(ErrorCode::InvalidImage, "PGM raster is truncated");
    }
    const auto* begin = reinterpret_cast<const std::uint8_t*>(bytes.data() + reader.pos());
    return GrayImage(height, width, std::vector<std::uint8_t>(begin, begin + n));
}

GrayImage read_gray(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        return read_png(path);
    }
    if (ext == ".pgm") {
        return decode_pgm(read_file(path));
    }
    throw Error(ErrorCode::IoError, "unsupported image extension: " + path.string());
}

void write_gray(const std::filesystem::path& path, const GrayImage& image) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        write_png(path, image);
    } else if (ext == ".pgm") {
        write_file(path, encode_pgm(image));
    } else {
        throw Error(ErrorCode::IoError, "unsupported image extension: " + path.string());
    }
}

BinaryMask read_mask(const std::filesystem::path& path) {
    const GrayImage img = read_gray(path);
    std::vector<std::uint8_t> bits(img.pixels().begin(), img.pixels().end());
    return BinaryMask(img.height(), img.width(), std::move(bits));
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    write_gray(path, mask_to_image(mask));
}

GrayImage mask_to_image(const BinaryMask& mask) {
    std::vector<std::uint8_t> px(mask.size());
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = bits[i] ? 255 : 0;
    }
    return GrayImage(mask.height(), mask.width(), std::move(px));
}

} // namespace accdor
