#pragma once

// Line protocol spoken with external segmentation adapters.
//
//   handshake : {"ready": true, "protocol": 1}
//   request   : {"id", "op": "segment", "height", "width", "image_pgm_b64", "points": [[row, col], ...]}
//   response  : {"id", "masks": [{"rle": [...], "score": s}, ...]}  or  {"id", "error": "..."}
//
// RLE is a row-major scan: the first count is leading false bits, then
// alternating true/false run lengths summing to height * width.

#include "accdor/segmenter.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace accdor::wire {

inline constexpr int kProtocolVersion = 1;

std::vector<std::uint64_t> rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(std::span<const std::uint64_t> counts, int height, int width);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

struct SegmentRequest {
    std::uint64_t id = 0;
    GrayImage image{1, 1};
    std::vector<Point> points;
};

nlohmann::json handshake();
bool is_handshake(const nlohmann::json& message);

nlohmann::json encode_request(std::uint64_t id, const GrayImage& image, std::span<const Point> points);
SegmentRequest decode_request(const nlohmann::json& message);

nlohmann::json encode_response(std::uint64_t id, const SegmenterOutput& output);
nlohmann::json encode_error(std::uint64_t id, std::string_view message);

/// Validates the id echo and mask dimensions. A well-formed error response
/// raises BackendError; anything malformed raises ProtocolError.
SegmenterOutput decode_response(const nlohmann::json& message, std::uint64_t expected_id,
                                int height, int width);

} // namespace accdor::wire
