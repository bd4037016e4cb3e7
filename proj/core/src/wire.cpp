#include "accdor/wire.hpp"

#include "accdor/errors.hpp"
#include "accdor/image_io.hpp"

#include <openssl/evp.h>

#include <string>

namespace accdor::wire {

using nlohmann::json;

std::vector<std::uint64_t> rle_encode(const BinaryMask& mask) {
    std::vector<std::uint64_t> counts;
    bool current = false;
    std::uint64_t run = 0;
    for (const std::uint8_t b : mask.bits()) {
        if ((b != 0) != current) {
            counts.push_back(run);
            current = !current;
            run = 0;
        }
        ++run;
    }
    counts.push_back(run);
    return counts;
}

BinaryMask rle_decode(std::span<const std::uint64_t> counts, int height, int width) {
    if (height < 1 || width < 1) {
        throw Error(ErrorCode::ProtocolError, "RLE target dimensions must be positive");
    }
    const std::uint64_t total = static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
    std::vector<std::uint8_t> bits;
    bits.reserve(total);
    std::uint8_t value = 0;
    for (const std::uint64_t run : counts) {
        if (run > total - bits.size()) {
            throw Error(ErrorCode::ProtocolError, "RLE runs exceed height*width");
        }
        bits.insert(bits.end(), run, value);
        value ^= 1;
    }
    if (bits.size() != total) {
        throw Error(ErrorCode::ProtocolError, "RLE runs sum to " + std::to_string(bits.size()) +
                                                  ", expected " + std::to_string(total));
    }
    return BinaryMask(height, width, std::move(bits));
}

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw Error(ErrorCode::ProtocolError, "base64 payload length is not a multiple of 4");
    }
    if (text.empty()) {
        return {};
    }
    std::string out(3 * (text.size() / 4), '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) {
        throw Error(ErrorCode::ProtocolError, "invalid base64 payload");
    }
    // EVP_DecodeBlock counts padding as zero bytes.
    std::size_t padding = 0;
    if (text.back() == '=') ++padding;
    if (text.size() >= 2 && text[text.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

json handshake() { return json{{"ready", true}, {"protocol", kProtocolVersion}}; }

bool is_handshake(const json& message) {
    return message.is_object() && message.contains("ready") && message["ready"] == true &&
           message.contains("protocol") && message["protocol"] == kProtocolVersion;
}

json encode_request(std::uint64_t id, const GrayImage& image, std::span<const Point> points) {
    json pts = json::array();
    for (const Point& p : points) {
        pts.push_back({p.row, p.col});
    }
    return json{{"id", id},
                {"op", "segment"},
                {"height", image.height()},
                {"width", image.width()},
                {"image_pgm_b64", base64_encode(encode_pgm(image))},
                {"points", std::move(pts)}};
}

SegmentRequest decode_request(const json& message) {
    try {
        SegmentRequest req;
        req.id = message.at("id").get<std::uint64_t>();
        if (message.at("op").get<std::string>() != "segment") {
            throw Error(ErrorCode::ProtocolError, "unsupported op");
        }
        const int height = message.at("height").get<int>();
        const int width = message.at("width").get<int>();
        req.image = decode_pgm(base64_decode(message.at("image_pgm_b64").get<std::string>()));
        if (req.image.height() != height || req.image.width() != width) {
            throw Error(ErrorCode::ProtocolError, "embedded image does not match declared size");
        }
        for (const auto& p : message.at("points")) {
            req.points.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        }
        return req;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProtocolError, std::string("malformed request: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ProtocolError) throw;
        throw Error(ErrorCode::ProtocolError, e.what());
    }
}

json encode_response(std::uint64_t id, const SegmenterOutput& output) {
    json masks = json::array();
    for (const auto& cand : output.candidates) {
        masks.push_back({{"rle", rle_encode(cand.mask)}, {"score", cand.score}});
    }
    return json{{"id", id}, {"masks", std::move(masks)}};
}

json encode_error(std::uint64_t id, std::string_view message) {
    return json{{"id", id}, {"error", std::string(message)}};
}

SegmenterOutput decode_response(const json& message, std::uint64_t expected_id, int height,
                                int width) {
    try {
        const auto id = message.at("id").get<std::uint64_t>();
        if (id != expected_id) {
            throw Error(ErrorCode::ProtocolError, "response id " + std::to_string(id) +
                                                      " does not echo request id " +
                                                      std::to_string(expected_id));
        }
        if (message.contains("error")) {
            throw Error(ErrorCode::BackendError, message.at("error").get<std::string>());
        }
        SegmenterOutput out;
        for (const auto& m : message.at("masks")) {
            const auto counts = m.at("rle").get<std::vector<std::uint64_t>>();
            const double score = m.at("score").get<double>();
            out.candidates.push_back({rle_decode(counts, height, width), score});
        }
        if (out.candidates.empty()) {
            throw Error(ErrorCode::ProtocolError, "response carries no masks");
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProtocolError, std::string("malformed response: ") + e.what());
    }
}

} // namespace accdor::wire
