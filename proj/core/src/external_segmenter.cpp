#include "accdor/external_segmenter.hpp"

#include "accdor/errors.hpp"
#include "accdor/wire.hpp"

namespace accdor {

namespace {

nlohmann::json parse_line(const std::string& line) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProtocolError, std::string("adapter emitted non-JSON line: ") + e.what());
    }
}

} // namespace

AdapterConnection::AdapterConnection(AdapterOptions options)
    : options_(std::move(options)), process_(options_.command) {
    const auto deadline = Subprocess::Clock::now() + options_.timeout;
    std::optional<std::string> line;
    try {
        line = process_.read_line(deadline);
    } catch (const Error&) {
        process_.kill();
        throw;
    }
    if (!line) {
        throw Error(ErrorCode::BackendError, "adapter exited before the handshake");
    }
    if (!wire::is_handshake(parse_line(*line))) {
        process_.kill();
        throw Error(ErrorCode::ProtocolError, "unexpected handshake: " + *line);
    }
}

SegmenterOutput external_segment(const GrayImage& image, std::span<const Point> points,
                                 AdapterConnection& connection) {
    const std::uint64_t id = connection.next_id();
    const auto deadline = Subprocess::Clock::now() + connection.options().timeout;
    auto& proc = connection.process();
    std::optional<std::string> line;
    try {
        proc.write_all(wire::encode_request(id, image, points).dump() + "\n", deadline);
        line = proc.read_line(deadline);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::BackendTimeout) {
            proc.kill();
        }
        throw;
    }
    if (!line) {
        throw Error(ErrorCode::BackendError, "adapter closed the connection");
    }
    return wire::decode_response(parse_line(*line), id, image.height(), image.width());
}

} // namespace accdor
