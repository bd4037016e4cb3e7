// Stand-in segmentation adapter for protocol tests. Speaks the line protocol on
// stdin/stdout and answers with the oracle segmenter, or misbehaves on request:
//
//   fake_adapter [ok|multi|bad-id|garbage|hang|error|no-handshake|exit|die|bad-rle]

#include <accdor/segmenter.hpp>
#include <accdor/wire.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

using namespace accdor;
using nlohmann::json;

namespace {

void send(const json& j) {
    std::cout << j.dump() << '\n' << std::flush;
}

} // namespace

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "ok";
    if (mode == "exit") return 3;
    if (mode == "no-handshake") {
        send({{"ready", false}});
    } else {
        send(wire::handshake());
    }

    std::string line;
    while (std::getline(std::cin, line)) {
        const wire::SegmentRequest req = wire::decode_request(json::parse(line));
        if (mode == "hang") {
            std::this_thread::sleep_for(std::chrono::hours(1));
        } else if (mode == "die") {
            return 4;
        } else if (mode == "garbage") {
            std::cout << "this is not json\n" << std::flush;
        } else if (mode == "error") {
            send(wire::encode_error(req.id, "model exploded"));
        } else if (mode == "bad-id") {
            send(wire::encode_response(req.id + 1, oracle_segment(req.image, req.points)));
        } else if (mode == "bad-rle") {
            send({{"id", req.id}, {"masks", {{{"rle", {1, 2}}, {"score", 0.5}}}}});
        } else if (mode == "multi") {
            // A confident decoy away from the prompts, then the real region.
            BinaryMask decoy(req.image.height(), req.image.width());
            decoy.set(0, 0, true);
            SegmenterOutput out;
            out.candidates.push_back({decoy, 0.9});
            auto real = oracle_segment(req.image, req.points);
            out.candidates.push_back({real.candidates.front().mask, 0.6});
            send(wire::encode_response(req.id, out));
        } else {
            send(wire::encode_response(req.id, oracle_segment(req.image, req.points)));
        }
    }
    return 0;
}
