#pragma once

#include "accdor/segmenter.hpp"
#include "accdor/subprocess.hpp"

#include <chrono>
#include <cstdint>
#include <string>

namespace accdor {

struct AdapterOptions {
    std::string command; // shell command line that starts the adapter
    std::chrono::milliseconds timeout{120'000};
};

/// A handshaken connection to one adapter process. Strictly one request in
/// flight; a timeout or transport failure leaves the connection closed.
class AdapterConnection {
  public:
    explicit AdapterConnection(AdapterOptions options);

    std::uint64_t next_id() noexcept { return next_id_++; }
    Subprocess& process() noexcept { return process_; }
    const AdapterOptions& options() const noexcept { return options_; }

  private:
    AdapterOptions options_;
    Subprocess process_;
    std::uint64_t next_id_ = 1;
};

/// Sends one segment request and decodes the candidate masks.
SegmenterOutput external_segment(const GrayImage& image, std::span<const Point> points,
                                 AdapterConnection& connection);

class ExternalSegmenter final : public PromptableSegmenter {
  public:
    explicit ExternalSegmenter(AdapterOptions options) : connection_(std::move(options)) {}

    SegmenterOutput segment(const GrayImage& image, std::span<const Point> points) override {
        return external_segment(image, points, connection_);
    }

  private:
    AdapterConnection connection_;
};

} // namespace accdor
