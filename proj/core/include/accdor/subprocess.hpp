#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>

namespace accdor {

/// Child process whose stdin and stdout are one end of a local stream socket.
/// stderr is inherited. The destructor closes the channel, waits briefly, and
/// then terminates the child if it is still running.
class Subprocess {
  public:
    using Clock = std::chrono::steady_clock;

    /// Runs `command` through /bin/sh -c.
    explicit Subprocess(const std::string& command);
    ~Subprocess();

    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;
    Subprocess(Subprocess&& other) noexcept;
    Subprocess& operator=(Subprocess&& other) noexcept;

    /// Writes the whole buffer or throws (BackendTimeout / BackendError).
    void write_all(std::string_view data, Clock::time_point deadline);

    /// Next line without the trailing newline; nullopt on end of stream.
    /// Throws BackendTimeout when the deadline passes first.
    std::optional<std::string> read_line(Clock::time_point deadline);

    pid_t pid() const noexcept { return pid_; }

    /// Sends SIGKILL and reaps the child.
    void kill();

  private:
    void release() noexcept;

    pid_t pid_ = -1;
    int fd_ = -1;
    std::string buffer_;
};

} // namespace accdor
