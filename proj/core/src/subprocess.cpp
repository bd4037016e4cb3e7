#include "accdor/subprocess.hpp"

#include "accdor/errors.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

extern char** environ;

namespace accdor {

namespace {

int remaining_ms(Subprocess::Clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Subprocess::Clock::now());
    return left.count() <= 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

bool wait_ready(int fd, short events, Subprocess::Clock::time_point deadline) {
    while (true) {
        pollfd pfd{fd, events, 0};
        const int rc = ::poll(&pfd, 1, remaining_ms(deadline));
        if (rc > 0) return true;
        if (rc == 0) return false;
        if (errno != EINTR) {
            throw Error(ErrorCode::BackendError, std::string("poll failed: ") + std::strerror(errno));
        }
    }
}

} // namespace

Subprocess::Subprocess(const std::string& command) {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
        throw Error(ErrorCode::BackendError, std::string("socketpair failed: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, sv[1], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, sv[1], STDOUT_FILENO);

    const std::string script = "exec " + command;
    const char* argv[] = {"sh", "-c", script.c_str(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv),
                                 environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(sv[1]);
    if (rc != 0) {
        ::close(sv[0]);
        pid_ = -1;
        throw Error(ErrorCode::BackendError, "cannot start adapter: " + std::string(std::strerror(rc)));
    }
    fd_ = sv[0];
}

Subprocess::~Subprocess() { release(); }

Subprocess::Subprocess(Subprocess&& other) noexcept
    : pid_(other.pid_), fd_(other.fd_), buffer_(std::move(other.buffer_)) {
    other.pid_ = -1;
    other.fd_ = -1;
}

Subprocess& Subprocess::operator=(Subprocess&& other) noexcept {
    if (this != &other) {
        release();
        pid_ = other.pid_;
        fd_ = other.fd_;
        buffer_ = std::move(other.buffer_);
        other.pid_ = -1;
        other.fd_ = -1;
    }
    return *this;
}

void Subprocess::release() noexcept {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
    if (pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 100; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

void Subprocess::kill() {
    if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Subprocess::write_all(std::string_view data, Clock::time_point deadline) {
    if (fd_ < 0) {
        throw Error(ErrorCode::BackendError, "adapter connection is closed");
    }
    while (!data.empty()) {
        if (!wait_ready(fd_, POLLOUT, deadline)) {
            throw Error(ErrorCode::BackendTimeout, "timed out writing to adapter");
        }
        const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw Error(ErrorCode::BackendError, std::string("write to adapter failed: ") +
                                                     std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

std::optional<std::string> Subprocess::read_line(Clock::time_point deadline) {
    if (fd_ < 0) {
        throw Error(ErrorCode::BackendError, "adapter connection is closed");
    }
    while (true) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        if (!wait_ready(fd_, POLLIN, deadline)) {
            throw Error(ErrorCode::BackendTimeout, "timed out waiting for adapter output");
        }
        char chunk[65536];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw Error(ErrorCode::BackendError, std::string("read from adapter failed: ") +
                                                     std::strerror(errno));
        }
        if (n == 0) {
            if (buffer_.empty()) return std::nullopt;
            std::string line = std::move(buffer_);
            buffer_.clear();
            return line;
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

} // namespace accdor
