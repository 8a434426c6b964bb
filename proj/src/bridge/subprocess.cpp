#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "nirs/bridge.hpp"

extern char** environ;

namespace nirs::bridge {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

Subprocess::Subprocess(Subprocess&& o) noexcept
    : pid_(o.pid_), in_fd_(o.in_fd_), out_fd_(o.out_fd_), buffer_(std::move(o.buffer_)), eof_(o.eof_),
      status_(o.status_) {
  o.pid_ = -1;
  o.in_fd_ = o.out_fd_ = -1;
}

Subprocess& Subprocess::operator=(Subprocess&& o) noexcept {
  if (this != &o) {
    if (running()) kill();
    close_fd(in_fd_);
    close_fd(out_fd_);
    pid_ = o.pid_;
    in_fd_ = o.in_fd_;
    out_fd_ = o.out_fd_;
    buffer_ = std::move(o.buffer_);
    eof_ = o.eof_;
    status_ = o.status_;
    o.pid_ = -1;
    o.in_fd_ = o.out_fd_ = -1;
  }
  return *this;
}

Subprocess::~Subprocess() {
  if (running()) kill();
  close_fd(in_fd_);
  close_fd(out_fd_);
}

Subprocess Subprocess::spawn(const std::vector<std::string>& argv) {
  if (argv.empty() || argv[0].empty()) throw BridgeError(BridgeError::Kind::spawn, "empty adapter command");
  // A dead adapter must surface as a failed write, not kill the engine.
  std::signal(SIGPIPE, SIG_IGN);

  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0)
    throw BridgeError(BridgeError::Kind::spawn, std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw BridgeError(BridgeError::Kind::spawn, std::string("pipe: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = -1;
  const int rc = posix_spawnp(&pid, argv[0].c_str(), &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw BridgeError(BridgeError::Kind::spawn, "cannot start adapter '" + argv[0] + "': " + std::strerror(rc));
  }
  Subprocess p;
  p.pid_ = pid;
  p.in_fd_ = to_child[1];
  p.out_fd_ = from_child[0];
  return p;
}

bool Subprocess::write_line(std::string_view line) {
  if (in_fd_ < 0) return false;
  std::string data(line);
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> Subprocess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (eof_ || out_fd_ < 0) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{out_fd_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (pr < 0) {
      if (errno == EINTR) continue;
      eof_ = true;
      return std::nullopt;
    }
    if (pr == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(out_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      eof_ = true;
    } else if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
}

void Subprocess::close_input() { close_fd(in_fd_); }

std::optional<int> Subprocess::wait_for(std::chrono::milliseconds timeout) {
  if (pid_ <= 0) return status_ >= 0 ? std::optional<int>(status_) : std::nullopt;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    int status = 0;
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      pid_ = -1;
      status_ = decode_status(status);
      close_fd(in_fd_);
      close_fd(out_fd_);
      return status_;
    }
    if (r < 0 && errno != EINTR) {
      pid_ = -1;
      return std::nullopt;
    }
    if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

int Subprocess::kill() {
  if (pid_ <= 0) return status_;
  ::kill(pid_, SIGKILL);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  pid_ = -1;
  status_ = decode_status(status);
  close_fd(in_fd_);
  close_fd(out_fd_);
  return status_;
}

}  // namespace nirs::bridge
