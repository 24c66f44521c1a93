#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>

namespace cpn {

/// Child process run through /bin/sh -c with line-oriented pipes on stdin and
/// stdout. stderr is inherited. The destructor closes the pipes and reaps the
/// child, killing it if it is still running.
class Subprocess {
 public:
  explicit Subprocess(const std::string& command);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Throws TransportError if the pipe is closed.
  void write_all(std::string_view data);
  void write_line(std::string_view line);
  void close_stdin();

  /// Next line without its terminator; nullopt at EOF. Throws TransportError on timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  /// Everything until EOF. Throws TransportError on timeout.
  std::string read_all(std::chrono::milliseconds timeout);

  /// Exit status (or 128 + signal); blocks until the child exits.
  int wait();
  void kill();

  const std::string& command() const { return command_; }

 private:
  bool fill(std::chrono::steady_clock::time_point deadline);

  std::string command_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::optional<int> status_;
};

}  // namespace cpn
