#pragma once

// Black-box evaluator running as a persistent child process.
//
// Wire protocol, one exchange per evaluation, UTF-8, newline terminated:
//   request   [x1,...,xn]\n
//   response  [f1,...,fk]\n
// Any protocol failure (malformed JSON, non-numeric or non-finite values, wrong arity,
// timeout, process exit) raises EvaluationError and tears the process down; the next
// evaluation starts a fresh one.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <json.hpp>
#include <string>
#include <vector>

#include "pups/problems.hpp"

namespace pups {

class SubprocessEvaluator final : public Evaluator {
public:
  SubprocessEvaluator(std::vector<std::string> command, std::size_t objectives,
                      double timeout_seconds = 60.0)
      : command_(std::move(command)), objectives_(objectives), timeout_seconds_(timeout_seconds) {
    if (command_.empty()) throw ContractViolation("external evaluator command is empty");
    ::signal(SIGPIPE, SIG_IGN);
  }

  SubprocessEvaluator(const SubprocessEvaluator&) = delete;
  SubprocessEvaluator& operator=(const SubprocessEvaluator&) = delete;

  ~SubprocessEvaluator() override { shutdown(); }

  bool running() const noexcept { return pid_ > 0; }
  int launches() const noexcept { return launches_; }

  ObjectiveVector evaluate(const DecisionVector& x) override {
    if (!running()) launch();
    try {
      write_all(nlohmann::json(x).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) + "\n");
      return parse_reply(read_line());
    } catch (const EvaluationError&) {
      shutdown();
      throw;
    }
  }

  void shutdown() noexcept {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
      int status = 0;
      // Give a well-behaved evaluator a moment to exit on EOF before killing it.
      for (int i = 0; i < 20; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) == pid_) {
          pid_ = -1;
          break;
        }
        ::usleep(5000);
      }
      if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
      }
    }
    pid_ = -1;
    buffer_.clear();
  }

private:
  void launch() {
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe(in_pipe) != 0) throw EvaluationError("pipe() failed: " + std::string(std::strerror(errno)));
    if (::pipe(out_pipe) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw EvaluationError("pipe() failed: " + std::string(std::strerror(errno)));
    }
    std::vector<char*> argv;
    for (auto& arg : command_) argv.push_back(arg.data());
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
      throw EvaluationError("fork() failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
      ::execvp(argv[0], argv.data());
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    pid_ = pid;
    ++launches_;
  }

  void write_all(const std::string& line) {
    std::size_t done = 0;
    while (done < line.size()) {
      const auto n = ::write(to_child_, line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw EvaluationError("evaluator process is not accepting input");
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration<double>(timeout_seconds_);
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
      if (left.count() <= 0) throw EvaluationError("evaluator timed out");
      pollfd pfd{from_child_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw EvaluationError("poll() failed: " + std::string(std::strerror(errno)));
      }
      if (ready == 0) throw EvaluationError("evaluator timed out");
      char chunk[4096];
      const auto n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw EvaluationError("reading evaluator output failed");
      }
      if (n == 0) throw EvaluationError("evaluator process exited");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  ObjectiveVector parse_reply(const std::string& line) const {
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw EvaluationError("malformed evaluator reply: " + line.substr(0, 80));
    }
    if (!reply.is_array()) throw EvaluationError("evaluator reply is not a JSON array");
    if (reply.size() != objectives_) {
      throw EvaluationError("evaluator replied with " + std::to_string(reply.size()) +
                            " values, expected " + std::to_string(objectives_));
    }
    ObjectiveVector z;
    z.reserve(reply.size());
    for (const auto& v : reply) {
      if (!v.is_number()) throw EvaluationError("evaluator reply contains a non-numeric value");
      z.push_back(v.get<double>());
    }
    if (!all_finite(z)) throw EvaluationError("evaluator reply contains a non-finite value");
    return z;
  }

  std::vector<std::string> command_;
  std::size_t objectives_;
  double timeout_seconds_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  int launches_ = 0;
  std::string buffer_;
};

}  // namespace pups
