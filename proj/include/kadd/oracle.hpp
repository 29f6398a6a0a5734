#pragma once

#include <csignal>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <string>
#include <vector>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "kadd/game.hpp"

extern char** environ;

namespace kadd {

/// A game whose values come from a child process speaking the line protocol:
/// the parent writes `<bitstring>\n`, the child answers `<decimal real>\n`.
/// One request is in flight at a time.
class OracleGame final : public Game {
 public:
  OracleGame(int n, std::vector<std::string> argv) : Game(n), argv_(std::move(argv)) {
    if (argv_.empty()) throw std::invalid_argument("oracle command is empty");
    std::signal(SIGPIPE, SIG_IGN);

    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0) throw GameError("oracle: pipe failed");
    if (pipe(from_child) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      throw GameError("oracle: pipe failed");
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, to_child[1]);
    posix_spawn_file_actions_addclose(&actions, from_child[0]);

    std::vector<char*> cargs;
    for (auto& a : argv_) cargs.push_back(a.data());
    cargs.push_back(nullptr);

    const int rc = posix_spawnp(&pid_, cargs[0], &actions, nullptr, cargs.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(to_child[0]);
    close(from_child[1]);
    if (rc != 0) {
      close(to_child[1]);
      close(from_child[0]);
      throw GameError("oracle: cannot spawn '" + argv_[0] + "': " + std::strerror(rc));
    }
    out_ = fdopen(to_child[1], "w");
    in_ = fdopen(from_child[0], "r");
    if (out_ == nullptr || in_ == nullptr) throw GameError("oracle: fdopen failed");
  }

  ~OracleGame() override {
    try {
      finish();
    } catch (...) {
    }
  }

  /// Closes the session and reaps the child. Throws if the child exits with
  /// a nonzero status.
  void finish() const {
    std::lock_guard lock(io_);
    if (pid_ <= 0) return;
    if (out_ != nullptr) std::fclose(out_);
    out_ = nullptr;
    if (in_ != nullptr) std::fclose(in_);
    in_ = nullptr;
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      throw GameError("oracle: child exited with failure status");
  }

  /// Child round-trips performed so far.
  std::size_t round_trips() const {
    std::lock_guard lock(io_);
    return round_trips_;
  }

  std::string describe() const override { return "oracle:" + argv_[0]; }

 protected:
  double compute(Coalition a) const override {
    std::lock_guard lock(io_);
    if (out_ == nullptr || in_ == nullptr) throw GameError("oracle: session closed");
    const std::string request = to_bitstring(a, players()) + '\n';
    if (std::fputs(request.c_str(), out_) == EOF || std::fflush(out_) != 0)
      throw GameError("oracle: broken pipe while writing request");

    std::string reply;
    for (int ch = std::fgetc(in_); ch != '\n'; ch = std::fgetc(in_)) {
      if (ch == EOF) throw GameError("oracle: child closed its output mid-session");
      reply.push_back(static_cast<char>(ch));
    }
    ++round_trips_;
    if (!reply.empty() && reply.back() == '\r') reply.pop_back();

    char* end = nullptr;
    const double v = std::strtod(reply.c_str(), &end);
    if (reply.empty() || end != reply.c_str() + reply.size() || !std::isfinite(v))
      throw GameError("oracle: protocol violation, reply '" + reply + "' is not a finite real");
    return v;
  }

 private:
  std::vector<std::string> argv_;
  mutable pid_t pid_ = -1;
  mutable std::mutex io_;
  mutable std::FILE* out_ = nullptr;
  mutable std::FILE* in_ = nullptr;
  mutable std::size_t round_trips_ = 0;
};

/// Spawns `argv` as a value oracle for an n-player game.
inline std::shared_ptr<OracleGame> open_oracle(int n, std::vector<std::string> argv) {
  return std::make_shared<OracleGame>(n, std::move(argv));
}

}  // namespace kadd
