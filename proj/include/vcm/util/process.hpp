#pragma once

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "vcm/error.hpp"
#include "vcm/util/binary_io.hpp"

extern char** environ;

namespace vcm::proc {

inline std::string join_argv(const std::vector<std::string>& argv) {
  std::string out;
  for (const auto& a : argv) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

struct RunResult {
  int exit_code = 0;
  std::string stderr_text;
  std::string stdout_text;  // only when a stdout path was given
};

/// Runs argv directly (no shell). stderr is captured through `stderr_path`;
/// stdout goes to `stdout_path` when given and is discarded otherwise. Throws
/// CommandNotFound when the program cannot be started; a nonzero exit is
/// returned, not thrown.
inline RunResult run(const std::vector<std::string>& argv, const std::filesystem::path& stderr_path,
                     const std::filesystem::path& stdout_path = {}) {
  if (argv.empty()) fail(ErrorCode::CommandNotFound, "empty command");
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  const std::string out_file = stdout_path.empty() ? std::string("/dev/null") : stdout_path.string();
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  const std::string err_file = stderr_path.string();
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) fail(ErrorCode::CommandNotFound, "cannot start `" + join_argv(argv) + "`: " + std::strerror(rc));

  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) fail(ErrorCode::CommandFailed, "waitpid failed for `" + join_argv(argv) + "`");
  }
  RunResult r;
  if (WIFEXITED(status))
    r.exit_code = WEXITSTATUS(status);
  else
    r.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  std::error_code ec;
  if (std::filesystem::exists(stderr_path, ec)) r.stderr_text = io::read_text(stderr_path);
  if (!stdout_path.empty() && std::filesystem::exists(stdout_path, ec)) r.stdout_text = io::read_text(stdout_path);
  // posix_spawnp on some libcs reports exec failure as exit 127 from the child.
  if (r.exit_code == 127 && r.stderr_text.empty())
    fail(ErrorCode::CommandNotFound, "cannot start `" + join_argv(argv) + "`");
  return r;
}

}  // namespace vcm::proc
