#pragma once

#include <sys/types.h>

#include <filesystem>
#include <string>
#include <vector>

namespace tshm {

// A spawned child. Destruction kills and reaps a child that was never waited.
class ChildProcess {
 public:
  ChildProcess() = default;
  explicit ChildProcess(pid_t pid) : pid_(pid) {}
  ChildProcess(ChildProcess&& other) noexcept : pid_(other.pid_) { other.pid_ = -1; }
  ChildProcess& operator=(ChildProcess&& other) noexcept;
  ~ChildProcess();

  pid_t pid() const noexcept { return pid_; }
  // Exit status, or 128 + signal number when killed by a signal.
  int wait();

 private:
  pid_t pid_ = -1;
};

// argv[0] is the executable path. Inherits stdio and environment.
ChildProcess spawn_process(const std::vector<std::string>& argv);

std::filesystem::path current_executable();

}  // namespace tshm
