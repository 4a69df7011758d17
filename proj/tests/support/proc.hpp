#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs a shell command, capturing stdout via the pipe and stderr via a
// scratch file, so assertions can separate data output from diagnostics.
inline CmdResult run_cmd(const std::string& cmd) {
  static std::atomic<unsigned> counter{0};
  const auto err_path = std::filesystem::temp_directory_path() /
                        ("weep_cmd_err_" + std::to_string(getpid()) + "_" +
                         std::to_string(counter.fetch_add(1)));

  CmdResult result;
  const std::string full = cmd + " 2>" + err_path.string();
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) {
    result.err = "popen failed";
    return result;
  }
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), n);
  const int status = pclose(pipe);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;
  }

  std::ifstream err_in(err_path, std::ios::binary);
  if (err_in) {
    result.err.assign((std::istreambuf_iterator<char>(err_in)),
                      std::istreambuf_iterator<char>());
  }
  std::error_code ec;
  std::filesystem::remove(err_path, ec);
  return result;
}
