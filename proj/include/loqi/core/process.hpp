#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace loqi {

struct ProcessResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

/// Runs argv[0] (searched on PATH) without a shell and waits for it.
/// Throws EnvironmentError if the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv);

/// Locates an executable: an absolute/relative path is checked directly,
/// a bare name is searched on PATH.
std::optional<std::filesystem::path> find_executable(const std::string& name);

/// Splits a command template on whitespace and substitutes `{key}`
/// placeholders inside each token. Substitution happens after splitting,
/// so values may contain spaces.
std::vector<std::string> expand_command(const std::string& command_template,
                                        const std::map<std::string, std::string>& values);

/// Scoped temporary directory, removed recursively on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "loqi");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace loqi
