#pragma once

#include <filesystem>
#include <string>

namespace nbi {

std::string read_text(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never see a
/// partially written file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Exclusive advisory lock on `<dir>/.lock`, released on destruction.
/// Throws DependencyError when another process holds it.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace nbi
