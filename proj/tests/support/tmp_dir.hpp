#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

namespace ferkit::test {

// Self-cleaning unique directory under the system temp root.
struct TmpDir {
  std::filesystem::path path;

  TmpDir() {
    static std::atomic<unsigned> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("ferkit-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TmpDir(const TmpDir&) = delete;
  TmpDir& operator=(const TmpDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path / name; }
};

}  // namespace ferkit::test
