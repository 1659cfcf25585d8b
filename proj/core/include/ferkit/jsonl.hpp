#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ferkit {

// Non-empty lines of a text file, '\n' separated, trailing '\r' stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// Whole file as bytes, or nullopt when it does not exist or is unreadable.
std::optional<std::string> try_read_file(const std::filesystem::path& path);

// Writes via a sibling temp file + rename, so readers never observe a
// truncated file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// Serializes each element with its to_jsonl_line() and writes atomically.
template <typename Record>
void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::string body;
  for (const Record& r : records) {
    body += r.to_jsonl_line();
    body += '\n';
  }
  atomic_write_file(path, body);
}

template <typename Record>
std::vector<Record> read_jsonl(const std::filesystem::path& path) {
  std::vector<Record> out;
  for (const std::string& line : read_lines(path)) {
    out.push_back(Record::from_jsonl_line(line));
  }
  return out;
}

}  // namespace ferkit
