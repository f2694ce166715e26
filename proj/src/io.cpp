#include "extentlab/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "extentlab/errors.hpp"

namespace extentlab {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path temp = path;
  temp += ".tmp." + std::to_string(::getpid());
  int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw IoError("cannot open " + temp.string() + " for writing");
  std::size_t written = 0;
  while (written < contents.size()) {
    ssize_t n = ::write(fd, contents.data() + written,
                        contents.size() - written);
    if (n < 0) {
      ::close(fd);
      throw IoError("write failed for " + temp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) {
    fs::remove(temp);
    throw IoError("cannot rename " + temp.string() + " to " + path.string() +
                  ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void for_each_jsonl_text(
    std::string_view text,
    const std::function<void(std::size_t, const Json&)>& on_record) {
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_number) + ": " + e.what(),
                       line_number);
    }
    on_record(line_number, record);
  }
}

void for_each_jsonl(
    const fs::path& path,
    const std::function<void(std::size_t, const Json&)>& on_record) {
  for_each_jsonl_text(read_file(path), on_record);
}

std::string to_jsonl(const std::vector<Json>& records) {
  std::string out;
  for (const auto& record : records) {
    out += record.dump();
    out += '\n';
  }
  return out;
}

int count_unknown_keys(const Json& object,
                       std::initializer_list<std::string_view> known) {
  if (!object.is_object()) return 0;
  int unknown = 0;
  for (const auto& item : object.items()) {
    bool listed = false;
    for (auto key : known) listed = listed || item.key() == key;
    if (!listed) ++unknown;
  }
  return unknown;
}

void throw_field_error(std::string_view context, std::string_view key,
                       std::string_view problem) {
  throw IngestError(std::string(context) + ": field '" + std::string(key) +
                    "' " + std::string(problem));
}

}  // namespace extentlab
