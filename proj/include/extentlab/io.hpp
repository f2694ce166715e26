#ifndef EXTENTLAB_IO_HPP_
#define EXTENTLAB_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace extentlab {

using Json = nlohmann::json;

// Writes `contents` to a sibling temporary file, flushes it to disk and
// renames it over `path`. Readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Calls `on_record(line_number, object)` for every non-blank line. Lines
// that do not parse raise ParseError carrying the 1-based line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const Json&)>&
                        on_record);
void for_each_jsonl_text(std::string_view text,
                         const std::function<void(std::size_t, const Json&)>&
                             on_record);

std::string to_jsonl(const std::vector<Json>& records);

// Number of keys of `object` not listed in `known`.
int count_unknown_keys(const Json& object,
                       std::initializer_list<std::string_view> known);

[[noreturn]] void throw_field_error(std::string_view context,
                                   std::string_view key,
                                   std::string_view problem);

// Typed field access with errors that name the missing or mistyped field.
template <typename T>
T required_field(const Json& object, std::string_view key,
                 std::string_view context) {
  if (!object.is_object()) throw_field_error(context, key, "not an object");
  auto it = object.find(key);
  if (it == object.end()) throw_field_error(context, key, "missing");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw_field_error(context, key, "wrong type");
  }
}

template <typename T>
T optional_field(const Json& object, std::string_view key, T fallback,
                 std::string_view context) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw_field_error(context, key, "wrong type");
  }
}

}  // namespace extentlab

#endif  // EXTENTLAB_IO_HPP_
