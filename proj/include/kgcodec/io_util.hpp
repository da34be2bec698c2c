#pragma once

#include <string>

namespace kgcodec {

std::string read_text_file(const std::string& path);   // throws IoError
void write_text_file(const std::string& path, const std::string& content);

std::string now_iso8601_utc();

}  // namespace kgcodec
