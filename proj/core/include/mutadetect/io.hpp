#pragma once

#include <string>

namespace mutadetect {

// Writes to a sibling temp file and renames over the target, so readers
// never observe a partial file and reruns replace outputs atomically.
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

void ensure_directory(const std::string& path);

}  // namespace mutadetect
