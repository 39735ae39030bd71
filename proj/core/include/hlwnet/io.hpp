#pragma once

#include <string>

namespace hlwnet {

/// Writes `content` to `path` through a sibling temp file and rename, so a
/// reader never sees a partial file. Creates parent directories.
void write_file_atomic(const std::string& path, const std::string& content);

/// Whole file as a string; throws FormatError if unreadable.
std::string read_file(const std::string& path);

}  // namespace hlwnet
