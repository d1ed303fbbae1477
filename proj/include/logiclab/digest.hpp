#pragma once

#include <string>
#include <string_view>

namespace logiclab {

// SHA-256 hex digest of a byte string / file.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

}  // namespace logiclab
