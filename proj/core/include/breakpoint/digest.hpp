#pragma once

#include <string>
#include <string_view>

namespace breakpoint {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// "sha256:" prefixed digest, the form stored in snapshots and task files.
std::string content_digest(std::string_view data);

}  // namespace breakpoint
