#pragma once

#include <string>
#include <string_view>

namespace cobalt {

// Lowercase hex SHA-256 of the input bytes (OpenSSL EVP underneath).
std::string sha256_hex(std::string_view data);

}  // namespace cobalt
