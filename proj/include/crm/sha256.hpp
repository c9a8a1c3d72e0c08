#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace crm {

// FIPS 180-4 SHA-256, used for content addressing (images, prompts, cache keys).
std::string sha256_hex(std::span<const unsigned char> data);
std::string sha256_hex(const std::string& data);

}  // namespace crm
