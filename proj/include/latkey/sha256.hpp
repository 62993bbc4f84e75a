#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace latkey {

// Plain SHA-256, enough for the hashed instance-generation mode.
std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len);
std::array<std::uint8_t, 32> sha256(const std::vector<std::uint8_t>& data);

}  // namespace latkey
