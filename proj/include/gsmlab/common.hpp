#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsmlab {

// One bit per element, values 0 or 1. Element 0 is transmitted first.
using Bit = std::uint8_t;
using Bits = std::vector<Bit>;

// 128-bit quantities (Ki, RAND, nonces, strong session keys), byte 0 first.
using Block128 = std::array<std::uint8_t, 16>;

// Raised when a structural parameter (LFSR layout, table header) is malformed.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an argument lies outside the operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Bit i of the result is (bytes[i / 8] >> (i % 8)) & 1.
Bits bits_from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits);
Bits bits_from_bytes(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bytes_from_bits(std::span<const Bit> bits);

// Bit i of the result is (value >> i) & 1.
Bits bits_from_word(std::uint64_t value, std::size_t nbits);
std::uint64_t word_from_bits(std::span<const Bit> bits);

std::string to_bitstring(std::span<const Bit> bits);
Bits from_bitstring(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view text);
Block128 block_from_hex(std::string_view text);

}  // namespace gsmlab
