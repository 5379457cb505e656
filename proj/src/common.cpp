#include "gsmlab/common.hpp"

#include <algorithm>
#include <cctype>

namespace gsmlab {

Bits bits_from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  if (nbits > bytes.size() * 8) {
    throw DomainError("bits_from_bytes: not enough input bytes");
  }
  Bits out(nbits);
  for (std::size_t i = 0; i < nbits; ++i) {
    out[i] = (bytes[i / 8] >> (i % 8)) & 1u;
  }
  return out;
}

Bits bits_from_bytes(std::span<const std::uint8_t> bytes) {
  return bits_from_bytes(bytes, bytes.size() * 8);
}

std::vector<std::uint8_t> bytes_from_bits(std::span<const Bit> bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    out[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1u) << (i % 8));
  }
  return out;
}

Bits bits_from_word(std::uint64_t value, std::size_t nbits) {
  if (nbits > 64) {
    throw DomainError("bits_from_word: more than 64 bits requested");
  }
  Bits out(nbits);
  for (std::size_t i = 0; i < nbits; ++i) {
    out[i] = (value >> i) & 1u;
  }
  return out;
}

std::uint64_t word_from_bits(std::span<const Bit> bits) {
  if (bits.size() > 64) {
    throw DomainError("word_from_bits: more than 64 bits");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    v |= static_cast<std::uint64_t>(bits[i] & 1u) << i;
  }
  return v;
}

std::string to_bitstring(std::span<const Bit> bits) {
  std::string s;
  s.reserve(bits.size());
  for (Bit b : bits) s.push_back(b ? '1' : '0');
  return s;
}

Bits from_bitstring(std::string_view text) {
  Bits out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw DomainError("bit string may only contain '0' and '1'");
    }
    out.push_back(c == '1' ? 1 : 0);
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xF]);
  }
  return s;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}
}  // namespace

std::vector<std::uint8_t> from_hex(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  if (text.size() % 2 != 0) {
    throw DomainError("hex string has odd length");
  }
  std::vector<std::uint8_t> out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(text[2 * i]);
    int lo = hex_value(text[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw DomainError("invalid hex digit");
    }
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

Block128 block_from_hex(std::string_view text) {
  auto bytes = from_hex(text);
  if (bytes.size() != 16) {
    throw DomainError("expected 32 hex digits for a 128-bit value");
  }
  Block128 out{};
  std::copy(bytes.begin(), bytes.end(), out.begin());
  return out;
}

}  // namespace gsmlab
