#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gsmlab/common.hpp"

namespace gsmlab::cipher {

inline constexpr std::size_t kFrameBits = 228;  // 114 downlink + 114 uplink
inline constexpr std::size_t kHalfBits = 114;
inline constexpr std::uint32_t kFrameLimit = 1u << 22;

// Register layout: bit 0 is the cell that receives the feedback, bit
// (length - 1) is the cell shifted out.
struct LfsrSpec {
  unsigned length = 0;
  std::vector<unsigned> feedback_taps;
  unsigned clock_bit = 0;

  // Throws SpecError when the layout is malformed.
  void validate() const;
  std::uint64_t mask() const;
  std::uint64_t tap_mask() const;
};

struct ClockResult {
  std::uint64_t reg;
  Bit out;
};

// Shifts left by one; the parity of the tap cells enters at bit 0 and the old
// most-significant cell is returned.
ClockResult lfsr_clock(std::uint64_t reg, const LfsrSpec& spec);

constexpr Bit majority(Bit a, Bit b, Bit c) {
  return static_cast<Bit>((a & b) | (a & c) | (b & c));
}

// 19/22/23-bit registers with clocking bits 8/10/10.
const std::array<LfsrSpec, 3>& a51_registers();
// The same three plus the 17-bit clock-control register.
const std::array<LfsrSpec, 4>& a52_registers();

struct A51State {
  std::uint32_t r1 = 0;
  std::uint32_t r2 = 0;
  std::uint32_t r3 = 0;

  bool operator==(const A51State&) const = default;
};

struct A52State {
  std::uint32_t r1 = 0;
  std::uint32_t r2 = 0;
  std::uint32_t r3 = 0;
  std::uint32_t r4 = 0;

  bool operator==(const A52State&) const = default;
};

struct KeystreamFrame {
  std::uint32_t frame_number = 0;
  std::array<Bit, kFrameBits> bits{};

  std::span<const Bit> downlink() const { return std::span(bits).first(kHalfBits); }
  std::span<const Bit> uplink() const { return std::span(bits).subspan(kHalfBits); }
};

enum class CipherSuite : std::uint8_t { None, A5_1, A5_2, Strong };

std::string_view suite_name(CipherSuite suite);
std::optional<CipherSuite> parse_suite(std::string_view name);

// Key bit i ((kc >> i) & 1) is clocked in at step i, then frame bit j.
// Stops after the regular load, before any majority clocking. The result is
// linear in (kc, frame).
A51State a51_load(std::uint64_t kc, std::uint32_t frame);
// Full key setup: load followed by 100 majority-clocked mixing steps.
A51State a51_init(std::uint64_t kc, std::uint32_t frame);
// One majority step followed by the output bit (XOR of the three MSBs).
Bit a51_step(A51State& state);
// 228 bits from an initialized state. The frame number is only a label.
KeystreamFrame a51_keystream(const A51State& state, std::uint32_t frame);
KeystreamFrame a51_keystream(std::uint64_t kc, std::uint32_t frame);

A52State a52_load(std::uint64_t kc, std::uint32_t frame);
// Forces the four fixed bits and runs the 99 mixing steps.
A52State a52_prepare(A52State loaded);
Bit a52_step(A52State& state);
KeystreamFrame a52_keystream(std::uint64_t kc, std::uint32_t frame);

// AES-128 in counter mode keyed by `key`, counter block seeded by the frame.
KeystreamFrame strong_keystream(const Block128& key, std::uint32_t frame);

// XOR with the keystream prefix. data.size() must not exceed ks.size().
Bits xor_crypt(std::span<const Bit> data, std::span<const Bit> ks);
Bits xor_crypt(std::span<const Bit> data, const KeystreamFrame& ks);

}  // namespace gsmlab::cipher
