#include <bit>
#include <string>

#include "gsmlab/cipher.hpp"

namespace gsmlab::cipher {

void LfsrSpec::validate() const {
  if (length == 0 || length > 64) {
    throw SpecError("LFSR length must be in 1..64, got " + std::to_string(length));
  }
  if (feedback_taps.empty()) {
    throw SpecError("LFSR needs at least one feedback tap");
  }
  for (std::size_t i = 0; i < feedback_taps.size(); ++i) {
    if (feedback_taps[i] >= length) {
      throw SpecError("feedback tap " + std::to_string(feedback_taps[i]) +
                      " outside register of length " + std::to_string(length));
    }
    if (i > 0 && feedback_taps[i] <= feedback_taps[i - 1]) {
      throw SpecError("feedback taps must be strictly increasing");
    }
  }
  if (clock_bit >= length) {
    throw SpecError("clocking bit outside register");
  }
}

std::uint64_t LfsrSpec::mask() const {
  return length == 64 ? ~0ull : (1ull << length) - 1;
}

std::uint64_t LfsrSpec::tap_mask() const {
  std::uint64_t m = 0;
  for (unsigned t : feedback_taps) m |= 1ull << t;
  return m;
}

ClockResult lfsr_clock(std::uint64_t reg, const LfsrSpec& spec) {
  spec.validate();
  if ((reg & ~spec.mask()) != 0) {
    throw DomainError("register value wider than its declared length");
  }
  const Bit out = static_cast<Bit>((reg >> (spec.length - 1)) & 1u);
  const auto feedback = static_cast<std::uint64_t>(std::popcount(reg & spec.tap_mask()) & 1);
  return {((reg << 1) & spec.mask()) | feedback, out};
}

const std::array<LfsrSpec, 3>& a51_registers() {
  static const std::array<LfsrSpec, 3> regs{{
      {19, {13, 16, 17, 18}, 8},
      {22, {20, 21}, 10},
      {23, {7, 20, 21, 22}, 10},
  }};
  return regs;
}

const std::array<LfsrSpec, 4>& a52_registers() {
  // R4 has no single clocking bit; bits 3, 7 and 10 vote. 10 is recorded.
  static const std::array<LfsrSpec, 4> regs{{
      {19, {13, 16, 17, 18}, 8},
      {22, {20, 21}, 10},
      {23, {7, 20, 21, 22}, 10},
      {17, {11, 16}, 10},
  }};
  return regs;
}

std::string_view suite_name(CipherSuite suite) {
  switch (suite) {
    case CipherSuite::None: return "NONE";
    case CipherSuite::A5_1: return "A5_1";
    case CipherSuite::A5_2: return "A5_2";
    case CipherSuite::Strong: return "STRONG";
  }
  return "?";
}

std::optional<CipherSuite> parse_suite(std::string_view name) {
  for (auto s : {CipherSuite::None, CipherSuite::A5_1, CipherSuite::A5_2, CipherSuite::Strong}) {
    if (suite_name(s) == name) return s;
  }
  return std::nullopt;
}

Bits xor_crypt(std::span<const Bit> data, std::span<const Bit> ks) {
  if (data.size() > ks.size()) {
    throw DomainError("xor_crypt: data longer than keystream");
  }
  Bits out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = (data[i] ^ ks[i]) & 1u;
  return out;
}

Bits xor_crypt(std::span<const Bit> data, const KeystreamFrame& ks) {
  return xor_crypt(data, std::span<const Bit>(ks.bits));
}

}  // namespace gsmlab::cipher
