#include <bit>
#include <memory>

#include <openssl/evp.h>

#include "gsmlab/cipher.hpp"

namespace gsmlab::cipher {

namespace {

constexpr std::uint32_t kR1Mask = 0x07FFFF;
constexpr std::uint32_t kR2Mask = 0x3FFFFF;
constexpr std::uint32_t kR3Mask = 0x7FFFFF;
constexpr std::uint32_t kR4Mask = 0x01FFFF;

constexpr std::uint32_t kR1Taps = 0x072000;  // 13, 16, 17, 18
constexpr std::uint32_t kR2Taps = 0x300000;  // 20, 21
constexpr std::uint32_t kR3Taps = 0x700080;  // 7, 20, 21, 22
constexpr std::uint32_t kR4Taps = 0x010800;  // 11, 16

inline std::uint32_t shift(std::uint32_t r, std::uint32_t mask, std::uint32_t taps) {
  return ((r << 1) & mask) | static_cast<std::uint32_t>(std::popcount(r & taps) & 1);
}

inline std::uint32_t bit(std::uint32_t r, unsigned i) { return (r >> i) & 1u; }

inline void check_frame(std::uint32_t frame) {
  if (frame >= kFrameLimit) {
    throw DomainError("frame number must be below 2^22");
  }
}

}  // namespace

A51State a51_load(std::uint64_t kc, std::uint32_t frame) {
  check_frame(frame);
  A51State s;
  auto feed = [&s](std::uint32_t b) {
    s.r1 = shift(s.r1, kR1Mask, kR1Taps) ^ b;
    s.r2 = shift(s.r2, kR2Mask, kR2Taps) ^ b;
    s.r3 = shift(s.r3, kR3Mask, kR3Taps) ^ b;
  };
  for (unsigned i = 0; i < 64; ++i) feed(static_cast<std::uint32_t>((kc >> i) & 1u));
  for (unsigned i = 0; i < 22; ++i) feed((frame >> i) & 1u);
  return s;
}

Bit a51_step(A51State& s) {
  const std::uint32_t m = majority(bit(s.r1, 8), bit(s.r2, 10), bit(s.r3, 10));
  if (bit(s.r1, 8) == m) s.r1 = shift(s.r1, kR1Mask, kR1Taps);
  if (bit(s.r2, 10) == m) s.r2 = shift(s.r2, kR2Mask, kR2Taps);
  if (bit(s.r3, 10) == m) s.r3 = shift(s.r3, kR3Mask, kR3Taps);
  return static_cast<Bit>(bit(s.r1, 18) ^ bit(s.r2, 21) ^ bit(s.r3, 22));
}

A51State a51_init(std::uint64_t kc, std::uint32_t frame) {
  A51State s = a51_load(kc, frame);
  for (int i = 0; i < 100; ++i) a51_step(s);
  return s;
}

KeystreamFrame a51_keystream(const A51State& state, std::uint32_t frame) {
  check_frame(frame);
  KeystreamFrame out;
  out.frame_number = frame;
  A51State s = state;
  for (auto& b : out.bits) b = a51_step(s);
  return out;
}

KeystreamFrame a51_keystream(std::uint64_t kc, std::uint32_t frame) {
  return a51_keystream(a51_init(kc, frame), frame);
}

A52State a52_load(std::uint64_t kc, std::uint32_t frame) {
  check_frame(frame);
  A52State s;
  auto feed = [&s](std::uint32_t b) {
    s.r1 = shift(s.r1, kR1Mask, kR1Taps) ^ b;
    s.r2 = shift(s.r2, kR2Mask, kR2Taps) ^ b;
    s.r3 = shift(s.r3, kR3Mask, kR3Taps) ^ b;
    s.r4 = shift(s.r4, kR4Mask, kR4Taps) ^ b;
  };
  for (unsigned i = 0; i < 64; ++i) feed(static_cast<std::uint32_t>((kc >> i) & 1u));
  for (unsigned i = 0; i < 22; ++i) feed((frame >> i) & 1u);
  return s;
}

Bit a52_step(A52State& s) {
  const std::uint32_t m = majority(bit(s.r4, 3), bit(s.r4, 7), bit(s.r4, 10));
  if (bit(s.r4, 10) == m) s.r1 = shift(s.r1, kR1Mask, kR1Taps);
  if (bit(s.r4, 3) == m) s.r2 = shift(s.r2, kR2Mask, kR2Taps);
  if (bit(s.r4, 7) == m) s.r3 = shift(s.r3, kR3Mask, kR3Taps);
  s.r4 = shift(s.r4, kR4Mask, kR4Taps);

  std::uint32_t out = bit(s.r1, 18) ^ bit(s.r2, 21) ^ bit(s.r3, 22);
  out ^= majority(bit(s.r1, 12), bit(s.r1, 14) ^ 1u, bit(s.r1, 15));
  out ^= majority(bit(s.r2, 9), bit(s.r2, 13), bit(s.r2, 16) ^ 1u);
  out ^= majority(bit(s.r3, 13), bit(s.r3, 16) ^ 1u, bit(s.r3, 18));
  return static_cast<Bit>(out);
}

A52State a52_prepare(A52State s) {
  s.r1 |= 1u << 15;
  s.r2 |= 1u << 16;
  s.r3 |= 1u << 18;
  s.r4 |= 1u << 10;
  for (int i = 0; i < 99; ++i) a52_step(s);
  return s;
}

KeystreamFrame a52_keystream(std::uint64_t kc, std::uint32_t frame) {
  A52State s = a52_prepare(a52_load(kc, frame));
  KeystreamFrame out;
  out.frame_number = frame;
  for (auto& b : out.bits) b = a52_step(s);
  return out;
}

KeystreamFrame strong_keystream(const Block128& key, std::uint32_t frame) {
  check_frame(frame);
  std::array<std::uint8_t, 16> iv{};
  iv[0] = 'G';
  iv[1] = 'S';
  iv[2] = 'M';
  iv[8] = static_cast<std::uint8_t>(frame >> 24);
  iv[9] = static_cast<std::uint8_t>(frame >> 16);
  iv[10] = static_cast<std::uint8_t>(frame >> 8);
  iv[11] = static_cast<std::uint8_t>(frame);

  std::array<std::uint8_t, 32> zeros{};
  std::array<std::uint8_t, 32> stream{};
  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(),
                                                                      &EVP_CIPHER_CTX_free);
  int len = 0;
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ctr(), nullptr, key.data(), iv.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), stream.data(), &len, zeros.data(), static_cast<int>(zeros.size())) != 1) {
    throw std::runtime_error("AES-CTR keystream generation failed");
  }

  KeystreamFrame out;
  out.frame_number = frame;
  for (std::size_t i = 0; i < kFrameBits; ++i) out.bits[i] = (stream[i / 8] >> (i % 8)) & 1u;
  return out;
}

}  // namespace gsmlab::cipher
