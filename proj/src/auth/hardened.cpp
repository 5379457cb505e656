#include <cstring>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include "gsmlab/auth.hpp"

namespace gsmlab::auth {

namespace {

using Digest = std::array<std::uint8_t, 32>;

Digest hmac_sha256(const Block128& key, std::span<const std::uint8_t> label,
                   std::span<const std::uint8_t> message) {
  std::vector<std::uint8_t> buf;
  buf.reserve(label.size() + message.size());
  buf.insert(buf.end(), label.begin(), label.end());
  buf.insert(buf.end(), message.begin(), message.end());

  Digest out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), buf.data(), buf.size(), out.data(),
           &len) == nullptr) {
    throw std::runtime_error("HMAC-SHA-256 failed");
  }
  return out;
}

std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace

HardenedOutput hardened_a3a8(const Block128& ki, const Block128& rand) {
  const Digest d = hmac_sha256(ki, as_bytes("gsmlab-a3a8"), rand);
  HardenedOutput out;
  for (int i = 0; i < 4; ++i) out.sres = out.sres << 8 | d[i];
  std::memcpy(out.kc.data(), d.data() + 4, out.kc.size());
  return out;
}

std::uint64_t mac_tag(const Block128& key, std::span<const std::uint8_t> message) {
  const Digest d = hmac_sha256(key, as_bytes("gsmlab-mac"), message);
  std::uint64_t tag = 0;
  for (int i = 0; i < 8; ++i) tag = tag << 8 | d[i];
  return tag;
}

bool mac_verify(const Block128& key, std::span<const std::uint8_t> message, std::uint64_t tag) {
  const std::uint64_t expected = mac_tag(key, message);
  return CRYPTO_memcmp(&expected, &tag, sizeof tag) == 0;
}

Block128 bind128(std::string_view label, const Block128& a, const Block128& b) {
  std::vector<std::uint8_t> buf(label.begin(), label.end());
  buf.insert(buf.end(), a.begin(), a.end());
  buf.insert(buf.end(), b.begin(), b.end());
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> d{};
  SHA256(buf.data(), buf.size(), d.data());
  Block128 out{};
  std::memcpy(out.data(), d.data(), out.size());
  return out;
}

std::string key_fingerprint(const Block128& ki) {
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> d{};
  SHA256(ki.data(), ki.size(), d.data());
  return to_hex(std::span(d).first(4));
}

}  // namespace gsmlab::auth
