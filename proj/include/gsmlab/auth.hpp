#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gsmlab/common.hpp"
#include "gsmlab/rng.hpp"

namespace gsmlab::auth {

// 15 decimal digits.
class Imsi {
 public:
  Imsi() = default;
  explicit Imsi(std::string digits);

  const std::string& str() const { return digits_; }
  bool operator==(const Imsi&) const = default;
  auto operator<=>(const Imsi&) const = default;

 private:
  std::string digits_ = "000000000000000";
};

struct SimProfile {
  Imsi imsi;
  Block128 ki{};
  std::optional<std::uint32_t> tmsi;
};

enum class AuthSuite : std::uint8_t { MiniComp128, Hardened };

std::string_view auth_suite_name(AuthSuite suite);

struct AuthTriplet {
  AuthSuite suite = AuthSuite::MiniComp128;
  Block128 rand{};
  std::uint32_t sres = 0;
  std::uint64_t kc = 0;         // legacy session key
  Block128 kc_strong{};         // hardened session key, zero for legacy
};

// Stand-in tables for the unpublished COMP128 substitution boxes.
struct SboxPair {
  std::array<std::uint8_t, 256> s0{};  // entries < 128
  std::array<std::uint8_t, 128> s1{};  // entries < 64
};

SboxPair gen_sboxes();
// Process-wide copy of gen_sboxes().
const SboxPair& sboxes();

struct PipeOutput {
  std::uint8_t u;
  std::uint8_t v;
  bool operator==(const PipeOutput&) const = default;
};

// (a, b) are the key bytes of a pair, (c, d) the challenge bytes. Everything
// reaches (u, v) through the 14-bit (t1, t2) intermediate.
PipeOutput pair_compress(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d,
                         const SboxPair& sb = sboxes());

struct MiniOutput {
  std::uint32_t sres = 0;
  std::uint64_t kc = 0;
  bool operator==(const MiniOutput&) const = default;
};

// 96-bit output as 12 big-endian bytes: sres then kc.
using Output96 = std::array<std::uint8_t, 12>;

// The contribution of pair `index` to the 96-bit output. mini_comp128 is the
// XOR of the eight contributions, so the output depends on pair i only
// through its pipe values.
Output96 pair_contribution(unsigned index, PipeOutput pipe, const SboxPair& sb = sboxes());

MiniOutput mini_comp128(const Block128& ki, const Block128& rand);
Output96 to_output96(const MiniOutput& out);

struct HardenedOutput {
  std::uint32_t sres = 0;
  Block128 kc{};
  bool operator==(const HardenedOutput&) const = default;
};

// HMAC-SHA-256 keyed by Ki.
HardenedOutput hardened_a3a8(const Block128& ki, const Block128& rand);

AuthTriplet gen_triplet(const SimProfile& profile, AuthSuite suite, Rng& rng);
// Recomputes the triplet from Ki; true iff it matches.
bool verify_triplet(const SimProfile& profile, const AuthTriplet& triplet);

// HMAC-SHA-256 truncated to 64 bits.
std::uint64_t mac_tag(const Block128& key, std::span<const std::uint8_t> message);
bool mac_verify(const Block128& key, std::span<const std::uint8_t> message, std::uint64_t tag);

// Domain-separated 128-bit digest of (label, a, b); used to bind challenges
// to nonces in the hardened exchange.
Block128 bind128(std::string_view label, const Block128& a, const Block128& b);

// Short non-reversible identifier for reports: first 4 bytes of SHA-256(ki).
std::string key_fingerprint(const Block128& ki);

}  // namespace gsmlab::auth
