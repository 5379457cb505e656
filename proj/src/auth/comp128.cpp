#include <algorithm>
#include <bit>
#include <cctype>

#include "gsmlab/auth.hpp"

namespace gsmlab::auth {

Imsi::Imsi(std::string digits) : digits_(std::move(digits)) {
  if (digits_.size() != 15 ||
      !std::all_of(digits_.begin(), digits_.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw DomainError("IMSI must be exactly 15 decimal digits: '" + digits_ + "'");
  }
}

std::string_view auth_suite_name(AuthSuite suite) {
  return suite == AuthSuite::MiniComp128 ? "MINI_COMP128" : "HARDENED";
}

SboxPair gen_sboxes() {
  SboxPair sb;
  std::uint64_t s = 0x9E3779B97F4A7C15ull;
  auto next = [&s] {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  };
  for (auto& e : sb.s0) e = static_cast<std::uint8_t>(((next() >> 32) & 0xFF) % 128);
  for (auto& e : sb.s1) e = static_cast<std::uint8_t>(((next() >> 32) & 0x7F) % 64);
  return sb;
}

const SboxPair& sboxes() {
  static const SboxPair sb = gen_sboxes();
  return sb;
}

PipeOutput pair_compress(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d,
                         const SboxPair& sb) {
  const unsigned t1 = sb.s0[(a + 2u * c) % 256];
  const unsigned t2 = sb.s0[(b + 2u * d) % 256];
  return {sb.s1[(t1 + 2 * t2) % 128], sb.s1[(t2 + 2 * t1) % 128]};
}

// Layout of the 96-bit output, most significant first: the first pass places
// (u_i || v_i) in 12-bit slot i. The second pass substitutes each (u, v)
// again through s1 with the pair index as offset, and XORs the 12-bit result
// into all three 32-bit words at pair- and word-dependent rotations.
Output96 pair_contribution(unsigned index, PipeOutput pipe, const SboxPair& sb) {
  const unsigned u = pipe.u, v = pipe.v;
  const std::uint32_t w = (u << 6) | v;
  const std::uint32_t u2 = sb.s1[(u + 2 * v + index) % 128];
  const std::uint32_t v2 = sb.s1[(v + 2 * u + index) % 128];
  const std::uint32_t x = (u2 << 6) | v2;

  std::array<std::uint32_t, 3> words{};
  for (unsigned k = 0; k < 3; ++k) words[k] = std::rotl(x, static_cast<int>((5 * index + 11 * k) % 32));

  // slot i occupies bits [84 - 12i, 96 - 12i) counted from the least
  // significant end
  const unsigned lsb = 84 - 12 * index;
  for (unsigned k = 0; k < 12; ++k) {
    const unsigned pos = lsb + k;
    words[2 - pos / 32] ^= ((w >> k) & 1u) << (pos % 32);
  }

  Output96 out{};
  for (unsigned k = 0; k < 3; ++k) {
    for (unsigned j = 0; j < 4; ++j) out[4 * k + j] = static_cast<std::uint8_t>(words[k] >> (24 - 8 * j));
  }
  return out;
}

MiniOutput mini_comp128(const Block128& ki, const Block128& rand) {
  const auto& sb = sboxes();
  Output96 acc{};
  for (unsigned i = 0; i < 8; ++i) {
    const auto part = pair_contribution(i, pair_compress(ki[i], ki[i + 8], rand[i], rand[i + 8], sb), sb);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] ^= part[j];
  }
  MiniOutput out;
  for (int j = 0; j < 4; ++j) out.sres = out.sres << 8 | acc[j];
  for (int j = 4; j < 12; ++j) out.kc = out.kc << 8 | acc[j];
  return out;
}

Output96 to_output96(const MiniOutput& out) {
  Output96 b{};
  for (int j = 0; j < 4; ++j) b[j] = static_cast<std::uint8_t>(out.sres >> (24 - 8 * j));
  for (int j = 0; j < 8; ++j) b[4 + j] = static_cast<std::uint8_t>(out.kc >> (56 - 8 * j));
  return b;
}

AuthTriplet gen_triplet(const SimProfile& profile, AuthSuite suite, Rng& rng) {
  AuthTriplet t;
  t.suite = suite;
  t.rand = rng.block128();
  if (suite == AuthSuite::MiniComp128) {
    const auto r = mini_comp128(profile.ki, t.rand);
    t.sres = r.sres;
    t.kc = r.kc;
  } else {
    const auto r = hardened_a3a8(profile.ki, t.rand);
    t.sres = r.sres;
    t.kc_strong = r.kc;
  }
  return t;
}

bool verify_triplet(const SimProfile& profile, const AuthTriplet& t) {
  if (t.suite == AuthSuite::MiniComp128) {
    const auto r = mini_comp128(profile.ki, t.rand);
    return r.sres == t.sres && r.kc == t.kc;
  }
  const auto r = hardened_a3a8(profile.ki, t.rand);
  return r.sres == t.sres && r.kc == t.kc_strong;
}

}  // namespace gsmlab::auth
