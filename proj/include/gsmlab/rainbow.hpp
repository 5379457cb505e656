#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gsmlab/cipher.hpp"

namespace gsmlab::attack {

// Keys are kc values whose bits above keyspace_bits are zero. The chain
// function maps a key to the first keyspace_bits downlink keystream bits of
// `frame`; reduction j XORs a per-color constant and masks.
struct RainbowParams {
  unsigned keyspace_bits = 20;
  std::uint32_t chain_length = 256;
  std::uint32_t chain_count = 8192;
  std::uint32_t color_count = 256;
  std::uint64_t seed = 1;
  cipher::CipherSuite cipher = cipher::CipherSuite::A5_1;
  std::uint32_t frame = 0;

  // Throws SpecError on out-of-range values.
  void validate() const;
  std::uint32_t mask() const { return (1u << keyspace_bits) - 1; }
  bool operator==(const RainbowParams&) const = default;
  auto operator<=>(const RainbowParams&) const = default;
};

struct RainbowRow {
  std::uint32_t endpoint = 0;
  std::uint32_t start = 0;
  bool operator==(const RainbowRow&) const = default;
};

struct RainbowTable {
  RainbowParams params;
  std::vector<RainbowRow> rows;  // sorted by (endpoint, start)
  // Distinct keys visited while building; zero for a table read from disk
  // until recompute_coverage() runs.
  std::uint64_t distinct_keys = 0;

  double coverage() const {
    return static_cast<double>(distinct_keys) / static_cast<double>(1ull << params.keyspace_bits);
  }
};

// Chain function: key -> first keyspace_bits keystream bits of the frame,
// packed with bit 0 = first keystream bit.
std::uint32_t chain_prefix(const RainbowParams& p, std::uint32_t key);
std::uint32_t reduce(const RainbowParams& p, std::uint32_t prefix, std::uint32_t column);

// Chains are split across `threads` workers (0 = hardware concurrency).
RainbowTable tmto_build(const RainbowParams& params, unsigned threads = 0);
// Regenerates every chain to count distinct keys.
void recompute_coverage(RainbowTable& table);

// `prefix` holds keyspace_bits keystream bits of params.frame. `verify`
// holds keystream bits of the following frame (downlink half); candidates
// that do not reproduce them are discarded. An empty `verify` skips that
// check.
std::vector<std::uint64_t> tmto_lookup(const RainbowTable& table, std::span<const Bit> prefix,
                                       std::span<const Bit> verify);

// `GSMLAB-RT v1\n`, a params line, then 8-byte little-endian rows.
void write_table(std::ostream& out, const RainbowTable& table);
RainbowTable read_table(std::istream& in);
void save_table(const std::string& path, const RainbowTable& table);
RainbowTable load_table(const std::string& path);

std::string params_line(const RainbowParams& p);

}  // namespace gsmlab::attack
