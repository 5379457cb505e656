#include "gsmlab/rainbow.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "gsmlab/rng.hpp"

namespace gsmlab::attack {

namespace {

constexpr std::string_view kMagic = "GSMLAB-RT v1";

// The register load is linear in the key, so a reduced key's loaded state is
// the XOR of per-bit basis states plus the frame's contribution.
class ChainFn {
 public:
  explicit ChainFn(const RainbowParams& p) : p_(p) {
    using namespace cipher;
    if (p.cipher == CipherSuite::A5_1) {
      const auto f = a51_load(0, p.frame);
      base_ = {f.r1, f.r2, f.r3, 0};
      for (unsigned i = 0; i < p.keyspace_bits; ++i) {
        const auto s = a51_load(1ull << i, 0);
        basis_.push_back({s.r1, s.r2, s.r3, 0});
      }
    } else {
      const auto f = a52_load(0, p.frame);
      base_ = {f.r1, f.r2, f.r3, f.r4};
      for (unsigned i = 0; i < p.keyspace_bits; ++i) {
        const auto s = a52_load(1ull << i, 0);
        basis_.push_back({s.r1, s.r2, s.r3, s.r4});
      }
    }
  }

  std::uint32_t operator()(std::uint32_t key) const {
    auto st = base_;
    for (unsigned i = 0; key; ++i, key >>= 1) {
      if (key & 1) {
        for (int r = 0; r < 4; ++r) st[r] ^= basis_[i][r];
      }
    }
    std::uint32_t out = 0;
    if (p_.cipher == cipher::CipherSuite::A5_1) {
      cipher::A51State s{st[0], st[1], st[2]};
      for (int i = 0; i < 100; ++i) cipher::a51_step(s);
      for (unsigned i = 0; i < p_.keyspace_bits; ++i) out |= static_cast<std::uint32_t>(cipher::a51_step(s)) << i;
    } else {
      auto s = cipher::a52_prepare(cipher::A52State{st[0], st[1], st[2], st[3]});
      for (unsigned i = 0; i < p_.keyspace_bits; ++i) out |= static_cast<std::uint32_t>(cipher::a52_step(s)) << i;
    }
    return out;
  }

 private:
  RainbowParams p_;
  std::array<std::uint32_t, 4> base_{};
  std::vector<std::array<std::uint32_t, 4>> basis_;
};

std::uint32_t color(const RainbowParams& p, std::uint32_t column) {
  const std::uint64_t c = column % p.color_count;
  return static_cast<std::uint32_t>(((c + 1) * 0x9E3779B97F4A7C15ull) >> 40) & p.mask();
}

std::vector<std::uint32_t> start_points(const RainbowParams& p) {
  // Distinct starts by partial Fisher-Yates over the keyspace.
  const std::uint32_t n = 1u << p.keyspace_bits;
  std::vector<std::uint32_t> pool(n);
  for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
  Rng rng(p.seed);
  for (std::uint32_t i = 0; i < p.chain_count; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(p.chain_count);
  return pool;
}

std::uint64_t pack_bits(std::span<const Bit> bits, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bits[i] & 1u) << i;
  return v;
}

void build_range(const RainbowParams& p, const ChainFn& f, const std::vector<std::uint32_t>& starts,
                 std::size_t lo, std::size_t hi, std::vector<RainbowRow>& rows, std::vector<bool>& seen) {
  for (std::size_t c = lo; c < hi; ++c) {
    std::uint32_t k = starts[c];
    for (std::uint32_t j = 0; j < p.chain_length; ++j) {
      seen[k] = true;
      k = reduce(p, f(k), j);
    }
    rows[c] = {k, starts[c]};
  }
}

}  // namespace

void RainbowParams::validate() const {
  if (keyspace_bits < 1 || keyspace_bits > 24) throw SpecError("keyspace_bits must be in [1, 24]");
  if (chain_length < 1) throw SpecError("chain_length must be positive");
  if (color_count < 1) throw SpecError("color_count must be positive");
  if (chain_count > (1u << keyspace_bits)) throw SpecError("chain_count exceeds the keyspace");
  if (cipher != cipher::CipherSuite::A5_1 && cipher != cipher::CipherSuite::A5_2) {
    throw SpecError("tables are built for A5_1 or A5_2 only");
  }
  if (frame + 1 >= cipher::kFrameLimit) throw SpecError("frame out of range");
}

std::uint32_t chain_prefix(const RainbowParams& p, std::uint32_t key) { return ChainFn(p)(key & p.mask()); }

std::uint32_t reduce(const RainbowParams& p, std::uint32_t prefix, std::uint32_t column) {
  return (prefix ^ color(p, column)) & p.mask();
}

RainbowTable tmto_build(const RainbowParams& params, unsigned threads) {
  params.validate();
  RainbowTable t;
  t.params = params;
  if (params.chain_count == 0) return t;

  const ChainFn f(params);
  const auto starts = start_points(params);
  t.rows.resize(params.chain_count);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, params.chain_count);
  std::vector<std::vector<bool>> seen(threads, std::vector<bool>(1u << params.keyspace_bits));
  std::vector<std::thread> pool;
  const std::size_t per = (params.chain_count + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t lo = w * per, hi = std::min<std::size_t>(params.chain_count, lo + per);
    if (lo >= hi) break;
    pool.emplace_back(build_range, std::cref(params), std::cref(f), std::cref(starts), lo, hi, std::ref(t.rows),
                      std::ref(seen[w]));
  }
  for (auto& th : pool) th.join();

  for (std::size_t k = 0; k < seen[0].size(); ++k) {
    bool any = false;
    for (const auto& s : seen) any = any || s[k];
    t.distinct_keys += any;
  }
  std::sort(t.rows.begin(), t.rows.end(),
            [](const RainbowRow& a, const RainbowRow& b) { return std::tie(a.endpoint, a.start) < std::tie(b.endpoint, b.start); });
  return t;
}

void recompute_coverage(RainbowTable& table) {
  const auto& p = table.params;
  const ChainFn f(p);
  std::vector<bool> seen(1u << p.keyspace_bits);
  for (const auto& row : table.rows) {
    std::uint32_t k = row.start;
    for (std::uint32_t j = 0; j < p.chain_length; ++j) {
      seen[k] = true;
      k = reduce(p, f(k), j);
    }
  }
  table.distinct_keys = static_cast<std::uint64_t>(std::count(seen.begin(), seen.end(), true));
}

std::vector<std::uint64_t> tmto_lookup(const RainbowTable& table, std::span<const Bit> prefix,
                                       std::span<const Bit> verify) {
  const auto& p = table.params;
  if (prefix.size() < p.keyspace_bits) throw DomainError("keystream prefix shorter than keyspace_bits");
  if (table.rows.empty()) return {};
  const ChainFn f(p);
  const auto target = static_cast<std::uint32_t>(pack_bits(prefix, p.keyspace_bits));

  auto verified = [&](std::uint32_t key) {
    if (verify.empty()) return true;
    if (verify.size() > cipher::kHalfBits) return false;
    const auto ks = p.cipher == cipher::CipherSuite::A5_1 ? cipher::a51_keystream(key, p.frame + 1)
                                                          : cipher::a52_keystream(key, p.frame + 1);
    return std::equal(verify.begin(), verify.end(), ks.bits.begin());
  };

  std::vector<std::uint64_t> found;
  for (std::uint32_t pos = p.chain_length; pos-- > 0;) {
    // Assume the prefix was produced at column `pos` and walk to the end.
    std::uint32_t k = reduce(p, target, pos);
    for (std::uint32_t j = pos + 1; j < p.chain_length; ++j) k = reduce(p, f(k), j);

    auto range = std::equal_range(table.rows.begin(), table.rows.end(), RainbowRow{k, 0},
                                  [](const RainbowRow& a, const RainbowRow& b) { return a.endpoint < b.endpoint; });
    for (auto it = range.first; it != range.second; ++it) {
      std::uint32_t cand = it->start;
      for (std::uint32_t j = 0; j < pos; ++j) cand = reduce(p, f(cand), j);
      if (f(cand) != target) continue;  // false alarm from a merge
      if (verified(cand) && std::find(found.begin(), found.end(), cand) == found.end()) found.push_back(cand);
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

std::string params_line(const RainbowParams& p) {
  std::ostringstream os;
  os << "keyspace_bits=" << p.keyspace_bits << " chain_length=" << p.chain_length << " chain_count=" << p.chain_count
     << " color_count=" << p.color_count << " cipher=" << cipher::suite_name(p.cipher) << " seed=" << p.seed
     << " frame=" << p.frame;
  return os.str();
}

void write_table(std::ostream& out, const RainbowTable& table) {
  out << kMagic << '\n' << params_line(table.params) << '\n';
  for (const auto& r : table.rows) {
    std::array<char, 8> b{};
    for (int i = 0; i < 4; ++i) {
      b[i] = static_cast<char>(r.endpoint >> (8 * i));
      b[4 + i] = static_cast<char>(r.start >> (8 * i));
    }
    out.write(b.data(), b.size());
  }
}

RainbowTable read_table(std::istream& in) {
  std::string magic, line;
  if (!std::getline(in, magic) || magic != kMagic) throw SpecError("not a GSMLAB-RT v1 table");
  if (!std::getline(in, line)) throw SpecError("missing table params line");

  std::map<std::string, std::string> kv;
  std::istringstream ls(line);
  std::string tok;
  while (ls >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw SpecError("malformed params token: " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto num = [&](const char* key) -> std::uint64_t {
    auto it = kv.find(key);
    if (it == kv.end()) throw SpecError(std::string("missing table param ") + key);
    try {
      std::size_t used = 0;
      const auto v = std::stoull(it->second, &used);
      if (used != it->second.size()) throw SpecError("");
      return v;
    } catch (const std::exception&) {
      throw SpecError(std::string("bad value for table param ") + key);
    }
  };

  RainbowTable t;
  auto& p = t.params;
  p.keyspace_bits = static_cast<unsigned>(num("keyspace_bits"));
  p.chain_length = static_cast<std::uint32_t>(num("chain_length"));
  p.chain_count = static_cast<std::uint32_t>(num("chain_count"));
  p.color_count = static_cast<std::uint32_t>(num("color_count"));
  p.seed = num("seed");
  p.frame = static_cast<std::uint32_t>(num("frame"));
  auto cipher_name = kv.find("cipher");
  if (cipher_name == kv.end()) throw SpecError("missing table param cipher");
  auto suite = cipher::parse_suite(cipher_name->second);
  if (!suite) throw SpecError("bad table cipher " + cipher_name->second);
  p.cipher = *suite;
  if (kv.size() != 7) throw SpecError("unexpected table params");
  p.validate();

  t.rows.resize(p.chain_count);
  for (auto& r : t.rows) {
    std::array<unsigned char, 8> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) throw SpecError("truncated table");
    for (int i = 0; i < 4; ++i) {
      r.endpoint |= static_cast<std::uint32_t>(b[i]) << (8 * i);
      r.start |= static_cast<std::uint32_t>(b[4 + i]) << (8 * i);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw SpecError("trailing bytes after table rows");
  if (!std::is_sorted(t.rows.begin(), t.rows.end(), [](const RainbowRow& a, const RainbowRow& b) {
        return std::tie(a.endpoint, a.start) < std::tie(b.endpoint, b.start);
      })) {
    throw SpecError("table rows are not sorted");
  }
  return t;
}

void save_table(const std::string& path, const RainbowTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_table(out, table);
}

RainbowTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_table(in);
}

}  // namespace gsmlab::attack
