// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unordered_map>

#include <unistd.h>

#include "gsmlab/attacks.hpp"
#include "gsmlab/entities.hpp"
#include "gsmlab/lab.hpp"

using namespace gsmlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s criterion %d (%s): %s; %.2fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", n, title, o.detail.c_str(),
              secs, limit_s, in_time ? "" : " TOO SLOW");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- criterion 1 ----

Outcome cipher_algebra() {
  constexpr int kCases = 10000;
  Rng rng(0xA1);
  int bad = 0;
  const auto& regs = cipher::a52_registers();
  for (int i = 0; i < kCases; ++i) {
    const std::uint64_t kc = rng.next();
    const auto frame = static_cast<std::uint32_t>(rng.below(cipher::kFrameLimit));
    const auto ks = cipher::a51_keystream(kc, frame);

    Bits data(1 + rng.below(cipher::kFrameBits));
    for (auto& b : data) b = static_cast<Bit>(rng.below(2));
    if (cipher::xor_crypt(cipher::xor_crypt(data, ks), ks) != data) ++bad;

    const Bits zero(data.size(), 0);
    if (cipher::xor_crypt(zero, ks) != Bits(ks.bits.begin(), ks.bits.begin() + static_cast<std::ptrdiff_t>(data.size())))
      ++bad;
    if (cipher::xor_crypt(data, Bits(cipher::kFrameBits, 0)) != data) ++bad;

    const std::uint64_t k2 = rng.next();
    const auto f2 = static_cast<std::uint32_t>(rng.below(cipher::kFrameLimit));
    const auto a = cipher::a51_load(kc, frame), b = cipher::a51_load(k2, f2), c = cipher::a51_load(kc ^ k2, frame ^ f2);
    if (c.r1 != (a.r1 ^ b.r1) || c.r2 != (a.r2 ^ b.r2) || c.r3 != (a.r3 ^ b.r3)) ++bad;

    const auto& spec = regs[i % 4];
    const std::uint64_t x = rng.next() & spec.mask(), y = rng.next() & spec.mask();
    const auto cx = cipher::lfsr_clock(x, spec), cy = cipher::lfsr_clock(y, spec), cxy = cipher::lfsr_clock(x ^ y, spec);
    if (cxy.reg != (cx.reg ^ cy.reg) || cxy.out != (cx.out ^ cy.out)) ++bad;
    if (cipher::lfsr_clock(0, spec).reg != 0) ++bad;

    if (cipher::a51_keystream(kc, frame).bits != ks.bits) ++bad;
    if (i % 10 == 0 && cipher::a52_keystream(kc, frame).bits != cipher::a52_keystream(kc, frame).bits) ++bad;
  }
  const bool zero_stream =
      std::ranges::all_of(cipher::a51_keystream(0, 0).bits, [](Bit b) { return b == 0; }) && cipher::a51_init(0, 0) == cipher::A51State{};
  return {bad == 0 && zero_stream, fmt("%d cases, %d violations, zero key/frame stream all-zero=%s", kCases, bad,
                                       zero_stream ? "yes" : "no")};
}

// ---- criterion 2: independent A5/1 ----

struct RefA51 {
  // Textbook word layout: taps as masks, output from the top cells.
  static constexpr std::uint32_t M1 = 0x07FFFF, M2 = 0x3FFFFF, M3 = 0x7FFFFF;
  static constexpr std::uint32_t T1 = 0x072000, T2 = 0x300000, T3 = 0x700080;
  static constexpr std::uint32_t C1 = 1u << 8, C2 = 1u << 10, C3 = 1u << 10;
  std::uint32_t r1 = 0, r2 = 0, r3 = 0;

  static std::uint32_t parity(std::uint32_t x) { return static_cast<std::uint32_t>(__builtin_parity(x)); }
  static std::uint32_t shift(std::uint32_t r, std::uint32_t mask, std::uint32_t taps) {
    return ((r << 1) & mask) | parity(r & taps);
  }
  void clock_all() {
    r1 = shift(r1, M1, T1);
    r2 = shift(r2, M2, T2);
    r3 = shift(r3, M3, T3);
  }
  void clock_maj() {
    const int s = ((r1 & C1) != 0) + ((r2 & C2) != 0) + ((r3 & C3) != 0);
    const bool maj = s >= 2;
    if (((r1 & C1) != 0) == maj) r1 = shift(r1, M1, T1);
    if (((r2 & C2) != 0) == maj) r2 = shift(r2, M2, T2);
    if (((r3 & C3) != 0) == maj) r3 = shift(r3, M3, T3);
  }
  std::uint32_t out() const { return ((r1 >> 18) ^ (r2 >> 21) ^ (r3 >> 22)) & 1u; }

  RefA51(std::uint64_t kc, std::uint32_t frame) {
    for (int i = 0; i < 64; ++i) {
      clock_all();
      const auto b = static_cast<std::uint32_t>((kc >> i) & 1u);
      r1 ^= b, r2 ^= b, r3 ^= b;
    }
    for (int i = 0; i < 22; ++i) {
      clock_all();
      const auto b = (frame >> i) & 1u;
      r1 ^= b, r2 ^= b, r3 ^= b;
    }
    for (int i = 0; i < 100; ++i) clock_maj();
  }
  std::uint64_t bits(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      clock_maj();
      v |= static_cast<std::uint64_t>(out()) << i;
    }
    return v;
  }
};

Outcome brute_force() {
  // Circulated vector: downlink starts 534EAA58 (MSB-first bytes).
  RefA51 ref(0xEFCDAB8967452312ull, 0x134);
  const std::uint64_t first32 = ref.bits(32);
  std::uint32_t packed = 0;
  for (int i = 0; i < 32; ++i) packed |= static_cast<std::uint32_t>((first32 >> i) & 1u) << (31 - i);
  if (packed != 0x534EAA58u) return {false, fmt("reference model disagrees with the published vector (%08x)", packed)};

  constexpr std::uint32_t kFrame = 0x2A5;
  constexpr int kTrials = 100;
  Rng rng(0xB2);
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> want;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> planted;
  for (int i = 0; i < kTrials; ++i) {
    const auto key = static_cast<std::uint32_t>(rng.below(1u << 20));
    const auto ks = cipher::a51_keystream(key, kFrame);
    const auto prefix = word_from_bits(ks.downlink().first(40));
    planted.emplace_back(key, prefix);
    want[prefix];
  }
  // One exhaustive pass over 2^20 keys serves all targets.
  for (std::uint32_t k = 0; k < (1u << 20); ++k) {
    RefA51 r(k, kFrame);
    const auto it = want.find(r.bits(40));
    if (it != want.end()) it->second.push_back(k);
  }
  int exact = 0;
  for (const auto& [key, prefix] : planted) {
    const auto& found = want.at(prefix);
    if (found.size() == 1 && found[0] == key) ++exact;
  }
  return {exact >= 99, fmt("%d/%d planted 20-bit keys recovered uniquely (need >= 99)", exact, kTrials)};
}

// ---- criterion 3 ----

Outcome tmto_law() {
  attack::RainbowParams p;  // 20 bits, 256 x 8192, 256 colors
  const auto table = attack::tmto_build(p);
  auto recount = table;
  attack::recompute_coverage(recount);
  const double c = table.coverage();
  const double estimate = 1.0 - std::exp(-static_cast<double>(p.chain_length) * p.chain_count / (1u << 20));

  Rng rng(0xC3);
  constexpr int kTrials = 200;
  int hits = 0;
  for (int i = 0; i < kTrials; ++i) {
    const auto key = rng.below(1u << 20);
    const auto k0 = cipher::a51_keystream(key, p.frame), k1 = cipher::a51_keystream(key, p.frame + 1);
    const auto found = attack::tmto_lookup(table, k0.downlink().first(20), k1.downlink().first(64));
    if (std::find(found.begin(), found.end(), key) != found.end()) ++hits;
  }
  const double rate = static_cast<double>(hits) / kTrials;
  const bool ok = std::abs(rate - c) <= 0.08 && recount.distinct_keys == table.distinct_keys;
  return {ok, fmt("coverage %.4f (recount %s, 1-exp(-mt/N) estimate %.4f), success %d/%d = %.4f, |diff| %.4f <= 0.08",
                  c, recount.distinct_keys == table.distinct_keys ? "agrees" : "DISAGREES", estimate, hits, kTrials,
                  rate, std::abs(rate - c))};
}

// ---- criterion 4 ----

Outcome sim_cloning() {
  Rng rng(0xD4);
  int recovered = 0;
  std::uint64_t total = 0, worst = 0;
  bool within = true;
  for (int i = 0; i < 20; ++i) {
    const auto ki = rng.block128();
    attack::PhysicalSimOracle oracle(ki, auth::AuthSuite::MiniComp128);
    const auto res = attack::clone_sim(oracle, 50000, rng);
    if (res.ki && *res.ki == ki) ++recovered;
    within = within && res.queries_used <= 50000;
    total += res.queries_used;
    worst = std::max(worst, res.queries_used);
  }
  int resisted = 0;
  bool h_within = true;
  for (int i = 0; i < 20; ++i) {
    const auto ki = rng.block128();
    attack::PhysicalSimOracle oracle(ki, auth::AuthSuite::Hardened);
    const auto res = attack::clone_sim(oracle, 100000, rng);
    if (!res.ki || *res.ki != ki) ++resisted;
    h_within = h_within && res.queries_used <= 100000;
  }
  const double mean = static_cast<double>(total) / 20;
  const bool ok = recovered == 20 && within && mean <= 30000 && resisted == 20 && h_within;
  return {ok, fmt("mini-COMP128 %d/20 recovered, mean %.1f max %llu queries (<= 30000 mean, 50000 cap); hardened "
                  "%d/20 resisted within 1e5",
                  recovered, mean, static_cast<unsigned long long>(worst), resisted)};
}

// ---- criterion 5 ----

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome dual_run() {
  const fs::path dir = GSMLAB_SCENARIO_DIR;
  const auto legacy = lab::run_scenario(lab::parse_scenario(read_file(dir / "legacy_full_sweep.scn")));
  const auto hardened = lab::run_scenario(lab::parse_scenario(read_file(dir / "hardened_full_sweep.scn")));
  const std::array<const char*, 6> six{"fake_bts",       "mitm_downgrade", "rrlp_locate",
                                       "sms_spoof",      "stolen_vectors", "kc_prediction"};
  auto verdict = [](const lab::RunReport& r, const char* label) -> std::string {
    for (const auto& a : r.attacks) {
      if (a.label == label) return std::string(lab::verdict(a.report));
    }
    return "-";
  };
  int yes = 0, no = 0;
  std::string cells;
  for (const auto* a : six) {
    const auto l = verdict(legacy, a), h = verdict(hardened, a);
    yes += l == "YES";
    no += h == "NO";
    cells += fmt(" %s=%s/%s", a, l.c_str(), h.c_str());
  }
  return {yes == 6 && no == 6, fmt("LEGACY %d/6 YES, HARDENED %d/6 NO;%s", yes, no, cells.c_str())};
}

// ---- criterion 6 ----

// Answers every challenge with guesses; no Ki.
class Guesser final : public sim::Credential {
 public:
  explicit Guesser(std::uint64_t seed) : rng_(seed) {}
  std::optional<auth::MiniOutput> legacy(const Block128&) override {
    return auth::MiniOutput{static_cast<std::uint32_t>(rng_.next()), rng_.next()};
  }
  std::optional<sim::MutualAuth> hardened(const Block128&, const Block128&, const Block128&) override {
    return sim::MutualAuth{static_cast<std::uint32_t>(rng_.next()), static_cast<std::uint32_t>(rng_.next()),
                           rng_.block128()};
  }
  bool can_verify_network() const override { return false; }

 private:
  Rng rng_;
};

sim::MsConfig victim() {
  sim::MsConfig c;
  c.id = "MS1";
  c.profile.imsi = auth::Imsi("001010000000001");
  c.profile.ki = Rng(0xE6).block128();
  return c;
}

int replay_corpus_acceptances() {
  int accepted = 0;
  // Each entry: which message kind to record from session 1 and replay in
  // session 2.
  const std::array<std::function<bool(const sim::UmMessage&)>, 5> kinds{
      [](const sim::UmMessage& m) { return m.get<sim::AuthRequest>() != nullptr; },
      [](const sim::UmMessage& m) { return m.get<sim::IdentityResponse>() != nullptr; },
      [](const sim::UmMessage& m) { return m.get<sim::AuthResponse>() != nullptr; },
      [](const sim::UmMessage& m) { return m.get<sim::CipherModeCommand>() != nullptr; },
      [](const sim::UmMessage& m) { return m.get<sim::CipherModeComplete>() != nullptr; },
  };
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      sim::World w(sim::Variant::Hardened, {}, derive_seed(seed, k));
      w.set_trace_enabled(false);
      w.add_ms(victim());
      std::optional<sim::UmMessage> recorded;
      w.set_attacker_hook([&](sim::Envelope& e, sim::World&) {
        if (!kinds[k](e.msg)) return sim::HookAction::Pass;
        if (!recorded) {
          recorded = e.msg;
          return sim::HookAction::Pass;
        }
        e.msg = *recorded;
        return sim::HookAction::Modify;
      });
      if (sim::attach(w, "MS1").status != sim::AttachStatus::Attached) continue;
      sim::detach(w, "MS1");
      if (sim::attach(w, "MS1").status == sim::AttachStatus::Attached) ++accepted;
    }
  }
  return accepted;
}

Outcome hardened_soundness() {
  constexpr int kPerSide = 50000;
  int successes = 0;

  // Fake network guessing net_sres.
  {
    sim::World w(sim::Variant::Hardened, {}, 0xE61);
    w.set_trace_enabled(false);
    w.add_ms(victim());
    w.add_fake_bts();
    for (int i = 0; i < kPerSide; ++i) {
      if (sim::attach(w, "MS1").status == sim::AttachStatus::Attached) ++successes;
      sim::detach(w, "MS1");
    }
  }
  // Impostor MS guessing ms_sres under the victim's identity.
  {
    sim::World w(sim::Variant::Hardened, {}, 0xE62);
    w.set_trace_enabled(false);
    w.add_ms(victim());
    auto cfg = victim();
    cfg.id = "ATK";
    w.add_ms(cfg, std::make_unique<Guesser>(0xE63));
    for (int i = 0; i < kPerSide; ++i) {
      const auto out = sim::attach(w, "ATK");
      const auto* link = w.network().link("ATK");
      if (out.status == sim::AttachStatus::Attached || (link && link->state == sim::LinkState::Attached)) ++successes;
      sim::detach(w, "ATK");
    }
  }
  const int replays = replay_corpus_acceptances();
  return {successes == 0 && replays == 0,
          fmt("%d forged-SRES attempts, %d successes; replay corpus 100 sessions, %d acceptances", 2 * kPerSide,
              successes, replays)};
}

// ---- criterion 7 ----

Outcome rach_dos() {
  attack::FloodReport r[2];
  const sim::Variant vs[2] = {sim::Variant::Legacy, sim::Variant::Hardened};
  for (int i = 0; i < 2; ++i) {
    sim::World w(vs[i], {}, 0xF7);
    w.set_trace_enabled(false);
    w.add_ms(victim());
    attack::FloodParams p;
    p.rate = 10 * w.config().rach_slots;
    p.duration = 200;
    r[i] = attack::rach_flood(w, "MS1", p);
  }
  const bool same = r[0].attempts == r[1].attempts && r[0].successes == r[1].successes &&
                    r[0].recovery_successes == r[1].recovery_successes &&
                    r[0].recovery_attempts == r[1].recovery_attempts;
  const bool ok = same && r[0].attempts > 0 && r[0].success_rate <= 0.2 && r[0].recovery_rate == 1.0;
  return {ok, fmt("rate 20/tick on 2 slots: LEGACY %llu/%llu = %.3f, HARDENED %llu/%llu = %.3f (<= 0.2); recovery "
                  "%.3f / %.3f; identical=%s",
                  static_cast<unsigned long long>(r[0].successes), static_cast<unsigned long long>(r[0].attempts),
                  r[0].success_rate, static_cast<unsigned long long>(r[1].successes),
                  static_cast<unsigned long long>(r[1].attempts), r[1].success_rate, r[0].recovery_rate,
                  r[1].recovery_rate, same ? "yes" : "no")};
}

// ---- criterion 8 ----

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / fs::path("gsmlab-accept-" + std::to_string(::getpid()));
  const fs::path scn = fs::path(GSMLAB_SCENARIO_DIR) / "legacy_full_sweep.scn";
  std::string detail;
  std::array<fs::path, 2> traces;
  for (int i = 0; i < 2; ++i) {
    const auto out = base / std::to_string(i);
    const auto cmd = fmt("\"%s\" run \"%s\" --seed 42 --out \"%s\" > \"%s\"", GSMLAB_CLI, scn.c_str(), out.c_str(),
                         (base / ("stdout" + std::to_string(i))).c_str());
    fs::create_directories(out);
    if (std::system(cmd.c_str()) != 0) return {false, "gsmlab run failed"};
    traces[i] = out / "legacy_full_sweep.trace.txt";
  }
  const auto a = read_file(traces[0]), b = read_file(traces[1]);
  const auto diff_out = base / "diff.txt";
  const auto rc = std::system(
      fmt("\"%s\" trace diff \"%s\" \"%s\" > \"%s\"", GSMLAB_CLI, traces[0].c_str(), traces[1].c_str(), diff_out.c_str())
          .c_str());
  const auto diff_text = read_file(diff_out);
  fs::remove_all(base);
  const bool ok = !a.empty() && a == b && rc == 0 && diff_text == "differences=0\n";
  return {ok, fmt("two seed-42 runs: %zu trace bytes each, byte-identical=%s, trace diff exit %d (%s)", a.size(),
                  a == b ? "yes" : "no", rc, diff_text.substr(0, diff_text.find('\n')).c_str())};
}

}  // namespace

int main() {
  criterion(1, "cipher algebra", 5, cipher_algebra);
  criterion(2, "reduced A5/1 brute-force agreement", 60, brute_force);
  criterion(3, "TMTO success tracks coverage", 300, tmto_law);
  criterion(4, "SIM cloning", 120, sim_cloning);
  criterion(5, "dual-run matrix", 30, dual_run);
  criterion(6, "hardened soundness and replay", 60, hardened_soundness);
  criterion(7, "RACH flood", 10, rach_dos);
  criterion(8, "sweep determinism", 120, determinism);
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
