#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsmlab/auth.hpp"
#include "gsmlab/rainbow.hpp"
#include "gsmlab/world.hpp"

namespace gsmlab::attack {

using sim::EntityId;
using sim::Variant;
using sim::World;

struct AttackReport {
  std::string attack_id;
  Variant variant = Variant::Legacy;
  bool succeeded = false;
  bool precondition_failed = false;
  std::string outcome;  // short machine-readable status
  // Ordered key/value evidence. Keys never carry secret key material.
  std::vector<std::pair<std::string, std::string>> evidence;
  std::uint64_t queries_used = 0;
  std::uint64_t ticks_used = 0;

  void add(std::string key, std::string value) { evidence.emplace_back(std::move(key), std::move(value)); }
  const std::string* find(std::string_view key) const;
};

// ---- fake base station / IMSI catcher ----

// Adds a fake BTS if the world has none, lets the target attach to it, then
// has the target send `traffic_frames` uplink frames.
AttackReport run_fake_bts(World& world, const EntityId& target, unsigned traffic_frames = 3);

// ---- man in the middle ----

struct MitmParams {
  bool rewrite = true;
  sim::CipherSuite rewrite_to = sim::CipherSuite::None;
  unsigned traffic_frames = 3;
};

AttackReport mitm_downgrade(World& world, const EntityId& target, const MitmParams& params = {});

// ---- known plaintext ----

// Bitwise XOR; lengths must match.
Bits recover_keystream(std::span<const Bit> ciphertext, std::span<const Bit> known_plaintext);

// Predictable downlink filler assumed known to the attacker.
Bits filler_frame();

struct TmtoParams {
  RainbowParams table;
  unsigned sessions = 5;
};

// Memoised per parameter set within a process.
std::shared_ptr<const RainbowTable> cached_table(const RainbowParams& params);

// Taps two known filler frames per session, looks the frame-0 keystream up in
// the table and verifies against frame 1. Tries up to `sessions` sessions.
AttackReport run_tmto(World& world, const EntityId& target, const TmtoParams& params);

// ---- SIM cloning ----

// Chosen-challenge access to A3/A8. `query` returns the observed output
// bytes (big-endian sres || kc, truncated to observed_bytes()), or nothing
// if the oracle refuses.
class SimOracle {
 public:
  virtual ~SimOracle() = default;
  virtual std::optional<auth::Output96> query(const Block128& rand) = 0;
  virtual std::size_t observed_bytes() const = 0;
  // Ground truth for verifying a candidate offline.
  virtual auth::Output96 model(const Block128& ki, const Block128& rand) const;
};

// Direct card access: all 96 output bits.
class PhysicalSimOracle final : public SimOracle {
 public:
  using Card = std::function<auth::Output96(const Block128&)>;
  explicit PhysicalSimOracle(Card card) : card_(std::move(card)) {}
  // A card holding `ki` running `suite`.
  PhysicalSimOracle(const Block128& ki, auth::AuthSuite suite);
  std::optional<auth::Output96> query(const Block128& rand) override { return card_(rand); }
  std::size_t observed_bytes() const override { return 12; }

 private:
  Card card_;
};

// Challenges delivered through a fake BTS; only SRES is visible.
class OtaSimOracle final : public SimOracle {
 public:
  OtaSimOracle(World& world, const EntityId& target);
  std::optional<auth::Output96> query(const Block128& rand) override;
  std::size_t observed_bytes() const override { return 4; }
  bool ready() const { return ready_; }

 private:
  World& world_;
  EntityId target_;
  bool ready_ = false;
};

struct PairProgress {
  unsigned pair = 0;
  std::uint64_t queries = 0;
  std::uint64_t collisions = 0;
  std::size_t candidates = 65536;
};

struct CloneResult {
  std::optional<Block128> ki;
  std::uint64_t queries_used = 0;
  std::vector<PairProgress> progress;
  std::string failure;
};

CloneResult clone_sim(SimOracle& oracle, std::uint64_t budget, Rng& rng);

enum class CloneAccess : std::uint8_t { Physical, OverTheAir };

// Physical access uses the target's SIM under the world's auth suite;
// over-the-air access goes through a fake BTS.
AttackReport run_clone_sim(World& world, const EntityId& target, std::uint64_t budget, CloneAccess access);

// ---- RACH flooding ----

struct FloodParams {
  unsigned rate = 0;  // ChannelRequests per tick
  std::uint64_t duration = 200;
  std::uint64_t interval = 5;  // ticks between honest attach attempts
  unsigned recovery_attempts = 5;
};

struct FloodReport {
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  double success_rate = 0;
  double mean_latency = 0;  // ticks, over successful attempts
  std::uint64_t recovery_attempts = 0;
  std::uint64_t recovery_successes = 0;
  double recovery_rate = 0;
  std::uint64_t injected = 0;
};

FloodReport rach_flood(World& world, const EntityId& honest, const FloodParams& params);
AttackReport run_rach_flood(World& world, const EntityId& honest, const FloodParams& params);

// ---- SMS spoofing ----

AttackReport sms_spoof(World& world, const EntityId& target, const std::string& originator, std::string_view text);

// ---- core compromise ----

std::vector<auth::AuthTriplet> steal_auth_vectors(const sim::AuthorityCore& core, const auth::Imsi& imsi);
AttackReport impersonate_user(World& world, const EntityId& victim, std::vector<auth::AuthTriplet> triplets);
// Lets the victim attach `warmup` times, steals the core's cache, then
// impersonates.
AttackReport run_stolen_vectors(World& world, const EntityId& victim, unsigned warmup);

// ---- Kc prediction ----

// mask = Kc_1 ^ Kc_0 from the last two observations; returns last ^ mask.
std::uint64_t predict_next_kc(const std::vector<std::uint64_t>& observed);
AttackReport run_kc_prediction(World& world, const EntityId& target, unsigned observations = 2);

// ---- location ----

AttackReport rrlp_locate(World& world, const EntityId& target);

}  // namespace gsmlab::attack
