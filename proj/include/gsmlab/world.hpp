#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gsmlab/auth.hpp"
#include "gsmlab/messages.hpp"
#include "gsmlab/rng.hpp"

namespace gsmlab::sim {

enum class Variant : std::uint8_t { Legacy, Hardened };

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

enum class AttachStatus : std::uint8_t { Attached, AuthMsFailed, AuthNetworkFailed, ReplayRejected, RachTimeout };

std::string_view attach_status_name(AttachStatus s);

struct AttachOutcome {
  AttachStatus status = AttachStatus::RachTimeout;
  CipherSuite negotiated_suite = CipherSuite::None;
  std::uint64_t ticks_elapsed = 0;
};

struct KcPolicy {
  enum class Mode : std::uint8_t { FreshEachSession, XorRecycle };
  Mode mode = Mode::FreshEachSession;
  std::uint64_t mask = 0;

  static KcPolicy fresh() { return {}; }
  static KcPolicy xor_recycle(std::uint64_t mask) { return {Mode::XorRecycle, mask}; }
  bool operator==(const KcPolicy&) const = default;
};

struct NetworkConfig {
  // Legacy networks pick the first entry the MS also supports.
  std::vector<CipherSuite> suite_preference{CipherSuite::A5_1, CipherSuite::A5_2, CipherSuite::None};
  unsigned rach_slots = 2;
  KcPolicy kc_policy;
  // Legacy networks hand out cached triplets again once `triplet_batch`
  // are cached for a subscriber.
  bool triplet_reuse = false;
  unsigned triplet_batch = 3;
  // Legacy A8 output is truncated to this many low bits on both sides.
  unsigned legacy_kc_bits = 64;
  // Hardened MS/network accept A5_1 only when set.
  bool allow_a51_migration = false;

  bool operator==(const NetworkConfig&) const = default;
};

inline constexpr std::uint64_t kRachTimeout = 50;
inline constexpr std::uint64_t kRachMaxBackoff = 1;
inline constexpr std::uint64_t kDedicatedTimeout = 30;

using EntityId = std::string;

struct Envelope {
  EntityId from;
  EntityId to;
  UmMessage msg;
  std::uint64_t deliver_tick = 0;
  std::uint64_t seq = 0;
  bool injected = false;
};

class World;

enum class HookAction : std::uint8_t { Pass, Drop, Modify };

// Sees every non-injected envelope before delivery and may rewrite it in
// place (returning Modify) or drop it.
using AttackerHook = std::function<HookAction(Envelope&, World&)>;

class Entity {
 public:
  explicit Entity(EntityId id) : id_(std::move(id)) {}
  virtual ~Entity() = default;
  Entity(const Entity&) = delete;
  Entity& operator=(const Entity&) = delete;

  const EntityId& id() const { return id_; }
  virtual void on_message(const Envelope& env, World& world) = 0;
  virtual void on_tick(World&) {}

 private:
  EntityId id_;
};

class Cell;
class MobileStation;
class NetworkSide;
class FakeBts;
class AuthorityCore;
class Credential;

struct MsConfig {
  EntityId id;
  auth::SimProfile profile;
  LocationResponse position;
  // Classmark; empty means the variant's default set.
  std::optional<std::uint8_t> suites;
};

class World {
 public:
  World(Variant variant, NetworkConfig config, std::uint64_t seed);
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  Variant variant() const { return variant_; }
  void set_variant(Variant v) { variant_ = v; }
  const NetworkConfig& config() const { return config_; }
  NetworkConfig& config() { return config_; }

  AuthorityCore& core() { return *core_; }
  const AuthorityCore& core() const { return *core_; }
  NetworkSide& network() { return *network_; }

  // Registers the subscriber with the authority core and gives it a SIM.
  MobileStation& add_ms(const MsConfig& cfg);
  // An MS whose answers come from `credential`; not registered in the core.
  MobileStation& add_ms(const MsConfig& cfg, std::unique_ptr<Credential> credential);
  FakeBts& add_fake_bts(int priority = 10);

  MobileStation& ms(const EntityId& id);
  MobileStation* find_ms(const EntityId& id);
  FakeBts* fake_bts() { return fake_; }
  Cell* cell(const EntityId& id);
  // Highest-priority cell; ties go to the one added first.
  Cell& best_cell();

  void send(const EntityId& from, const EntityId& to, UmMessage msg);
  // Attacker-originated; bypasses the hook and is traced as `inject`.
  void inject(const EntityId& from, const EntityId& to, UmMessage msg);

  void set_attacker_hook(AttackerHook hook) { hook_ = std::move(hook); }
  void clear_attacker_hook() { hook_ = nullptr; }

  // Delivers everything due at the current tick, resolves RACH contention,
  // runs entity timers, then advances the clock. Returns the trace lines
  // produced.
  std::vector<std::string> step();

  std::uint64_t now() const { return clock_; }
  bool idle() const { return queue_.empty(); }

  // Protocol randomness (RAND, nonces, TMSIs).
  Rng& rng() { return rng_; }
  // Random-access randomness (slot choice, refs, backoff). Kept separate so
  // contention is identical across protocol variants.
  Rng& rach_rng() { return rach_rng_; }

  void set_trace_enabled(bool on) { trace_enabled_ = on; }
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  void deliver(const Envelope& env);
  void enqueue(const EntityId& from, const EntityId& to, UmMessage msg, bool injected);

  Variant variant_;
  NetworkConfig config_;
  Rng rng_;
  Rng rach_rng_;
  std::uint64_t clock_ = 0;
  std::uint64_t seq_ = 0;
  std::map<std::pair<std::uint64_t, std::uint64_t>, Envelope> queue_;
  AttackerHook hook_;
  bool trace_enabled_ = true;
  std::vector<std::string> trace_;

  std::vector<std::unique_ptr<Entity>> entities_;
  std::map<EntityId, Entity*> by_id_;
  std::vector<Cell*> cells_;
  std::unique_ptr<AuthorityCore> core_;
  NetworkSide* network_ = nullptr;
  FakeBts* fake_ = nullptr;
};

// Runs the attach procedure for `ms` against its best cell until both ends
// settle. The world's variant is switched to `variant` first.
AttachOutcome attach(World& world, const EntityId& ms, Variant variant);
AttachOutcome attach(World& world, const EntityId& ms);

// Ends the current session on both sides; replay caches and TMSIs survive.
void detach(World& world, const EntityId& ms);

std::vector<std::string> step(World& world);

struct DeliveryRecord {
  bool delivered = false;
  std::string displayed_originator;
  std::vector<std::uint8_t> text;
  // SmsDeliver as it crossed the air interface, if it was sent.
  std::optional<SmsDeliver> on_air;
};

// Legitimate SMS from `from_address`, submitted over an authenticated path.
DeliveryRecord send_sms(World& world, const std::string& from_address, const EntityId& to,
                        std::string_view text);

struct Refusal {
  std::string reason;
};

using RrlpResult = std::variant<LocationResponse, Refusal>;

RrlpResult rrlp_query(World& world, const EntityId& requester, const EntityId& target);

void recycle_kc_policy(World& world, KcPolicy policy);

// Runs until `done` returns true or `max_ticks` pass. True if `done` held.
bool run_until(World& world, const std::function<bool()>& done, std::uint64_t max_ticks);

}  // namespace gsmlab::sim
