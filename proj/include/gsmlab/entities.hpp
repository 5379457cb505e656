#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gsmlab/auth.hpp"
#include "gsmlab/cipher.hpp"
#include "gsmlab/world.hpp"

namespace gsmlab::sim {

// Values both ends of a hardened exchange derive from Ki and the two nonces.
struct MutualAuth {
  std::uint32_t net_sres = 0;  // proves the network to the MS
  std::uint32_t ms_sres = 0;   // proves the MS to the network
  Block128 session_key{};
};

MutualAuth hardened_mutual(const Block128& ki, const Block128& rand, const Block128& ms_nonce,
                           const Block128& net_nonce);

enum class Direction : std::uint8_t { Downlink, Uplink };

// Cipher and MAC context of one established link.
struct Session {
  CipherSuite suite = CipherSuite::None;
  std::uint64_t kc = 0;
  Block128 strong_key{};
  Block128 mac_key{};
  bool mac_active = false;
  std::uint32_t tx_seq = 0;
  std::uint32_t rx_seq = 0;
  std::uint32_t next_frame = 0;

  cipher::KeystreamFrame keystream(std::uint32_t frame) const;
  // Ciphers `data` with consecutive half-frames of `dir` starting at
  // `frame`. Identity under NONE.
  Bits crypt(std::span<const Bit> data, std::uint32_t frame, Direction dir) const;
  // Reserves the half-frames needed for `nbits` and returns the first.
  std::uint32_t take_frames(std::size_t nbits);

  void sign(UmMessage& msg, Direction dir);
  bool check(const UmMessage& msg, Direction dir);
};

enum class LinkState : std::uint8_t { Idle, RachPending, Assigned, WaitAuth, WaitCipher, Attached, Failed };

// Answers the network's challenge on behalf of an MS.
class Credential {
 public:
  virtual ~Credential() = default;
  virtual std::optional<auth::MiniOutput> legacy(const Block128& rand) = 0;
  virtual std::optional<MutualAuth> hardened(const Block128& rand, const Block128& ms_nonce,
                                             const Block128& net_nonce) = 0;
  // Whether hardened net_sres can be checked (false without Ki).
  virtual bool can_verify_network() const { return true; }
};

class SimCard final : public Credential {
 public:
  explicit SimCard(const auth::SimProfile& profile) : profile_(profile) {}
  std::optional<auth::MiniOutput> legacy(const Block128& rand) override;
  std::optional<MutualAuth> hardened(const Block128& rand, const Block128& ms_nonce,
                                     const Block128& net_nonce) override;
  // Raw A3/A8 output for a challenge, as read through the card interface.
  auth::Output96 run_a3a8(const Block128& rand, auth::AuthSuite suite) const;
  const auth::SimProfile& profile() const { return profile_; }

 private:
  auth::SimProfile profile_;
};

// Answers only challenges found in a set of stolen triplets.
class StolenVectors final : public Credential {
 public:
  explicit StolenVectors(std::vector<auth::AuthTriplet> triplets) : triplets_(std::move(triplets)) {}
  std::optional<auth::MiniOutput> legacy(const Block128& rand) override;
  std::optional<MutualAuth> hardened(const Block128& rand, const Block128& ms_nonce,
                                     const Block128& net_nonce) override;
  bool can_verify_network() const override { return false; }
  std::size_t misses() const { return misses_; }

 private:
  std::vector<auth::AuthTriplet> triplets_;
  std::size_t misses_ = 0;
};

struct ReceivedSms {
  std::string originator;
  std::vector<std::uint8_t> text;
  EntityId via;
};

class MobileStation final : public Entity {
 public:
  MobileStation(const MsConfig& cfg, std::unique_ptr<Credential> credential);

  void on_message(const Envelope& env, World& world) override;
  void on_tick(World& world) override;

  void start_attach(World& world);
  void detach();

  LinkState state() const { return state_; }
  std::optional<AttachStatus> failure() const { return failure_; }
  const EntityId& serving() const { return serving_; }
  const Session& session() const { return session_; }
  const auth::Imsi& imsi() const { return imsi_; }
  std::optional<std::uint32_t> tmsi() const { return tmsi_; }
  const LocationResponse& position() const { return position_; }
  std::uint8_t suites(Variant v) const;

  // Encryption-status indicator. The legacy MS has none.
  std::optional<CipherSuite> cipher_indicator(const World& world) const;

  // Sends one uplink traffic frame (≤ 114 bits). Requires ATTACHED.
  void send_traffic(World& world, const Bits& payload);
  const std::vector<Bits>& sent_traffic() const { return sent_; }
  const std::vector<Bits>& received_traffic() const { return received_; }
  const std::vector<ReceivedSms>& inbox() const { return inbox_; }
  const std::vector<std::string>& refusals() const { return refusals_; }
  // Number of times this MS checked a network's authentication value.
  std::size_t network_checks() const { return network_checks_; }
  std::optional<std::uint64_t> last_kc() const { return last_kc_; }
  Credential& credential() { return *credential_; }

 private:
  void fail(AttachStatus status);
  void reply(World& world, UmMessage msg);
  bool peer_authenticated() const { return state_ == LinkState::Attached && session_.mac_active; }
  void handle_auth(const AuthRequest& m, World& world);
  void handle_cipher_mode(const UmMessage& msg, World& world);
  void handle_location(const Envelope& env, World& world);
  bool control_ok(const UmMessage& msg, World& world);

  auth::Imsi imsi_;
  std::optional<std::uint32_t> tmsi_;
  LocationResponse position_;
  std::optional<std::uint8_t> suites_override_;
  std::unique_ptr<Credential> credential_;

  LinkState state_ = LinkState::Idle;
  std::optional<AttachStatus> failure_;
  EntityId serving_;
  std::uint64_t attach_start_ = 0;
  std::uint64_t next_rach_ = 0;
  std::uint64_t last_progress_ = 0;
  std::optional<std::uint8_t> rach_ref_;
  Variant session_variant_ = Variant::Legacy;
  Session session_;
  std::optional<Block128> nonce_;
  std::optional<std::uint64_t> pending_kc_;
  std::optional<std::uint64_t> last_kc_;
  std::set<Block128> seen_rands_;
  std::set<Block128> seen_net_nonces_;

  std::vector<Bits> sent_;
  std::vector<Bits> received_;
  std::vector<ReceivedSms> inbox_;
  std::vector<std::string> refusals_;
  std::size_t network_checks_ = 0;
};

// Per-MS state kept by a cell.
struct Link {
  LinkState state = LinkState::Idle;
  std::optional<AttachStatus> failure;
  std::string identity;
  std::optional<auth::Imsi> imsi;
  std::uint8_t ms_suites = 0;
  Variant variant = Variant::Legacy;
  std::uint32_t expected_sres = 0;
  std::optional<Block128> ms_nonce;
  Session session;
};

class Cell : public Entity {
 public:
  Cell(EntityId id, int priority) : Entity(std::move(id)), priority_(priority) {}

  int priority() const { return priority_; }
  virtual unsigned rach_slots(const World& world) const = 0;

  const Link* link(const EntityId& ms) const;
  void drop_link(const EntityId& ms) { links_.erase(ms); }

 protected:
  Link& link_for(const EntityId& ms) { return links_[ms]; }
  Link* find_link(const EntityId& ms);
  void fail(Link& link, AttachStatus status) {
    link.state = LinkState::Failed;
    link.failure = status;
  }
  void send_control(World& world, const EntityId& ms, Link& link, UmMessage msg);

  std::map<EntityId, Link> links_;

 private:
  int priority_;
};

// Issued by the authority core for one hardened exchange.
struct HardenedChallenge {
  Block128 rand{};
  Block128 net_nonce{};
  MutualAuth values;
};

class AuthorityCore {
 public:
  void enroll(const auth::SimProfile& profile);
  bool known(const auth::Imsi& imsi) const { return subscribers_.count(imsi) != 0; }

  // A fresh triplet, or a cached one when `reuse` is set and `batch`
  // triplets are already cached for the subscriber.
  auth::AuthTriplet issue_legacy(const auth::Imsi& imsi, Rng& rng, bool reuse, unsigned batch);
  HardenedChallenge issue_hardened(const auth::Imsi& imsi, const Block128& ms_nonce, Rng& rng);

  // Everything issued so far. This is what a compromised node leaks.
  const std::vector<auth::AuthTriplet>& cache(const auth::Imsi& imsi) const;

 private:
  std::map<auth::Imsi, auth::SimProfile> subscribers_;
  std::map<auth::Imsi, std::vector<auth::AuthTriplet>> cache_;
  std::map<auth::Imsi, std::size_t> cursor_;
};

struct NetworkDelivery {
  bool accepted = false;
  std::optional<SmsDeliver> on_air;
};

class NetworkSide final : public Cell {
 public:
  explicit NetworkSide(AuthorityCore& core) : Cell("NET", 1), core_(core) {}

  void on_message(const Envelope& env, World& world) override;
  unsigned rach_slots(const World& world) const override;

  void send_traffic(World& world, const EntityId& ms, const Bits& payload);
  // `authenticated` marks a submission from a registered originator over an
  // authenticated path; the hardened network drops anything else.
  NetworkDelivery submit_sms(World& world, const std::string& originator, const EntityId& ms,
                             std::string_view text, bool authenticated);
  void request_location(World& world, const EntityId& ms);

  const std::vector<Bits>& received_traffic(const EntityId& ms) const;
  std::optional<LocationResponse> location(const EntityId& ms) const;
  // Kc of every established legacy session for a subscriber, oldest first.
  const std::vector<std::uint64_t>& kc_history(const auth::Imsi& imsi) const;
  std::size_t dropped_sms() const { return dropped_sms_; }

 private:
  void handle_identity(const EntityId& ms, Link& link, const IdentityResponse& m, World& world);
  void handle_auth(const EntityId& ms, Link& link, const AuthResponse& m, World& world);
  void handle_complete(const EntityId& ms, Link& link, const UmMessage& msg, World& world);
  std::optional<auth::Imsi> resolve(const std::string& identity) const;
  std::uint64_t legacy_kc(const auth::Imsi& imsi, std::uint64_t a8_kc, const World& world) const;

  AuthorityCore& core_;
  std::map<std::uint32_t, auth::Imsi> tmsi_map_;
  std::map<auth::Imsi, std::set<Block128>> seen_ms_nonces_;
  std::map<auth::Imsi, std::vector<std::uint64_t>> kc_history_;
  std::map<EntityId, std::vector<Bits>> received_;
  std::map<EntityId, LocationResponse> locations_;
  std::size_t dropped_sms_ = 0;
};

// A rogue cell with no access to Ki. By default it completes any attach it
// can, switching ciphering off.
class FakeBts final : public Cell {
 public:
  FakeBts(EntityId id, int priority) : Cell(std::move(id), priority) {}

  void on_message(const Envelope& env, World& world) override;
  unsigned rach_slots(const World&) const override { return 16; }

  // Stop after capturing the identity and leave the channel open for
  // attacker-chosen challenges.
  void set_hold_after_identity(bool hold) { hold_ = hold; }
  void send_auth_request(World& world, const EntityId& ms, const Block128& rand);
  void request_location(World& world, const EntityId& ms);

  const std::vector<std::string>& captured_identities() const { return identities_; }
  // Uplink traffic as seen on air; plaintext only when the link runs NONE.
  const std::vector<Traffic>& captured_traffic() const { return traffic_; }
  std::optional<LocationResponse> location(const EntityId& ms) const;
  // SRES answers to challenges sent by this cell, latest last.
  const std::vector<std::pair<Block128, std::uint32_t>>& answers() const { return answers_; }

 private:
  bool hold_ = false;
  std::vector<std::string> identities_;
  std::vector<Traffic> traffic_;
  std::map<EntityId, LocationResponse> locations_;
  std::vector<std::pair<Block128, std::uint32_t>> answers_;
  std::map<EntityId, Block128> pending_rand_;
};

}  // namespace gsmlab::sim
