#include <cstdio>

#include "gsmlab/entities.hpp"

namespace gsmlab::sim {

namespace {

std::uint64_t kc_mask(unsigned bits) { return bits >= 64 ? ~0ull : (1ull << bits) - 1; }

std::string tmsi_identity(std::uint32_t tmsi) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "TMSI:%08x", tmsi);
  return buf;
}

}  // namespace

MobileStation::MobileStation(const MsConfig& cfg, std::unique_ptr<Credential> credential)
    : Entity(cfg.id),
      imsi_(cfg.profile.imsi),
      tmsi_(cfg.profile.tmsi),
      position_(cfg.position),
      suites_override_(cfg.suites),
      credential_(std::move(credential)) {}

std::uint8_t MobileStation::suites(Variant v) const {
  if (suites_override_) return *suites_override_;
  if (v == Variant::Legacy) {
    return suite_bit(CipherSuite::None) | suite_bit(CipherSuite::A5_1) | suite_bit(CipherSuite::A5_2);
  }
  return suite_bit(CipherSuite::Strong) | suite_bit(CipherSuite::A5_1);
}

std::optional<CipherSuite> MobileStation::cipher_indicator(const World& world) const {
  if (world.variant() == Variant::Legacy) return std::nullopt;
  return state_ == LinkState::Attached ? session_.suite : CipherSuite::None;
}

void MobileStation::start_attach(World& world) {
  state_ = LinkState::RachPending;
  failure_.reset();
  serving_ = world.best_cell().id();
  attach_start_ = next_rach_ = last_progress_ = world.now();
  rach_ref_.reset();
  session_variant_ = world.variant();
  session_ = Session{};
  nonce_.reset();
  pending_kc_.reset();
}

void MobileStation::detach() {
  state_ = LinkState::Idle;
  session_ = Session{};
  nonce_.reset();
  pending_kc_.reset();
  rach_ref_.reset();
}

void MobileStation::fail(AttachStatus status) {
  state_ = LinkState::Failed;
  failure_ = status;
}

void MobileStation::reply(World& world, UmMessage msg) {
  if (session_variant_ == Variant::Hardened && session_.mac_active) session_.sign(msg, Direction::Uplink);
  world.send(id(), serving_, std::move(msg));
}

bool MobileStation::control_ok(const UmMessage& msg, World&) {
  if (session_variant_ == Variant::Legacy) return true;
  return session_.mac_active && session_.check(msg, Direction::Downlink);
}

void MobileStation::on_tick(World& world) {
  const auto now = world.now();
  switch (state_) {
    case LinkState::RachPending:
      if (now - attach_start_ >= kRachTimeout) {
        fail(AttachStatus::RachTimeout);
      } else if (now >= next_rach_) {
        rach_ref_ = static_cast<std::uint8_t>(world.rach_rng().below(256));
        world.send(id(), serving_, UmMessage{ChannelRequest{*rach_ref_}});
        next_rach_ = now + 2 + world.rach_rng().below(kRachMaxBackoff + 1);
      }
      break;
    case LinkState::Assigned:
    case LinkState::WaitAuth:
    case LinkState::WaitCipher:
      if (now - last_progress_ > kDedicatedTimeout) fail(AttachStatus::AuthNetworkFailed);
      break;
    default:
      break;
  }
}

void MobileStation::on_message(const Envelope& env, World& world) {
  const UmMessage& msg = env.msg;
  if (msg.get<LocationRequest>()) return handle_location(env, world);
  if (state_ == LinkState::Idle || state_ == LinkState::Failed || env.from != serving_) return;

  if (auto* m = msg.get<ImmediateAssignment>()) {
    if (state_ == LinkState::RachPending && rach_ref_ && m->ref == *rach_ref_) {
      state_ = LinkState::Assigned;
      last_progress_ = world.now();
    }
  } else if (msg.get<IdentityRequest>()) {
    if (state_ != LinkState::Assigned) return;
    IdentityResponse r;
    r.suites = suites(session_variant_);
    if (session_variant_ == Variant::Hardened) {
      nonce_ = world.rng().block128();
      r.nonce = nonce_;
      r.identity = tmsi_ ? tmsi_identity(*tmsi_) : imsi_.str();
    } else {
      r.identity = imsi_.str();
    }
    reply(world, UmMessage{std::move(r)});
    state_ = LinkState::WaitAuth;
    last_progress_ = world.now();
  } else if (auto* m = msg.get<AuthRequest>()) {
    handle_auth(*m, world);
  } else if (msg.get<CipherModeCommand>()) {
    handle_cipher_mode(msg, world);
  } else if (auto* m = msg.get<TmsiRealloc>()) {
    if (state_ == LinkState::Attached && control_ok(msg, world)) tmsi_ = m->tmsi;
  } else if (auto* m = msg.get<Traffic>()) {
    if (state_ != LinkState::Attached) return;
    received_.push_back(m->ciphered ? session_.crypt(m->payload, m->frame, Direction::Downlink) : m->payload);
  } else if (auto* m = msg.get<SmsDeliver>()) {
    if (state_ != LinkState::Attached) return;
    if (session_variant_ == Variant::Hardened && !control_ok(msg, world)) {
      refusals_.push_back("sms_unauthenticated");
      return;
    }
    auto text = m->text;
    if (m->ciphered) {
      text = bytes_from_bits(session_.crypt(bits_from_bytes(m->text), m->frame, Direction::Downlink));
    }
    inbox_.push_back({m->originator, std::move(text), env.from});
  }
}

void MobileStation::handle_location(const Envelope& env, World& world) {
  const bool on_link = state_ == LinkState::Attached && env.from == serving_;
  if (world.variant() == Variant::Legacy) {
    // Whoever serves the MS gets the fix.
    if (on_link) reply(world, UmMessage{position_});
    return;
  }
  if (!on_link || !peer_authenticated() || !control_ok(env.msg, world)) {
    refusals_.push_back("rrlp_unauthenticated");
    return;
  }
  reply(world, UmMessage{position_});
}

void MobileStation::handle_auth(const AuthRequest& m, World& world) {
  if (session_variant_ == Variant::Legacy) {
    // Any serving cell may challenge; nothing about it is checked.
    if (state_ != LinkState::WaitAuth && state_ != LinkState::WaitCipher) return;
    auto out = credential_->legacy(m.rand);
    if (!out) return fail(AttachStatus::AuthMsFailed);
    const auto& cfg = world.config();
    const std::uint64_t mask = kc_mask(cfg.legacy_kc_bits);
    std::uint64_t kc = out->kc & mask;
    if (cfg.kc_policy.mode == KcPolicy::Mode::XorRecycle && last_kc_) kc = (*last_kc_ ^ cfg.kc_policy.mask) & mask;
    pending_kc_ = kc;
    reply(world, UmMessage{AuthResponse{out->sres, std::nullopt}});
    state_ = LinkState::WaitCipher;
    last_progress_ = world.now();
    return;
  }

  if (state_ != LinkState::WaitAuth) return;
  if (!nonce_ || !m.net_sres || !m.net_nonce) return fail(AttachStatus::AuthNetworkFailed);
  const bool fresh_rand = seen_rands_.insert(m.rand).second;
  const bool fresh_nonce = seen_net_nonces_.insert(*m.net_nonce).second;
  if (!fresh_rand || !fresh_nonce) return fail(AttachStatus::ReplayRejected);

  auto v = credential_->hardened(m.rand, *nonce_, *m.net_nonce);
  if (!v) return fail(AttachStatus::AuthMsFailed);
  if (credential_->can_verify_network()) {
    ++network_checks_;
    if (v->net_sres != *m.net_sres) return fail(AttachStatus::AuthNetworkFailed);
  }
  session_ = Session{};
  session_.strong_key = v->session_key;
  session_.kc = word_from_bits(bits_from_bytes(v->session_key, 64));
  session_.mac_key = auth::bind128("mac", v->session_key, Block128{});
  session_.mac_active = true;
  reply(world, UmMessage{AuthResponse{v->ms_sres, nonce_}});
  state_ = LinkState::WaitCipher;
  last_progress_ = world.now();
}

void MobileStation::handle_cipher_mode(const UmMessage& msg, World& world) {
  if (state_ != LinkState::WaitCipher) return;
  const auto suite = msg.get<CipherModeCommand>()->suite;

  if (session_variant_ == Variant::Legacy) {
    if (!(suites(Variant::Legacy) & suite_bit(suite)) || !pending_kc_) return fail(AttachStatus::AuthNetworkFailed);
    session_ = Session{};
    session_.suite = suite;
    session_.kc = *pending_kc_;
    last_kc_ = *pending_kc_;
  } else {
    if (!control_ok(msg, world)) return fail(AttachStatus::AuthNetworkFailed);
    const bool allowed = suite == CipherSuite::Strong ||
                         (suite == CipherSuite::A5_1 && world.config().allow_a51_migration);
    if (!allowed) return fail(AttachStatus::AuthNetworkFailed);
    session_.suite = suite;
  }
  reply(world, UmMessage{CipherModeComplete{}});
  state_ = LinkState::Attached;
  last_progress_ = world.now();
}

void MobileStation::send_traffic(World& world, const Bits& payload) {
  if (state_ != LinkState::Attached) throw DomainError("mobile station " + id() + " is not attached");
  if (payload.size() > cipher::kHalfBits) throw DomainError("traffic payload exceeds one half-frame");
  const auto frame = session_.take_frames(payload.size());
  Traffic t{frame, session_.crypt(payload, frame, Direction::Uplink), session_.suite != CipherSuite::None};
  sent_.push_back(payload);
  world.send(id(), serving_, UmMessage{std::move(t)});
}

}  // namespace gsmlab::sim
