#include <algorithm>

#include "gsmlab/entities.hpp"

namespace gsmlab::sim {

namespace {

std::uint64_t kc_mask(unsigned bits) { return bits >= 64 ? ~0ull : (1ull << bits) - 1; }

Block128 xor128(const Block128& a, const Block128& b) {
  Block128 r{};
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] ^ b[i];
  return r;
}

std::uint32_t draw32(Rng& rng) { return static_cast<std::uint32_t>(rng.next() >> 32); }

}  // namespace

// ---- hardened key agreement, sessions, credentials ----

MutualAuth hardened_mutual(const Block128& ki, const Block128& rand, const Block128& ms_nonce,
                           const Block128& net_nonce) {
  MutualAuth m;
  m.net_sres = auth::hardened_a3a8(ki, auth::bind128("net", rand, ms_nonce)).sres;
  m.ms_sres = auth::hardened_a3a8(ki, auth::bind128("ms", rand, net_nonce)).sres;
  m.session_key = auth::hardened_a3a8(ki, auth::bind128("key", rand, xor128(ms_nonce, net_nonce))).kc;
  return m;
}

cipher::KeystreamFrame Session::keystream(std::uint32_t frame) const {
  frame %= cipher::kFrameLimit;
  switch (suite) {
    case CipherSuite::A5_1: return cipher::a51_keystream(kc, frame);
    case CipherSuite::A5_2: return cipher::a52_keystream(kc, frame);
    case CipherSuite::Strong: return cipher::strong_keystream(strong_key, frame);
    case CipherSuite::None: break;
  }
  cipher::KeystreamFrame ks;
  ks.frame_number = frame;
  return ks;
}

Bits Session::crypt(std::span<const Bit> data, std::uint32_t frame, Direction dir) const {
  if (suite == CipherSuite::None) return Bits(data.begin(), data.end());
  Bits out;
  out.reserve(data.size());
  for (std::size_t off = 0; off < data.size(); off += cipher::kHalfBits, ++frame) {
    const auto ks = keystream(frame);
    const auto half = dir == Direction::Downlink ? ks.downlink() : ks.uplink();
    const auto chunk = data.subspan(off, std::min(cipher::kHalfBits, data.size() - off));
    const auto c = cipher::xor_crypt(chunk, half);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

std::uint32_t Session::take_frames(std::size_t nbits) {
  const auto n = static_cast<std::uint32_t>(std::max<std::size_t>(1, (nbits + cipher::kHalfBits - 1) / cipher::kHalfBits));
  const auto first = next_frame;
  next_frame = (next_frame + n) % cipher::kFrameLimit;
  return first;
}

namespace {

// The tag covers the rendered message, a per-direction sequence number and
// the direction itself, so reordered or reflected messages fail.
std::vector<std::uint8_t> tag_input(const UmMessage& msg, std::uint32_t seq, Direction dir) {
  auto input = mac_input(msg);
  for (int i = 3; i >= 0; --i) input.push_back(static_cast<std::uint8_t>(seq >> (8 * i)));
  input.push_back(static_cast<std::uint8_t>(dir));
  return input;
}

}  // namespace

void Session::sign(UmMessage& msg, Direction dir) {
  msg.mac.reset();
  msg.mac = auth::mac_tag(mac_key, tag_input(msg, tx_seq++, dir));
}

bool Session::check(const UmMessage& msg, Direction dir) {
  if (!msg.mac || !auth::mac_verify(mac_key, tag_input(msg, rx_seq, dir), *msg.mac)) return false;
  ++rx_seq;
  return true;
}

std::optional<auth::MiniOutput> SimCard::legacy(const Block128& rand) {
  return auth::mini_comp128(profile_.ki, rand);
}

std::optional<MutualAuth> SimCard::hardened(const Block128& rand, const Block128& ms_nonce,
                                            const Block128& net_nonce) {
  return hardened_mutual(profile_.ki, rand, ms_nonce, net_nonce);
}

auth::Output96 SimCard::run_a3a8(const Block128& rand, auth::AuthSuite suite) const {
  if (suite == auth::AuthSuite::MiniComp128) return auth::to_output96(auth::mini_comp128(profile_.ki, rand));
  const auto h = auth::hardened_a3a8(profile_.ki, rand);
  auth::Output96 out{};
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(h.sres >> (24 - 8 * i));
  std::copy(h.kc.begin(), h.kc.begin() + 8, out.begin() + 4);
  return out;
}

std::optional<auth::MiniOutput> StolenVectors::legacy(const Block128& rand) {
  for (const auto& t : triplets_) {
    if (t.suite == auth::AuthSuite::MiniComp128 && t.rand == rand) return auth::MiniOutput{t.sres, t.kc};
  }
  ++misses_;
  return std::nullopt;
}

std::optional<MutualAuth> StolenVectors::hardened(const Block128& rand, const Block128&, const Block128&) {
  // The stolen record only helps if the network reissues the same challenge.
  for (const auto& t : triplets_) {
    if (t.suite == auth::AuthSuite::Hardened && t.rand == rand) return MutualAuth{0, t.sres, t.kc_strong};
  }
  ++misses_;
  return std::nullopt;
}

// ---- authority core ----

void AuthorityCore::enroll(const auth::SimProfile& profile) { subscribers_[profile.imsi] = profile; }

auth::AuthTriplet AuthorityCore::issue_legacy(const auth::Imsi& imsi, Rng& rng, bool reuse, unsigned batch) {
  auto& cached = cache_[imsi];
  if (reuse && batch > 0 && cached.size() >= batch) {
    auto& cur = cursor_[imsi];
    return cached[cur++ % cached.size()];
  }
  auto t = auth::gen_triplet(subscribers_.at(imsi), auth::AuthSuite::MiniComp128, rng);
  cached.push_back(t);
  return t;
}

HardenedChallenge AuthorityCore::issue_hardened(const auth::Imsi& imsi, const Block128& ms_nonce, Rng& rng) {
  HardenedChallenge ch;
  ch.rand = rng.block128();
  ch.net_nonce = rng.block128();
  ch.values = hardened_mutual(subscribers_.at(imsi).ki, ch.rand, ms_nonce, ch.net_nonce);
  auth::AuthTriplet t;
  t.suite = auth::AuthSuite::Hardened;
  t.rand = ch.rand;
  t.sres = ch.values.ms_sres;
  t.kc_strong = ch.values.session_key;
  cache_[imsi].push_back(t);
  return ch;
}

const std::vector<auth::AuthTriplet>& AuthorityCore::cache(const auth::Imsi& imsi) const {
  static const std::vector<auth::AuthTriplet> empty;
  auto it = cache_.find(imsi);
  return it == cache_.end() ? empty : it->second;
}

// ---- cells ----

const Link* Cell::link(const EntityId& ms) const {
  auto it = links_.find(ms);
  return it == links_.end() ? nullptr : &it->second;
}

Link* Cell::find_link(const EntityId& ms) {
  auto it = links_.find(ms);
  return it == links_.end() ? nullptr : &it->second;
}

void Cell::send_control(World& world, const EntityId& ms, Link& link, UmMessage msg) {
  if (link.variant == Variant::Hardened && link.session.mac_active) link.session.sign(msg, Direction::Downlink);
  world.send(id(), ms, std::move(msg));
}

unsigned NetworkSide::rach_slots(const World& world) const { return world.config().rach_slots; }

std::optional<auth::Imsi> NetworkSide::resolve(const std::string& identity) const {
  if (identity.rfind("TMSI:", 0) == 0) {
    const auto bytes = from_hex(identity.substr(5));
    if (bytes.size() != 4) return std::nullopt;
    std::uint32_t t = 0;
    for (auto b : bytes) t = (t << 8) | b;
    auto it = tmsi_map_.find(t);
    if (it == tmsi_map_.end()) return std::nullopt;
    return it->second;
  }
  try {
    return auth::Imsi(identity);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

std::uint64_t NetworkSide::legacy_kc(const auth::Imsi& imsi, std::uint64_t a8_kc, const World& world) const {
  const auto& cfg = world.config();
  const std::uint64_t mask = kc_mask(cfg.legacy_kc_bits);
  if (cfg.kc_policy.mode == KcPolicy::Mode::XorRecycle) {
    auto it = kc_history_.find(imsi);
    if (it != kc_history_.end() && !it->second.empty()) return (it->second.back() ^ cfg.kc_policy.mask) & mask;
  }
  return a8_kc & mask;
}

void NetworkSide::on_message(const Envelope& env, World& world) {
  const EntityId& ms = env.from;
  const UmMessage& msg = env.msg;

  if (auto* m = msg.get<ChannelRequest>()) {
    Link& link = link_for(ms);
    link = Link{};
    link.state = LinkState::Assigned;
    link.variant = world.variant();
    world.send(id(), ms, UmMessage{ImmediateAssignment{m->ref}});
    world.send(id(), ms, UmMessage{IdentityRequest{IdentityKind::Imsi}});
    return;
  }

  Link* link = find_link(ms);
  if (!link) return;

  if (auto* m = msg.get<IdentityResponse>()) {
    if (link->state == LinkState::Assigned) handle_identity(ms, *link, *m, world);
  } else if (auto* m = msg.get<AuthResponse>()) {
    if (link->state != LinkState::WaitAuth) return;
    if (link->variant == Variant::Hardened) {
      if (!m->ms_nonce || !link->ms_nonce || *m->ms_nonce != *link->ms_nonce) {
        return fail(*link, AttachStatus::ReplayRejected);
      }
      if (!link->session.check(msg, Direction::Uplink)) return fail(*link, AttachStatus::AuthMsFailed);
    }
    handle_auth(ms, *link, *m, world);
  } else if (msg.get<CipherModeComplete>()) {
    if (link->state == LinkState::WaitCipher) handle_complete(ms, *link, msg, world);
  } else if (auto* m = msg.get<Traffic>()) {
    if (link->state != LinkState::Attached) return;
    received_[ms].push_back(m->ciphered ? link->session.crypt(m->payload, m->frame, Direction::Uplink) : m->payload);
  } else if (auto* m = msg.get<LocationResponse>()) {
    if (link->state != LinkState::Attached) return;
    if (link->variant == Variant::Hardened && !link->session.check(msg, Direction::Uplink)) return;
    locations_[ms] = *m;
  }
}

void NetworkSide::handle_identity(const EntityId& ms, Link& link, const IdentityResponse& m, World& world) {
  link.identity = m.identity;
  link.ms_suites = m.suites;
  auto imsi = resolve(m.identity);
  if (!imsi || !core_.known(*imsi)) return fail(link, AttachStatus::AuthMsFailed);
  link.imsi = imsi;
  const auto& cfg = world.config();

  if (link.variant == Variant::Legacy) {
    const auto t = core_.issue_legacy(*imsi, world.rng(), cfg.triplet_reuse, cfg.triplet_batch);
    link.expected_sres = t.sres;
    link.session.kc = legacy_kc(*imsi, t.kc, world);
    send_control(world, ms, link, UmMessage{AuthRequest{t.rand, std::nullopt, std::nullopt}});
  } else {
    if (!m.nonce) return fail(link, AttachStatus::AuthMsFailed);
    if (!seen_ms_nonces_[*imsi].insert(*m.nonce).second) return fail(link, AttachStatus::ReplayRejected);
    const auto ch = core_.issue_hardened(*imsi, *m.nonce, world.rng());
    link.ms_nonce = m.nonce;
    link.expected_sres = ch.values.ms_sres;
    send_control(world, ms, link, UmMessage{AuthRequest{ch.rand, ch.values.net_sres, ch.net_nonce}});
    link.session.strong_key = ch.values.session_key;
    link.session.kc = word_from_bits(bits_from_bytes(ch.values.session_key, 64));
    link.session.mac_key = auth::bind128("mac", ch.values.session_key, Block128{});
    link.session.mac_active = true;
  }
  link.state = LinkState::WaitAuth;
}

void NetworkSide::handle_auth(const EntityId& ms, Link& link, const AuthResponse& m, World& world) {
  if (m.sres != link.expected_sres) return fail(link, AttachStatus::AuthMsFailed);
  const auto& cfg = world.config();

  std::optional<CipherSuite> suite;
  if (link.variant == Variant::Legacy) {
    for (auto s : cfg.suite_preference) {
      if (link.ms_suites & suite_bit(s)) {
        suite = s;
        break;
      }
    }
  } else {
    suite = CipherSuite::Strong;
    if (cfg.allow_a51_migration && !(link.ms_suites & suite_bit(CipherSuite::Strong))) suite = CipherSuite::A5_1;
  }
  if (!suite) return fail(link, AttachStatus::AuthMsFailed);
  link.session.suite = *suite;
  send_control(world, ms, link, UmMessage{CipherModeCommand{*suite}});
  link.state = LinkState::WaitCipher;
}

void NetworkSide::handle_complete(const EntityId& ms, Link& link, const UmMessage& msg, World& world) {
  if (link.variant == Variant::Hardened && !link.session.check(msg, Direction::Uplink)) {
    return fail(link, AttachStatus::AuthMsFailed);
  }
  link.state = LinkState::Attached;
  kc_history_[*link.imsi].push_back(link.session.kc);
  const std::uint32_t tmsi = draw32(world.rng());
  tmsi_map_[tmsi] = *link.imsi;
  send_control(world, ms, link, UmMessage{TmsiRealloc{tmsi}});
}

void NetworkSide::send_traffic(World& world, const EntityId& ms, const Bits& payload) {
  Link* link = find_link(ms);
  if (!link || link->state != LinkState::Attached) throw DomainError("no attached link to " + ms);
  if (payload.size() > cipher::kHalfBits) throw DomainError("traffic payload exceeds one half-frame");
  const auto frame = link->session.take_frames(payload.size());
  Traffic t{frame, link->session.crypt(payload, frame, Direction::Downlink),
            link->session.suite != CipherSuite::None};
  world.send(id(), ms, UmMessage{std::move(t)});
}

NetworkDelivery NetworkSide::submit_sms(World& world, const std::string& originator, const EntityId& ms,
                                        std::string_view text, bool authenticated) {
  Link* link = find_link(ms);
  if (!link || link->state != LinkState::Attached) return {};
  if (link->variant == Variant::Hardened && !authenticated) {
    ++dropped_sms_;
    return {};
  }
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  const auto bits = bits_from_bytes(bytes);
  const auto frame = link->session.take_frames(bits.size());
  SmsDeliver d{originator, bytes_from_bits(link->session.crypt(bits, frame, Direction::Downlink)), frame,
               link->session.suite != CipherSuite::None};
  send_control(world, ms, *link, UmMessage{d});
  return {true, std::move(d)};
}

void NetworkSide::request_location(World& world, const EntityId& ms) {
  locations_.erase(ms);
  Link* link = find_link(ms);
  if (!link || link->state != LinkState::Attached) return;
  send_control(world, ms, *link, UmMessage{LocationRequest{}});
}

const std::vector<Bits>& NetworkSide::received_traffic(const EntityId& ms) const {
  static const std::vector<Bits> empty;
  auto it = received_.find(ms);
  return it == received_.end() ? empty : it->second;
}

std::optional<LocationResponse> NetworkSide::location(const EntityId& ms) const {
  auto it = locations_.find(ms);
  if (it == locations_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::uint64_t>& NetworkSide::kc_history(const auth::Imsi& imsi) const {
  static const std::vector<std::uint64_t> empty;
  auto it = kc_history_.find(imsi);
  return it == kc_history_.end() ? empty : it->second;
}

// ---- fake BTS ----

void FakeBts::on_message(const Envelope& env, World& world) {
  const EntityId& ms = env.from;
  const UmMessage& msg = env.msg;

  if (auto* m = msg.get<ChannelRequest>()) {
    Link& link = link_for(ms);
    link = Link{};
    link.state = LinkState::Assigned;
    link.variant = world.variant();
    world.send(id(), ms, UmMessage{ImmediateAssignment{m->ref}});
    world.send(id(), ms, UmMessage{IdentityRequest{IdentityKind::Imsi}});
    return;
  }

  Link* link = find_link(ms);
  if (!link) return;

  if (auto* m = msg.get<IdentityResponse>()) {
    if (link->state != LinkState::Assigned) return;
    identities_.push_back(m->identity);
    link->identity = m->identity;
    link->ms_suites = m->suites;
    link->state = LinkState::WaitAuth;
    if (!hold_) send_auth_request(world, ms, world.rng().block128());
  } else if (auto* m = msg.get<AuthResponse>()) {
    if (link->state != LinkState::WaitAuth) return;
    auto it = pending_rand_.find(ms);
    if (it != pending_rand_.end()) answers_.emplace_back(it->second, m->sres);
    if (hold_) return;
    // No Ki, so the answer cannot be checked; switch ciphering off instead.
    world.send(id(), ms, UmMessage{CipherModeCommand{CipherSuite::None}});
    link->state = LinkState::WaitCipher;
  } else if (msg.get<CipherModeComplete>()) {
    if (link->state == LinkState::WaitCipher) link->state = LinkState::Attached;
  } else if (auto* m = msg.get<Traffic>()) {
    traffic_.push_back(*m);
  } else if (auto* m = msg.get<LocationResponse>()) {
    locations_[ms] = *m;
  }
}

void FakeBts::send_auth_request(World& world, const EntityId& ms, const Block128& rand) {
  AuthRequest req{rand, std::nullopt, std::nullopt};
  if (world.variant() == Variant::Hardened) {
    // Without Ki the network response can only be guessed.
    req.net_sres = draw32(world.rng());
    req.net_nonce = world.rng().block128();
  }
  pending_rand_[ms] = rand;
  world.send(id(), ms, UmMessage{req});
}

void FakeBts::request_location(World& world, const EntityId& ms) {
  locations_.erase(ms);
  world.send(id(), ms, UmMessage{LocationRequest{}});
}

std::optional<LocationResponse> FakeBts::location(const EntityId& ms) const {
  auto it = locations_.find(ms);
  if (it == locations_.end()) return std::nullopt;
  return it->second;
}

}  // namespace gsmlab::sim
