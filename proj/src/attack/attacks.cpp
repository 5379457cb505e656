#include <algorithm>
#include <cstdio>
#include <map>
#include <mutex>

#include "gsmlab/attacks.hpp"
#include "gsmlab/entities.hpp"

namespace gsmlab::attack {

using sim::AttachStatus;
using sim::CipherSuite;
using sim::LinkState;

namespace {

Bits random_payload(Rng& rng, std::size_t n = cipher::kHalfBits) {
  Bits b(n);
  for (std::size_t i = 0; i < n; i += 64) {
    const auto w = rng.next();
    for (std::size_t j = i; j < std::min(n, i + 64); ++j) b[j] = static_cast<Bit>((w >> (j - i)) & 1u);
  }
  return b;
}

AttackReport start_report(const char* id, const World& world) {
  AttackReport r;
  r.attack_id = id;
  r.variant = world.variant();
  return r;
}

std::string status_name(AttachStatus s) { return std::string(sim::attach_status_name(s)); }

std::string fmt_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

sim::FakeBts& ensure_fake(World& world) { return world.fake_bts() ? *world.fake_bts() : world.add_fake_bts(); }

void settle(World& world, unsigned ticks) {
  for (unsigned i = 0; i < ticks; ++i) world.step();
}

}  // namespace

const std::string* AttackReport::find(std::string_view key) const {
  for (const auto& [k, v] : evidence) {
    if (k == key) return &v;
  }
  return nullptr;
}

// ---- fake BTS ----

AttackReport run_fake_bts(World& world, const EntityId& target, unsigned traffic_frames) {
  auto rep = start_report("fake_bts", world);
  const auto start = world.now();
  auto& fake = ensure_fake(world);
  auto& ms = world.ms(target);

  const auto out = sim::attach(world, target);
  const bool on_fake = out.status == AttachStatus::Attached && ms.serving() == fake.id();
  if (on_fake) {
    for (unsigned i = 0; i < traffic_frames; ++i) ms.send_traffic(world, random_payload(world.rng()));
    settle(world, 3);
  }

  const auto& ids = fake.captured_identities();
  const bool imsi_caught = std::find(ids.begin(), ids.end(), ms.imsi().str()) != ids.end();
  std::size_t plain = 0;
  for (const auto& t : fake.captured_traffic()) {
    if (t.ciphered) continue;
    const auto& sent = ms.sent_traffic();
    if (std::find(sent.begin(), sent.end(), t.payload) != sent.end()) ++plain;
  }

  rep.succeeded = on_fake && imsi_caught && plain >= 1;
  rep.outcome = status_name(out.status);
  rep.ticks_used = world.now() - start;
  rep.add("attach", status_name(out.status));
  rep.add("serving", ms.serving());
  rep.add("imsi_captured", imsi_caught ? "1" : "0");
  rep.add("captured_identity", ids.empty() ? "-" : ids.front());
  rep.add("plaintext_frames", std::to_string(plain) + "/" + std::to_string(ms.sent_traffic().size()));
  return rep;
}

// ---- MITM ----

AttackReport mitm_downgrade(World& world, const EntityId& target, const MitmParams& params) {
  auto rep = start_report("mitm_downgrade", world);
  const auto start = world.now();
  auto& ms = world.ms(target);
  const auto net = world.network().id();

  struct Tap {
    bool uplink;
    sim::Traffic t;
  };
  std::vector<Tap> taps;
  unsigned rewrites = 0;

  world.set_attacker_hook([&](sim::Envelope& e, World&) {
    const bool up = e.from == target && e.to == net;
    const bool down = e.from == net && e.to == target;
    if (!up && !down) return sim::HookAction::Pass;
    if (auto* t = e.msg.get<sim::Traffic>()) {
      taps.push_back({up, *t});
      return sim::HookAction::Pass;
    }
    if (!params.rewrite) return sim::HookAction::Pass;
    if (auto* id = e.msg.get<sim::IdentityResponse>(); id && up) {
      id->suites = sim::suite_bit(params.rewrite_to);
      ++rewrites;
      return sim::HookAction::Modify;
    }
    if (auto* cmc = e.msg.get<sim::CipherModeCommand>(); cmc && down && cmc->suite != params.rewrite_to) {
      cmc->suite = params.rewrite_to;
      ++rewrites;
      return sim::HookAction::Modify;
    }
    return sim::HookAction::Pass;
  });

  const auto out = sim::attach(world, target);
  const auto* link = world.network().link(target);
  const bool both = out.status == AttachStatus::Attached && link && link->state == LinkState::Attached;
  if (both) {
    for (unsigned i = 0; i < params.traffic_frames; ++i) {
      ms.send_traffic(world, random_payload(world.rng()));
      world.network().send_traffic(world, target, random_payload(world.rng()));
    }
    settle(world, 3);
  }
  world.clear_attacker_hook();

  // The transcript counts only if every uplink frame was read in the clear.
  std::size_t plain = 0;
  std::size_t idx = 0;
  for (const auto& tap : taps) {
    if (!tap.uplink) continue;
    if (!tap.t.ciphered && idx < ms.sent_traffic().size() && tap.t.payload == ms.sent_traffic()[idx]) ++plain;
    ++idx;
  }
  const std::size_t sent = ms.sent_traffic().size();

  rep.succeeded = both && sent > 0 && plain == sent;
  rep.outcome = status_name(out.status);
  rep.ticks_used = world.now() - start;
  rep.add("ms_state", status_name(out.status));
  rep.add("network_state", link && link->state == LinkState::Attached ? "ATTACHED" : "NOT_ATTACHED");
  rep.add("ms_suite", both ? std::string(cipher::suite_name(ms.session().suite)) : "-");
  rep.add("network_suite", both ? std::string(cipher::suite_name(link->session.suite)) : "-");
  rep.add("rewrites", std::to_string(rewrites));
  rep.add("plaintext_uplink", std::to_string(plain) + "/" + std::to_string(sent));
  return rep;
}

// ---- TMTO ----

Bits recover_keystream(std::span<const Bit> ciphertext, std::span<const Bit> known_plaintext) {
  if (ciphertext.size() != known_plaintext.size()) throw DomainError("ciphertext and plaintext lengths differ");
  Bits ks(ciphertext.size());
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = static_cast<Bit>((ciphertext[i] ^ known_plaintext[i]) & 1u);
  return ks;
}

Bits filler_frame() {
  const std::vector<std::uint8_t> bytes(15, 0x2B);
  return bits_from_bytes(bytes, cipher::kHalfBits);
}

std::shared_ptr<const RainbowTable> cached_table(const RainbowParams& params) {
  static std::mutex mu;
  static std::map<RainbowParams, std::shared_ptr<const RainbowTable>> tables;
  std::lock_guard lock(mu);
  auto& slot = tables[params];
  if (!slot) slot = std::make_shared<const RainbowTable>(tmto_build(params));
  return slot;
}

AttackReport run_tmto(World& world, const EntityId& target, const TmtoParams& params) {
  auto rep = start_report("tmto", world);
  const auto start = world.now();
  params.table.validate();
  if (world.variant() == Variant::Legacy && world.config().legacy_kc_bits > params.table.keyspace_bits) {
    rep.precondition_failed = true;
    rep.outcome = "kc_wider_than_table";
    rep.add("legacy_kc_bits", std::to_string(world.config().legacy_kc_bits));
    rep.add("keyspace_bits", std::to_string(params.table.keyspace_bits));
    return rep;
  }

  const auto table = cached_table(params.table);
  const auto net = world.network().id();
  const Bits filler = filler_frame();
  std::vector<sim::Traffic> taps;
  world.set_attacker_hook([&](sim::Envelope& e, World&) {
    if (e.from == net && e.to == target) {
      if (auto* t = e.msg.get<sim::Traffic>()) taps.push_back(*t);
    }
    return sim::HookAction::Pass;
  });

  unsigned sessions = 0;
  std::size_t candidates = 0;
  std::string last_status = "-";
  std::string suite = "-";
  for (; sessions < params.sessions && !rep.succeeded; ++sessions) {
    const auto out = sim::attach(world, target);
    last_status = status_name(out.status);
    if (out.status != AttachStatus::Attached) break;
    suite = std::string(cipher::suite_name(out.negotiated_suite));

    taps.clear();
    world.network().send_traffic(world, target, filler);
    world.network().send_traffic(world, target, filler);
    settle(world, 3);

    const sim::Traffic* f0 = nullptr;
    const sim::Traffic* f1 = nullptr;
    for (const auto& t : taps) {
      if (t.frame == params.table.frame) f0 = &t;
      if (t.frame == params.table.frame + 1) f1 = &t;
    }
    if (f0 && f1 && f0->payload.size() == filler.size() && f1->payload.size() == filler.size()) {
      const auto ks0 = recover_keystream(f0->payload, filler);
      const auto ks1 = recover_keystream(f1->payload, filler);
      const auto found = tmto_lookup(*table, std::span<const Bit>(ks0).first(params.table.keyspace_bits),
                                     std::span<const Bit>(ks1).first(64));
      candidates += found.size();
      // Independent check against the key the network actually uses.
      const auto* link = world.network().link(target);
      for (auto k : found) {
        if (link && link->session.kc == k) rep.succeeded = true;
      }
    }
    sim::detach(world, target);
  }
  world.clear_attacker_hook();

  rep.outcome = rep.succeeded ? "kc_recovered" : (last_status == "ATTACHED" ? "not_in_table" : last_status);
  rep.ticks_used = world.now() - start;
  rep.add("table", params_line(params.table));
  rep.add("coverage", fmt_rate(table->coverage()));
  rep.add("sessions_tried", std::to_string(sessions));
  rep.add("session_suite", suite);
  rep.add("verified_candidates", std::to_string(candidates));
  rep.add("kc_match", rep.succeeded ? "1" : "0");
  return rep;
}

// ---- RACH flood ----

FloodReport rach_flood(World& world, const EntityId& honest, const FloodParams& params) {
  FloodReport r;
  auto& ms = world.ms(honest);
  const auto net = world.network().id();
  const std::uint64_t t0 = world.now();
  const std::uint64_t end = t0 + params.duration;
  // Only attempts that can run their full timeout inside the flood count.
  const std::uint64_t cut = params.duration >= sim::kRachTimeout ? end - sim::kRachTimeout : t0;
  const std::uint64_t interval = std::max<std::uint64_t>(1, params.interval);
  const std::uint64_t limit = sim::kRachTimeout + sim::kDedicatedTimeout + 20;

  bool active = false, counted = false;
  std::uint64_t started = 0;
  std::uint64_t latency_sum = 0;

  while (world.now() < end || active) {
    const auto now = world.now();
    if (now < end) {
      for (unsigned k = 0; k < params.rate; ++k) {
        world.inject("ATK", net, sim::UmMessage{sim::ChannelRequest{static_cast<std::uint8_t>(world.rach_rng().below(256))}});
        ++r.injected;
      }
      if (!active && (now - t0) % interval == 0) {
        ms.start_attach(world);
        active = true;
        started = now;
        counted = now <= cut;
      }
    }
    world.step();
    if (!active) continue;

    const auto* link = world.network().link(honest);
    const bool ok = ms.state() == LinkState::Attached && link && link->state == LinkState::Attached;
    const bool failed = ms.state() == LinkState::Failed || (link && link->state == LinkState::Failed) ||
                        world.now() - started > limit;
    if (ok || failed) {
      if (counted) {
        ++r.attempts;
        if (ok) {
          ++r.successes;
          latency_sum += world.now() - started;
        }
      }
      sim::detach(world, honest);
      active = false;
    }
  }

  for (unsigned i = 0; i < params.recovery_attempts; ++i) {
    const auto out = sim::attach(world, honest);
    ++r.recovery_attempts;
    if (out.status == AttachStatus::Attached) ++r.recovery_successes;
    sim::detach(world, honest);
  }

  r.success_rate = r.attempts ? static_cast<double>(r.successes) / static_cast<double>(r.attempts) : 0.0;
  r.mean_latency = r.successes ? static_cast<double>(latency_sum) / static_cast<double>(r.successes) : 0.0;
  r.recovery_rate =
      r.recovery_attempts ? static_cast<double>(r.recovery_successes) / static_cast<double>(r.recovery_attempts) : 0.0;
  return r;
}

AttackReport run_rach_flood(World& world, const EntityId& honest, const FloodParams& params) {
  auto rep = start_report("rach_flood", world);
  const auto start = world.now();
  const auto r = rach_flood(world, honest, params);
  // A flood "works" when it pushes honest success to 20% or below.
  rep.succeeded = params.rate > 0 && r.attempts > 0 && r.success_rate <= 0.2;
  rep.outcome = params.rate == 0 ? "baseline" : (rep.succeeded ? "service_denied" : "service_available");
  rep.queries_used = r.injected;
  rep.ticks_used = world.now() - start;
  rep.add("rate", std::to_string(params.rate));
  rep.add("duration", std::to_string(params.duration));
  rep.add("rach_slots", std::to_string(world.config().rach_slots));
  rep.add("attempts", std::to_string(r.attempts));
  rep.add("honest_success_rate", fmt_rate(r.success_rate));
  rep.add("mean_latency", fmt_rate(r.mean_latency));
  rep.add("recovery_success_rate", fmt_rate(r.recovery_rate));
  return rep;
}

// ---- SMS spoofing ----

AttackReport sms_spoof(World& world, const EntityId& target, const std::string& originator, std::string_view text) {
  auto rep = start_report("sms_spoof", world);
  const auto start = world.now();
  auto& ms = world.ms(target);
  const auto out = sim::attach(world, target);
  if (out.status != AttachStatus::Attached) {
    rep.precondition_failed = true;
    rep.outcome = "target_not_attached";
    rep.add("attach", status_name(out.status));
    return rep;
  }

  const std::vector<std::uint8_t> body(text.begin(), text.end());
  auto landed = [&](std::size_t from) {
    for (std::size_t i = from; i < ms.inbox().size(); ++i) {
      if (ms.inbox()[i].originator == originator && ms.inbox()[i].text == body) return true;
    }
    return false;
  };

  // First through the network's SMS path without authenticating the sender.
  std::string path = "-";
  auto before = ms.inbox().size();
  auto d = world.network().submit_sms(world, originator, target, text, false);
  if (d.accepted) sim::run_until(world, [&] { return ms.inbox().size() > before; }, 5);
  if (landed(before)) path = "network";

  // Then straight onto the air interface, posing as the serving network.
  if (path == "-") {
    before = ms.inbox().size();
    sim::SmsDeliver forged{originator, body, ms.session().next_frame, false};
    world.inject(world.network().id(), target, sim::UmMessage{forged});
    settle(world, 2);
    if (landed(before)) path = "air";
  }

  rep.succeeded = path != "-";
  rep.outcome = rep.succeeded ? "delivered" : "rejected";
  rep.ticks_used = world.now() - start;
  rep.add("forged_originator", sim::quote(originator));
  rep.add("displayed_originator", rep.succeeded ? sim::quote(ms.inbox().back().originator) : "-");
  rep.add("path", path);
  rep.add("network_dropped", std::to_string(world.network().dropped_sms()));
  rep.add("ms_refusals", std::to_string(ms.refusals().size()));
  return rep;
}

// ---- core compromise ----

std::vector<auth::AuthTriplet> steal_auth_vectors(const sim::AuthorityCore& core, const auth::Imsi& imsi) {
  return core.cache(imsi);
}

AttackReport impersonate_user(World& world, const EntityId& victim, std::vector<auth::AuthTriplet> triplets) {
  auto rep = start_report("stolen_vectors", world);
  const auto start = world.now();
  const auto& v = world.ms(victim);
  const auto stolen = triplets.size();

  sim::MsConfig cfg;
  cfg.id = "ATKMS";
  cfg.profile.imsi = v.imsi();
  auto& atk = world.find_ms(cfg.id) ? world.ms(cfg.id)
                                    : world.add_ms(cfg, std::make_unique<sim::StolenVectors>(std::move(triplets)));
  const auto out = sim::attach(world, atk.id());
  const auto* link = world.network().link(atk.id());
  const bool as_victim = out.status == AttachStatus::Attached && link && link->state == LinkState::Attached &&
                         link->imsi && *link->imsi == v.imsi();

  rep.succeeded = as_victim;
  rep.outcome = status_name(out.status);
  rep.ticks_used = world.now() - start;
  rep.queries_used = stolen;
  rep.add("stolen_vectors", std::to_string(stolen));
  rep.add("claimed_imsi", v.imsi().str());
  rep.add("network_state", link && link->state == LinkState::Attached ? "ATTACHED" : "NOT_ATTACHED");
  rep.add("network_identity_match", as_victim ? "1" : "0");
  return rep;
}

AttackReport run_stolen_vectors(World& world, const EntityId& victim, unsigned warmup) {
  const auto start = world.now();
  for (unsigned i = 0; i < warmup; ++i) {
    sim::attach(world, victim);
    sim::detach(world, victim);
  }
  auto rep = impersonate_user(world, victim, steal_auth_vectors(world.core(), world.ms(victim).imsi()));
  rep.ticks_used = world.now() - start;
  rep.add("triplet_reuse", world.config().triplet_reuse ? "1" : "0");
  return rep;
}

// ---- Kc prediction ----

std::uint64_t predict_next_kc(const std::vector<std::uint64_t>& observed) {
  if (observed.size() < 2) throw DomainError("need at least two Kc observations");
  const auto n = observed.size();
  return observed[n - 1] ^ (observed[n - 1] ^ observed[n - 2]);
}

AttackReport run_kc_prediction(World& world, const EntityId& target, unsigned observations) {
  auto rep = start_report("kc_prediction", world);
  const auto start = world.now();
  if (observations < 2) {
    rep.precondition_failed = true;
    rep.outcome = "insufficient_data";
    return rep;
  }
  const auto imsi = world.ms(target).imsi();
  // The attacker is assumed to learn each session key (e.g. by cracking);
  // the network's own record stands in for that step.
  std::vector<std::uint64_t> seen;
  std::string status = "ATTACHED";
  for (unsigned i = 0; i <= observations; ++i) {
    const auto out = sim::attach(world, target);
    if (out.status != AttachStatus::Attached) {
      status = status_name(out.status);
      break;
    }
    seen.push_back(world.network().kc_history(imsi).back());
    sim::detach(world, target);
  }

  if (seen.size() == observations + 1) {
    const std::vector<std::uint64_t> observed(seen.begin(), seen.end() - 1);
    rep.succeeded = predict_next_kc(observed) == seen.back();
  }
  const auto& pol = world.config().kc_policy;
  rep.outcome = rep.succeeded ? "predicted" : (status == "ATTACHED" ? "mispredicted" : status);
  rep.ticks_used = world.now() - start;
  rep.queries_used = observations;
  rep.add("observations", std::to_string(observations));
  rep.add("kc_policy", pol.mode == sim::KcPolicy::Mode::XorRecycle ? "XOR_RECYCLE" : "FRESH_EACH_SESSION");
  rep.add("prediction_match", rep.succeeded ? "1" : "0");
  return rep;
}

// ---- location ----

AttackReport rrlp_locate(World& world, const EntityId& target) {
  auto rep = start_report("rrlp_locate", world);
  const auto start = world.now();
  auto& fake = ensure_fake(world);
  auto& ms = world.ms(target);
  const auto out = sim::attach(world, target);
  const auto r = sim::rrlp_query(world, fake.id(), target);

  rep.add("attach", status_name(out.status));
  if (const auto* loc = std::get_if<sim::LocationResponse>(&r)) {
    rep.succeeded = *loc == ms.position();
    rep.outcome = "located";
    rep.add("lat", std::to_string(loc->lat));
    rep.add("lon", std::to_string(loc->lon));
  } else {
    rep.outcome = "refused";
    rep.add("refusal", std::get<sim::Refusal>(r).reason);
  }
  rep.add("position_match", rep.succeeded ? "1" : "0");
  rep.ticks_used = world.now() - start;
  return rep;
}

}  // namespace gsmlab::attack
