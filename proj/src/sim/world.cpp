#include "gsmlab/world.hpp"

#include <algorithm>

#include "gsmlab/entities.hpp"

namespace gsmlab::sim {

namespace {

constexpr std::uint64_t kRachStream = 0x52414348;  // "RACH"

std::string_view hook_label(HookAction a, bool injected) {
  if (injected) return "inject";
  switch (a) {
    case HookAction::Pass: return "pass";
    case HookAction::Drop: return "drop";
    case HookAction::Modify: return "mod";
  }
  return "pass";
}

}  // namespace

std::string_view variant_name(Variant v) { return v == Variant::Legacy ? "LEGACY" : "HARDENED"; }

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "LEGACY") return Variant::Legacy;
  if (name == "HARDENED") return Variant::Hardened;
  return std::nullopt;
}

std::string_view attach_status_name(AttachStatus s) {
  switch (s) {
    case AttachStatus::Attached: return "ATTACHED";
    case AttachStatus::AuthMsFailed: return "AUTH_MS_FAILED";
    case AttachStatus::AuthNetworkFailed: return "AUTH_NETWORK_FAILED";
    case AttachStatus::ReplayRejected: return "REPLAY_REJECTED";
    case AttachStatus::RachTimeout: return "RACH_TIMEOUT";
  }
  return "?";
}

World::World(Variant variant, NetworkConfig config, std::uint64_t seed)
    : variant_(variant),
      config_(std::move(config)),
      rng_(seed),
      rach_rng_(derive_seed(seed, kRachStream)),
      core_(std::make_unique<AuthorityCore>()) {
  auto net = std::make_unique<NetworkSide>(*core_);
  network_ = net.get();
  cells_.push_back(network_);
  by_id_[network_->id()] = network_;
  entities_.push_back(std::move(net));
}

World::~World() = default;

MobileStation& World::add_ms(const MsConfig& cfg) {
  core_->enroll(cfg.profile);
  return add_ms(cfg, std::make_unique<SimCard>(cfg.profile));
}

MobileStation& World::add_ms(const MsConfig& cfg, std::unique_ptr<Credential> credential) {
  if (cfg.id.empty() || by_id_.count(cfg.id)) throw DomainError("duplicate or empty entity id: " + cfg.id);
  auto ms = std::make_unique<MobileStation>(cfg, std::move(credential));
  auto* raw = ms.get();
  by_id_[cfg.id] = raw;
  entities_.push_back(std::move(ms));
  return *raw;
}

FakeBts& World::add_fake_bts(int priority) {
  if (fake_) throw DomainError("world already has a fake BTS");
  auto f = std::make_unique<FakeBts>("FBTS", priority);
  fake_ = f.get();
  cells_.push_back(fake_);
  by_id_[fake_->id()] = fake_;
  entities_.push_back(std::move(f));
  return *fake_;
}

MobileStation* World::find_ms(const EntityId& id) {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : dynamic_cast<MobileStation*>(it->second);
}

MobileStation& World::ms(const EntityId& id) {
  auto* m = find_ms(id);
  if (!m) throw DomainError("no mobile station " + id);
  return *m;
}

Cell* World::cell(const EntityId& id) {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : dynamic_cast<Cell*>(it->second);
}

Cell& World::best_cell() {
  Cell* best = cells_.front();
  for (auto* c : cells_) {
    if (c->priority() > best->priority()) best = c;
  }
  return *best;
}

void World::enqueue(const EntityId& from, const EntityId& to, UmMessage msg, bool injected) {
  Envelope env{from, to, std::move(msg), clock_ + 1, seq_++, injected};
  auto key = std::pair{env.deliver_tick, env.seq};
  queue_.emplace(key, std::move(env));
}

void World::send(const EntityId& from, const EntityId& to, UmMessage msg) {
  enqueue(from, to, std::move(msg), false);
}

void World::inject(const EntityId& from, const EntityId& to, UmMessage msg) {
  enqueue(from, to, std::move(msg), true);
}

void World::deliver(const Envelope& env) {
  auto it = by_id_.find(env.to);
  if (it != by_id_.end()) it->second->on_message(env, *this);
}

std::vector<std::string> World::step() {
  std::vector<std::string> events;
  std::map<EntityId, std::vector<Envelope>> rach;

  while (!queue_.empty() && queue_.begin()->first.first <= clock_) {
    Envelope env = std::move(queue_.begin()->second);
    queue_.erase(queue_.begin());

    HookAction action = HookAction::Pass;
    if (hook_ && !env.injected) action = hook_(env, *this);

    std::string line = "tick=" + std::to_string(clock_) + " dir=" + env.from + "->" + env.to +
                       " msg=" + render(env.msg) + " attacker=" + std::string(hook_label(action, env.injected));
    if (trace_enabled_) trace_.push_back(line);
    events.push_back(std::move(line));

    if (action == HookAction::Drop) continue;
    if (env.msg.get<ChannelRequest>() && cell(env.to)) {
      rach[env.to].push_back(std::move(env));
      continue;
    }
    deliver(env);
  }

  // Each request picks a slot uniformly; a slot with more than one request
  // is lost for all of them.
  for (auto& [cell_id, requests] : rach) {
    const unsigned slots = std::max(1u, cell(cell_id)->rach_slots(*this));
    std::vector<unsigned> slot(requests.size());
    std::vector<unsigned> load(slots, 0);
    for (std::size_t i = 0; i < requests.size(); ++i) {
      slot[i] = static_cast<unsigned>(rach_rng_.below(slots));
      ++load[slot[i]];
    }
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (load[slot[i]] == 1) deliver(requests[i]);
    }
  }

  for (std::size_t i = 0; i < entities_.size(); ++i) entities_[i]->on_tick(*this);
  ++clock_;
  return events;
}

std::vector<std::string> step(World& world) { return world.step(); }

bool run_until(World& world, const std::function<bool()>& done, std::uint64_t max_ticks) {
  for (std::uint64_t i = 0; i < max_ticks; ++i) {
    if (done()) return true;
    world.step();
  }
  return done();
}

AttachOutcome attach(World& world, const EntityId& ms, Variant variant) {
  world.set_variant(variant);
  return attach(world, ms);
}

AttachOutcome attach(World& world, const EntityId& id) {
  auto& ms = world.ms(id);
  ms.start_attach(world);
  Cell* cell = world.cell(ms.serving());
  const std::uint64_t start = world.now();
  const std::uint64_t limit = kRachTimeout + kDedicatedTimeout + 20;

  auto outcome = [&](AttachStatus s) {
    return AttachOutcome{s, s == AttachStatus::Attached ? ms.session().suite : CipherSuite::None,
                         world.now() - start};
  };

  while (true) {
    world.step();
    if (ms.state() == LinkState::Failed) return outcome(*ms.failure());
    const Link* link = cell->link(id);
    if (link && link->state == LinkState::Failed) {
      ms.detach();
      return outcome(*link->failure);
    }
    if (ms.state() == LinkState::Attached && link && link->state == LinkState::Attached) {
      return outcome(AttachStatus::Attached);
    }
    if (world.now() - start > limit) {
      ms.detach();
      return outcome(AttachStatus::AuthNetworkFailed);
    }
  }
}

void detach(World& world, const EntityId& id) {
  auto& ms = world.ms(id);
  if (Cell* c = world.cell(ms.serving())) c->drop_link(id);
  ms.detach();
}

DeliveryRecord send_sms(World& world, const std::string& from_address, const EntityId& to,
                        std::string_view text) {
  DeliveryRecord rec;
  auto& ms = world.ms(to);
  const auto before = ms.inbox().size();
  auto d = world.network().submit_sms(world, from_address, to, text, true);
  rec.on_air = d.on_air;
  if (!d.accepted) return rec;
  run_until(world, [&] { return ms.inbox().size() > before; }, 5);
  if (ms.inbox().size() > before) {
    rec.delivered = true;
    rec.displayed_originator = ms.inbox().back().originator;
    rec.text = ms.inbox().back().text;
  }
  return rec;
}

RrlpResult rrlp_query(World& world, const EntityId& requester, const EntityId& target) {
  auto& ms = world.ms(target);
  const auto refusals = ms.refusals().size();
  std::function<std::optional<LocationResponse>()> result;
  if (requester == world.network().id()) {
    auto& net = world.network();
    net.request_location(world, target);
    result = [&net, target] { return net.location(target); };
  } else if (world.fake_bts() && requester == world.fake_bts()->id()) {
    auto* fake = world.fake_bts();
    fake->request_location(world, target);
    result = [fake, target] { return fake->location(target); };
  } else {
    throw DomainError("unknown requester " + requester);
  }
  run_until(world, [&] { return result().has_value() || ms.refusals().size() > refusals; }, 5);
  if (auto loc = result()) return *loc;
  if (ms.refusals().size() > refusals) return Refusal{ms.refusals().back()};
  return Refusal{"no_response"};
}

void recycle_kc_policy(World& world, KcPolicy policy) { world.config().kc_policy = policy; }

}  // namespace gsmlab::sim
