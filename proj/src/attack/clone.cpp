#include <algorithm>
#include <string>
#include <unordered_map>

#include "gsmlab/attacks.hpp"
#include "gsmlab/entities.hpp"

namespace gsmlab::attack {

namespace {

constexpr std::size_t kMaxResidual = 16;  // per pair, when challenges run out
constexpr int kVerifyChallenges = 3;

std::string truncated(const auth::Output96& o, std::size_t n) {
  return std::string(reinterpret_cast<const char*>(o.data()), n);
}

bool same_prefix(const auth::Output96& a, const auth::Output96& b, std::size_t n) {
  return std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), b.begin());
}

}  // namespace

auth::Output96 SimOracle::model(const Block128& ki, const Block128& rand) const {
  return auth::to_output96(auth::mini_comp128(ki, rand));
}

PhysicalSimOracle::PhysicalSimOracle(const Block128& ki, auth::AuthSuite suite)
    : card_([card = sim::SimCard(auth::SimProfile{auth::Imsi{}, ki, std::nullopt}), suite](const Block128& rand) {
        return card.run_a3a8(rand, suite);
      }) {}

OtaSimOracle::OtaSimOracle(World& world, const EntityId& target) : world_(world), target_(target) {
  auto* fake = world.fake_bts();
  if (!fake) fake = &world.add_fake_bts();
  fake->set_hold_after_identity(true);
  auto& ms = world.ms(target);
  ms.start_attach(world);
  ready_ = sim::run_until(
      world,
      [&] {
        const auto* l = fake->link(target);
        return (l && l->state == sim::LinkState::WaitAuth) || ms.state() == sim::LinkState::Failed;
      },
      sim::kRachTimeout + 10);
  const auto* l = fake->link(target);
  ready_ = ready_ && l && l->state == sim::LinkState::WaitAuth && ms.serving() == fake->id();
}

std::optional<auth::Output96> OtaSimOracle::query(const Block128& rand) {
  if (!ready_) return std::nullopt;
  auto* fake = world_.fake_bts();
  auto& ms = world_.ms(target_);
  const auto before = fake->answers().size();
  fake->send_auth_request(world_, target_, rand);
  sim::run_until(
      world_, [&] { return fake->answers().size() > before || ms.state() == sim::LinkState::Failed; }, 6);
  if (fake->answers().size() == before) {
    ready_ = false;
    return std::nullopt;
  }
  const auto sres = fake->answers().back().second;
  auth::Output96 out{};
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(sres >> (24 - 8 * i));
  return out;
}

CloneResult clone_sim(SimOracle& oracle, std::uint64_t budget, Rng& rng) {
  CloneResult res;
  const std::size_t nb = oracle.observed_bytes();
  const auto& sb = auth::sboxes();

  auto ask = [&](const Block128& rand) -> std::optional<auth::Output96> {
    if (res.queries_used >= budget) {
      res.failure = "budget_exhausted";
      return std::nullopt;
    }
    ++res.queries_used;
    auto out = oracle.query(rand);
    if (!out) res.failure = "oracle_refused";
    return out;
  };

  if (budget == 0) {
    res.failure = "budget_exhausted";
    return res;
  }

  std::array<std::vector<std::uint16_t>, 8> survivors;
  for (unsigned i = 0; i < 8; ++i) {
    PairProgress prog;
    prog.pair = i;
    const auto base = rng.block128();

    // All challenge byte pairs (c, d) in random order. Values >= 128 alias
    // lower ones in the first substitution, so they add nothing.
    std::vector<std::uint16_t> order(128 * 128);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<std::uint16_t>(k);
    for (std::size_t k = order.size() - 1; k > 0; --k) std::swap(order[k], order[rng.below(k + 1)]);

    std::vector<std::uint16_t> cand(65536);
    for (std::size_t k = 0; k < cand.size(); ++k) cand[k] = static_cast<std::uint16_t>(k);
    std::unordered_map<std::string, std::uint16_t> seen;

    for (const auto cd : order) {
      if (cand.size() == 1) break;
      Block128 r = base;
      r[i] = static_cast<std::uint8_t>(cd >> 7);
      r[i + 8] = static_cast<std::uint8_t>(cd & 127);
      const auto out = ask(r);
      if (!out) {
        prog.candidates = cand.size();
        res.progress.push_back(prog);
        return res;
      }
      ++prog.queries;
      auto [it, inserted] = seen.emplace(truncated(*out, nb), cd);
      if (inserted) continue;

      // Everything but pair i is fixed, so equal outputs mean equal
      // (truncated) contributions from pair i.
      ++prog.collisions;
      const auto c1 = static_cast<std::uint8_t>(it->second >> 7), d1 = static_cast<std::uint8_t>(it->second & 127);
      const auto c2 = static_cast<std::uint8_t>(cd >> 7), d2 = static_cast<std::uint8_t>(cd & 127);
      std::erase_if(cand, [&](std::uint16_t ab) {
        const auto a = static_cast<std::uint8_t>(ab >> 8), b = static_cast<std::uint8_t>(ab);
        const auto p1 = auth::pair_compress(a, b, c1, d1, sb), p2 = auth::pair_compress(a, b, c2, d2, sb);
        if (p1 == p2) return false;
        return !same_prefix(auth::pair_contribution(i, p1, sb), auth::pair_contribution(i, p2, sb), nb);
      });
    }
    prog.candidates = cand.size();
    res.progress.push_back(prog);
    if (cand.size() > kMaxResidual) {
      res.failure = "pair_" + std::to_string(i) + "_unresolved";
      return res;
    }
    survivors[i] = std::move(cand);
  }

  std::vector<std::pair<Block128, auth::Output96>> checks;
  for (int k = 0; k < kVerifyChallenges; ++k) {
    const auto r = rng.block128();
    const auto out = ask(r);
    if (!out) return res;
    checks.emplace_back(r, *out);
  }

  // Mixed-radix walk over the per-pair survivors.
  std::array<std::size_t, 8> idx{};
  while (true) {
    Block128 ki{};
    for (unsigned i = 0; i < 8; ++i) {
      ki[i] = static_cast<std::uint8_t>(survivors[i][idx[i]] >> 8);
      ki[i + 8] = static_cast<std::uint8_t>(survivors[i][idx[i]]);
    }
    const bool ok = std::all_of(checks.begin(), checks.end(),
                                [&](const auto& c) { return same_prefix(oracle.model(ki, c.first), c.second, nb); });
    if (ok) {
      res.ki = ki;
      res.failure.clear();
      return res;
    }
    unsigned i = 0;
    while (i < 8 && ++idx[i] == survivors[i].size()) idx[i++] = 0;
    if (i == 8) break;
  }
  res.failure = "verification_failed";
  return res;
}

AttackReport run_clone_sim(World& world, const EntityId& target, std::uint64_t budget, CloneAccess access) {
  AttackReport rep;
  rep.attack_id = "clone_sim";
  rep.variant = world.variant();
  const auto start = world.now();
  auto& ms = world.ms(target);
  auto* card = dynamic_cast<sim::SimCard*>(&ms.credential());
  if (!card) {
    rep.precondition_failed = true;
    rep.outcome = "target_has_no_sim";
    return rep;
  }
  const auto suite = world.variant() == Variant::Legacy ? auth::AuthSuite::MiniComp128 : auth::AuthSuite::Hardened;
  Rng rng(world.rng().next());

  CloneResult res;
  if (access == CloneAccess::Physical) {
    PhysicalSimOracle oracle([card, suite](const Block128& r) { return card->run_a3a8(r, suite); });
    res = clone_sim(oracle, budget, rng);
  } else {
    OtaSimOracle oracle(world, target);
    res = clone_sim(oracle, budget, rng);
  }

  const auto& planted = card->profile().ki;
  const bool match = res.ki && *res.ki == planted;
  rep.succeeded = match;
  rep.outcome = match ? "ki_recovered" : (res.failure.empty() ? "ki_mismatch" : res.failure);
  rep.queries_used = res.queries_used;
  rep.ticks_used = world.now() - start;
  rep.add("access", access == CloneAccess::Physical ? "physical" : "ota");
  rep.add("budget", std::to_string(budget));
  std::size_t solved = 0;
  for (const auto& p : res.progress) solved += p.candidates <= 1;
  rep.add("pairs_solved", std::to_string(solved) + "/8");
  std::string per_pair;
  for (const auto& p : res.progress) {
    if (!per_pair.empty()) per_pair += ',';
    per_pair += std::to_string(p.queries) + ":" + std::to_string(p.candidates);
  }
  rep.add("pair_queries_candidates", per_pair.empty() ? "-" : per_pair);
  rep.add("planted_ki_fp", auth::key_fingerprint(planted));
  rep.add("recovered_ki_fp", res.ki ? auth::key_fingerprint(*res.ki) : "-");
  rep.add("ki_match", match ? "1" : "0");
  return rep;
}

}  // namespace gsmlab::attack
