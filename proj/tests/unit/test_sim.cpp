#include <doctest.h>

#include "gsmlab/entities.hpp"

using namespace gsmlab;
using namespace gsmlab::sim;

namespace {

MsConfig ms_config(const std::string& id, std::uint64_t n) {
  MsConfig c;
  c.id = id;
  char digits[16];
  std::snprintf(digits, sizeof digits, "0010100%08llu", static_cast<unsigned long long>(n));
  c.profile.imsi = auth::Imsi(digits);
  c.profile.ki = Rng(1000 + n).block128();
  c.position = {48858370, 2294481};
  return c;
}

std::unique_ptr<World> make_world(Variant v, std::uint64_t seed, NetworkConfig cfg = {}) {
  auto w = std::make_unique<World>(v, std::move(cfg), seed);
  w->add_ms(ms_config("MS1", 1));
  return w;
}

Bits random_bits(Rng& rng, std::size_t n) {
  Bits b(n);
  for (auto& x : b) x = static_cast<Bit>(rng.below(2));
  return b;
}

std::vector<std::string> kinds(const std::vector<std::string>& trace) {
  std::vector<std::string> out;
  for (const auto& line : trace) {
    auto p = line.find("msg=") + 4;
    out.push_back(line.substr(p, line.find('{', p) - p));
  }
  return out;
}

}  // namespace

TEST_CASE("step on an empty world advances the clock only") {
  World w(Variant::Legacy, {}, 1);
  CHECK(w.step().empty());
  CHECK(w.now() == 1);
  CHECK(w.trace().empty());
}

TEST_CASE("legacy attach happy path") {
  auto w = make_world(Variant::Legacy, 7);
  const auto out = attach(*w, "MS1", Variant::Legacy);
  CHECK(out.status == AttachStatus::Attached);
  CHECK(out.negotiated_suite == CipherSuite::A5_1);
  CHECK(out.ticks_elapsed > 0);

  const auto k = kinds(w->trace());
  const std::vector<std::string> expected{"ChannelRequest", "ImmediateAssignment", "IdentityRequest",
                                          "IdentityResponse", "AuthRequest", "AuthResponse",
                                          "CipherModeCommand", "CipherModeComplete"};
  CHECK(k == expected);
  // one-sided: the MS never checked anything about the network
  CHECK(w->ms("MS1").network_checks() == 0);
  CHECK_FALSE(w->ms("MS1").cipher_indicator(*w).has_value());
  for (const auto& line : w->trace()) CHECK(line.find("mac=") == std::string::npos);
}

TEST_CASE("legacy network picks its configured suite") {
  NetworkConfig cfg;
  cfg.suite_preference = {CipherSuite::None};
  auto w = make_world(Variant::Legacy, 7, cfg);
  CHECK(attach(*w, "MS1").negotiated_suite == CipherSuite::None);

  cfg.suite_preference = {CipherSuite::A5_2, CipherSuite::A5_1};
  auto w2 = make_world(Variant::Legacy, 7, cfg);
  CHECK(attach(*w2, "MS1").negotiated_suite == CipherSuite::A5_2);
}

TEST_CASE("hardened attach happy path") {
  auto w = make_world(Variant::Hardened, 7);
  const auto out = attach(*w, "MS1", Variant::Hardened);
  CHECK(out.status == AttachStatus::Attached);
  CHECK(out.negotiated_suite == CipherSuite::Strong);
  CHECK(w->ms("MS1").network_checks() == 1);
  CHECK(w->ms("MS1").cipher_indicator(*w) == CipherSuite::Strong);
  // every control message after key agreement carries a MAC
  for (const auto& line : w->trace()) {
    if (line.find("CipherMode") != std::string::npos) CHECK(line.find("mac=") != std::string::npos);
  }
  // same number of ticks as legacy, so RACH behaviour lines up across variants
  auto l = make_world(Variant::Legacy, 7);
  CHECK(attach(*l, "MS1").ticks_elapsed == out.ticks_elapsed);
}

TEST_CASE("unknown subscriber fails authentication") {
  World w(Variant::Legacy, {}, 3);
  w.add_ms(ms_config("MS1", 1), std::make_unique<SimCard>(ms_config("MS1", 1).profile));
  CHECK(attach(w, "MS1").status == AttachStatus::AuthMsFailed);
}

TEST_CASE("wrong Ki fails on the network side") {
  World w(Variant::Legacy, {}, 3);
  auto cfg = ms_config("MS1", 1);
  w.core().enroll(cfg.profile);
  auto wrong = cfg.profile;
  wrong.ki[0] ^= 1;
  w.add_ms(cfg, std::make_unique<SimCard>(wrong));
  CHECK(attach(w, "MS1").status == AttachStatus::AuthMsFailed);

  World h(Variant::Hardened, {}, 3);
  h.core().enroll(cfg.profile);
  h.add_ms(cfg, std::make_unique<SimCard>(wrong));
  // the MS notices first: the network's response does not match its Ki
  CHECK(attach(h, "MS1").status == AttachStatus::AuthNetworkFailed);
}

TEST_CASE("determinism: equal seeds give byte-identical traces") {
  auto run = [](std::uint64_t seed, Variant v) {
    auto w = make_world(v, seed);
    w->add_ms(ms_config("MS2", 2));
    attach(*w, "MS1");
    attach(*w, "MS2");
    Rng rng(seed);
    w->ms("MS1").send_traffic(*w, random_bits(rng, 114));
    send_sms(*w, "ALICE", "MS2", "hello");
    rrlp_query(*w, "NET", "MS1");
    for (int i = 0; i < 5; ++i) w->step();
    return w->trace();
  };
  for (auto v : {Variant::Legacy, Variant::Hardened}) {
    CHECK(run(42, v) == run(42, v));
    CHECK(run(42, v) != run(43, v));
  }
}

TEST_CASE("drop-all hook starves every state machine") {
  auto w = make_world(Variant::Legacy, 5);
  int seen = 0;
  w->set_attacker_hook([&](Envelope&, World&) {
    ++seen;
    return HookAction::Drop;
  });
  const auto out = attach(*w, "MS1");
  CHECK(out.status == AttachStatus::RachTimeout);
  CHECK(seen > 0);
  CHECK(w->network().link("MS1") == nullptr);
  for (const auto& line : w->trace()) {
    CHECK(line.find("attacker=drop") != std::string::npos);
    CHECK(line.find("dir=MS1->NET") != std::string::npos);
  }
}

TEST_CASE("trace line format") {
  auto w = make_world(Variant::Legacy, 9);
  attach(*w, "MS1");
  const auto& first = w->trace().front();
  CHECK(first.rfind("tick=", 0) == 0);
  CHECK(first.find(" dir=MS1->NET msg=ChannelRequest{ref=") != std::string::npos);
  CHECK(first.substr(first.size() - 13) == "attacker=pass");

  UmMessage m{IdentityResponse{"00101\"x", suite_bit(CipherSuite::A5_1) | suite_bit(CipherSuite::None), std::nullopt}};
  CHECK(render(m) == "IdentityResponse{identity=\"00101\\\"x\",suites=NONE|A5_1}");
}

TEST_CASE("hardened replay corpus is rejected") {
  SUBCASE("network-side AuthRequest replayed to the MS") {
    auto w = make_world(Variant::Hardened, 11);
    std::optional<UmMessage> recorded;
    w->set_attacker_hook([&](Envelope& e, World&) {
      if (e.msg.get<AuthRequest>()) {
        if (!recorded) {
          recorded = e.msg;
        } else {
          e.msg = *recorded;
          return HookAction::Modify;
        }
      }
      return HookAction::Pass;
    });
    CHECK(attach(*w, "MS1").status == AttachStatus::Attached);
    detach(*w, "MS1");
    CHECK(attach(*w, "MS1").status == AttachStatus::ReplayRejected);
  }
  SUBCASE("MS nonce replayed to the network") {
    auto w = make_world(Variant::Hardened, 12);
    std::optional<UmMessage> recorded;
    w->set_attacker_hook([&](Envelope& e, World&) {
      if (e.msg.get<IdentityResponse>()) {
        if (!recorded) {
          recorded = e.msg;
        } else {
          e.msg = *recorded;
          return HookAction::Modify;
        }
      }
      return HookAction::Pass;
    });
    CHECK(attach(*w, "MS1").status == AttachStatus::Attached);
    detach(*w, "MS1");
    CHECK(attach(*w, "MS1").status == AttachStatus::ReplayRejected);
  }
  SUBCASE("AuthResponse from an earlier session") {
    auto w = make_world(Variant::Hardened, 13);
    std::optional<UmMessage> recorded;
    w->set_attacker_hook([&](Envelope& e, World&) {
      if (e.msg.get<AuthResponse>()) {
        if (!recorded) {
          recorded = e.msg;
        } else {
          e.msg = *recorded;
          return HookAction::Modify;
        }
      }
      return HookAction::Pass;
    });
    CHECK(attach(*w, "MS1").status == AttachStatus::Attached);
    detach(*w, "MS1");
    CHECK(attach(*w, "MS1").status == AttachStatus::ReplayRejected);
  }
}

TEST_CASE("legacy acceptance: any responder with the right message shape attaches the MS") {
  auto w = make_world(Variant::Legacy, 21);
  w->add_fake_bts();
  const auto out = attach(*w, "MS1");
  CHECK(out.status == AttachStatus::Attached);
  CHECK(out.negotiated_suite == CipherSuite::None);
  CHECK(w->ms("MS1").serving() == "FBTS");
  CHECK(w->ms("MS1").network_checks() == 0);
  CHECK(w->fake_bts()->captured_identities().front() == w->ms("MS1").imsi().str());
}

TEST_CASE("hardened soundness: a fake BTS without Ki never attaches") {
  int successes = 0;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    World w(Variant::Hardened, {}, t);
    w.set_trace_enabled(false);
    w.add_ms(ms_config("MS1", 1));
    w.add_fake_bts();
    const auto out = attach(w, "MS1");
    if (out.status == AttachStatus::Attached) ++successes;
    CHECK(out.status == AttachStatus::AuthNetworkFailed);
  }
  CHECK(successes == 0);
}

TEST_CASE("cipher honesty") {
  for (auto suite : {CipherSuite::None, CipherSuite::A5_1, CipherSuite::A5_2}) {
    NetworkConfig cfg;
    cfg.suite_preference = {suite};
    auto w = make_world(Variant::Legacy, 31, cfg);
    REQUIRE(attach(*w, "MS1").negotiated_suite == suite);
    Rng rng(5);
    std::vector<Bits> down;
    for (int i = 0; i < 4; ++i) {
      w->ms("MS1").send_traffic(*w, random_bits(rng, 114));
      down.push_back(random_bits(rng, 60 + i));
      w->network().send_traffic(*w, "MS1", down.back());
    }
    for (int i = 0; i < 3; ++i) w->step();
    CHECK(w->network().received_traffic("MS1") == w->ms("MS1").sent_traffic());
    CHECK(w->ms("MS1").received_traffic() == down);
    for (const auto& line : w->trace()) {
      if (line.find("msg=Traffic") == std::string::npos) continue;
      CHECK((line.find("ciphered=1") != std::string::npos) == (suite != CipherSuite::None));
    }
  }
  auto h = make_world(Variant::Hardened, 31);
  REQUIRE(attach(*h, "MS1").negotiated_suite == CipherSuite::Strong);
  Rng rng(6);
  h->ms("MS1").send_traffic(*h, random_bits(rng, 114));
  h->step();
  h->step();
  CHECK(h->network().received_traffic("MS1") == h->ms("MS1").sent_traffic());
  CHECK_THROWS_AS(h->ms("MS1").send_traffic(*h, Bits(115)), DomainError);
}

TEST_CASE("send_sms") {
  SUBCASE("suite NONE: the tap reads the text") {
    NetworkConfig cfg;
    cfg.suite_preference = {CipherSuite::None};
    auto w = make_world(Variant::Legacy, 41, cfg);
    attach(*w, "MS1");
    const auto rec = send_sms(*w, "BOB", "MS1", "meet at 6");
    CHECK(rec.delivered);
    CHECK(rec.on_air->text == std::vector<std::uint8_t>{'m', 'e', 'e', 't', ' ', 'a', 't', ' ', '6'});
    CHECK(std::string(rec.text.begin(), rec.text.end()) == "meet at 6");
  }
  SUBCASE("suite A5_1: the tap reads ciphertext") {
    auto w = make_world(Variant::Legacy, 42);
    attach(*w, "MS1");
    const std::string text(40, 'x');
    const auto rec = send_sms(*w, "BOB", "MS1", text);
    CHECK(rec.delivered);
    CHECK(rec.on_air->ciphered);
    CHECK(rec.on_air->text != std::vector<std::uint8_t>(text.begin(), text.end()));
    CHECK(std::string(rec.text.begin(), rec.text.end()) == text);
  }
  SUBCASE("originator verbatim in legacy") {
    auto w = make_world(Variant::Legacy, 43);
    attach(*w, "MS1");
    CHECK(send_sms(*w, "+1 (555) <evil>", "MS1", "x").displayed_originator == "+1 (555) <evil>");
  }
  SUBCASE("not attached") {
    auto w = make_world(Variant::Legacy, 44);
    CHECK_FALSE(send_sms(*w, "BOB", "MS1", "x").delivered);
  }
  SUBCASE("hardened delivery works for authenticated submissions") {
    auto w = make_world(Variant::Hardened, 45);
    attach(*w, "MS1");
    const auto rec = send_sms(*w, "BOB", "MS1", "hi");
    CHECK(rec.delivered);
    CHECK(rec.displayed_originator == "BOB");
    CHECK_FALSE(w->network().submit_sms(*w, "BANK", "MS1", "x", false).accepted);
  }
}

TEST_CASE("rrlp_query") {
  auto fake_legacy = make_world(Variant::Legacy, 51);
  fake_legacy->add_fake_bts();
  attach(*fake_legacy, "MS1");
  auto r = rrlp_query(*fake_legacy, "FBTS", "MS1");
  REQUIRE(std::holds_alternative<LocationResponse>(r));
  CHECK(std::get<LocationResponse>(r) == fake_legacy->ms("MS1").position());

  // a hardened MS attached to the genuine network still refuses a rogue cell
  auto fake_hard = make_world(Variant::Hardened, 52);
  REQUIRE(attach(*fake_hard, "MS1").status == AttachStatus::Attached);
  fake_hard->add_fake_bts();
  auto rf = rrlp_query(*fake_hard, "FBTS", "MS1");
  REQUIRE(std::holds_alternative<Refusal>(rf));
  CHECK(std::get<Refusal>(rf).reason == "rrlp_unauthenticated");

  // and one that never managed to attach anywhere
  auto lone = make_world(Variant::Hardened, 54);
  lone->add_fake_bts();
  CHECK(attach(*lone, "MS1").status == AttachStatus::AuthNetworkFailed);
  auto rl = rrlp_query(*lone, "FBTS", "MS1");
  REQUIRE(std::holds_alternative<Refusal>(rl));
  CHECK(std::get<Refusal>(rl).reason == "rrlp_unauthenticated");

  auto genuine = make_world(Variant::Hardened, 53);
  attach(*genuine, "MS1");
  auto rg = rrlp_query(*genuine, "NET", "MS1");
  REQUIRE(std::holds_alternative<LocationResponse>(rg));
  CHECK(std::get<LocationResponse>(rg) == genuine->ms("MS1").position());
}

TEST_CASE("Kc policy") {
  const std::uint64_t m = 0x00FF00FF12345678ull;
  auto w = make_world(Variant::Legacy, 61);
  const auto imsi = w->ms("MS1").imsi();
  attach(*w, "MS1");
  detach(*w, "MS1");
  attach(*w, "MS1");
  auto h = w->network().kc_history(imsi);
  REQUIRE(h.size() == 2);
  CHECK(h[1] != h[0]);
  CHECK(h[1] != (h[0] ^ m));

  recycle_kc_policy(*w, KcPolicy::xor_recycle(m));
  detach(*w, "MS1");
  attach(*w, "MS1");
  h = w->network().kc_history(imsi);
  REQUIRE(h.size() == 3);
  CHECK(h[2] == (h[1] ^ m));
  CHECK(w->ms("MS1").last_kc() == h[2]);
  // both ends still agree on the key
  Rng rng(1);
  w->ms("MS1").send_traffic(*w, random_bits(rng, 100));
  w->step();
  w->step();
  CHECK(w->network().received_traffic("MS1") == w->ms("MS1").sent_traffic());
}

TEST_CASE("RACH contention below capacity always resolves") {
  for (auto v : {Variant::Legacy, Variant::Hardened}) {
    World w(v, {}, 71);
    std::vector<std::string> ids;
    for (int i = 0; i < 6; ++i) {
      ids.push_back("MS" + std::to_string(i));
      w.add_ms(ms_config(ids.back(), static_cast<std::uint64_t>(i)));
    }
    for (const auto& id : ids) w.ms(id).start_attach(w);
    run_until(w, [&] {
      for (const auto& id : ids) {
        if (w.ms(id).state() != LinkState::Attached) return false;
      }
      return true;
    }, 200);
    for (const auto& id : ids) CHECK(w.ms(id).state() == LinkState::Attached);
  }
}
