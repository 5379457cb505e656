#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gsmlab/lab.hpp"

using namespace gsmlab;
using namespace gsmlab::lab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMinimal = R"(scenario.variant = LEGACY
ms.A.imsi = 001010000000001
ms.A.ki = 000102030405060708090a0b0c0d0e0f
)";

std::size_t error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string strip_wall_time(std::string s) { return s.substr(0, s.rfind("wall_time_s")); }

}  // namespace

TEST_CASE("minimal scenario gets defaults") {
  const auto s = parse_scenario(kMinimal);
  CHECK(s.name == "unnamed");
  CHECK(s.variant == Variant::Legacy);
  CHECK(s.seed == 0);
  REQUIRE(s.ms.size() == 1);
  CHECK(s.ms[0].lat == 0);
  CHECK(s.network == sim::NetworkConfig{});
  CHECK(s.attacks.empty());

  CHECK_THROWS_AS(parse_scenario(std::string(kMinimal) + "scenario.variant = HARDENED\n"), ParseError);
}

TEST_CASE("variant HARDENED") {
  const auto s = parse_scenario(R"(scenario.variant = HARDENED
ms.A.imsi = 001010000000001
ms.A.ki = 000102030405060708090a0b0c0d0e0f
)");
  CHECK(s.variant == Variant::Hardened);
}

TEST_CASE("parse errors carry the line number") {
  const std::string base = kMinimal;
  CHECK(error_line(base + "attack.tmto.chain_length = -1\n") == 4);
  CHECK(error_line(base + "network.colour = 3\n") == 4);
  CHECK(error_line(base + "ms.A.lat = north\n") == 4);
  CHECK(error_line(base + "attack.tmto.bogus = 1\n") == 4);
  CHECK(error_line(base + "attack.nosuch.target = A\n") == 4);
  CHECK(error_line(base + "attack.fake_bts.target = B\n") == 4);
  CHECK(error_line(base + "network.rach_slots = 0\n") == 4);
  CHECK(error_line(base + "network.kc_policy = SOMETIMES\n") == 4);
  CHECK(error_line(base + "\nms.A.imsi = 001010000000002\n") == 5);
  CHECK(error_line(base + "just words\n") == 4);
  CHECK(error_line("ms.A.imsi = 001010000000001\nms.A.ki = 000102030405060708090a0b0c0d0e0f\n") == 3);
  CHECK(error_line("scenario.variant = LEGACY\n") == 2);
  CHECK(error_line("scenario.variant = LEGACY\nms.A.imsi = 001010000000001\n") == 2);
  CHECK(error_line("scenario.variant = LEGACY\nms.A.imsi = 12\n") == 2);
  CHECK(error_line("scenario.variant = SOMETHING\n") == 1);
}

TEST_CASE("parse-render-parse fixpoint") {
  for (const auto* name : {"legacy_full_sweep", "hardened_full_sweep", "minimal"}) {
    CAPTURE(name);
    const auto text = read_file(std::string(GSMLAB_SCENARIO_DIR) + "/" + name + ".scn");
    REQUIRE_FALSE(text.empty());
    const auto s = parse_scenario(text);
    const auto rendered = render_scenario(s);
    CHECK(parse_scenario(rendered) == s);
    CHECK(render_scenario(parse_scenario(rendered)) == rendered);
  }
  const auto s = parse_scenario(std::string(kMinimal) + "attack.sms_spoof.originator = \"\"\nattack.sms_spoof.text = \" padded \"\n");
  CHECK(s.attacks[0].param("originator").empty());
  CHECK(s.attacks[0].param("text") == " padded ");
  CHECK(parse_scenario(render_scenario(s)) == s);
}

TEST_CASE("matrix rendering") {
  RunReport empty;
  CHECK(render_report(empty, Format::Matrix) == "attack  LEGACY\n");

  RunReport one;
  AttackReport r;
  r.attack_id = "fake_bts";
  r.succeeded = true;
  one.attacks.push_back({"fake_bts", r});
  const auto m = render_report(one, Format::Matrix);
  CHECK(m == "attack    LEGACY\nfake_bts  YES\n");
}

TEST_CASE("runs are deterministic and never print Ki") {
  const auto text = std::string(kMinimal) + R"(scenario.seed = 99
ms.B.imsi = 001010000000002
ms.B.ki = f0e1d2c3b4a5968778695a4b3c2d1e0f
attack.fake_bts.target = A
attack.clone_sim.target = B
attack.clone_sim.access = physical
attack.sms_spoof.target = B
)";
  const auto s = parse_scenario(text);
  const auto a = run_scenario(s);
  const auto b = run_scenario(s);
  CHECK(render_trace(a) == render_trace(b));
  CHECK(strip_wall_time(render_report(a, Format::Text)) == strip_wall_time(render_report(b, Format::Text)));
  CHECK(diff_traces(render_trace(a), render_trace(b)).differences == 0);
  CHECK(a.attacks.size() == 3);
  for (const auto& e : a.attacks) CHECK(e.report.succeeded);

  const auto all = render_trace(a) + render_report(a, Format::Text);
  for (const auto& m : s.ms) {
    auto hex = to_hex(m.ki);
    CHECK(all.find(hex) == std::string::npos);
    for (auto& c : hex) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    CHECK(all.find(hex) == std::string::npos);
  }

  auto other = s;
  other.seed = 100;
  CHECK(diff_traces(render_trace(a), render_trace(run_scenario(other))).differences > 0);
}

TEST_CASE("precondition failures are data") {
  const auto s = parse_scenario(std::string(kMinimal) + "attack.kc_prediction.observations = 1\n");
  const auto r = run_scenario(s);
  REQUIRE(r.attacks.size() == 1);
  CHECK(verdict(r.attacks[0].report) == "PRE");
}
