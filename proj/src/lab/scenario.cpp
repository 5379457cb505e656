#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "gsmlab/lab.hpp"

namespace gsmlab::lab {

namespace {

enum class Kind : std::uint8_t { Target, Uint, Bool, Suite, Text, Access };

struct ParamDef {
  const char* name;
  Kind kind;
  const char* def;
  std::uint64_t min = 0;
  std::uint64_t max = UINT32_MAX;
};

const std::map<std::string, std::vector<ParamDef>>& schema() {
  static const std::map<std::string, std::vector<ParamDef>> s{
      {"fake_bts", {{"target", Kind::Target, ""}, {"traffic_frames", Kind::Uint, "3", 0, 1000}}},
      {"mitm_downgrade",
       {{"target", Kind::Target, ""},
        {"rewrite", Kind::Bool, "true"},
        {"rewrite_to", Kind::Suite, "NONE"},
        {"traffic_frames", Kind::Uint, "3", 0, 1000}}},
      {"rrlp_locate", {{"target", Kind::Target, ""}}},
      {"sms_spoof",
       {{"target", Kind::Target, ""},
        {"originator", Kind::Text, "BANK-0800"},
        {"text", Kind::Text, "Your account is locked. Call 0800 555 0100."}}},
      {"stolen_vectors", {{"target", Kind::Target, ""}, {"warmup", Kind::Uint, "3", 0, 1000}}},
      {"kc_prediction", {{"target", Kind::Target, ""}, {"observations", Kind::Uint, "2", 0, 1000}}},
      {"clone_sim",
       {{"target", Kind::Target, ""}, {"budget", Kind::Uint, "50000", 0, 10000000}, {"access", Kind::Access, "ota"}}},
      {"tmto",
       {{"target", Kind::Target, ""},
        {"keyspace_bits", Kind::Uint, "20", 1, 24},
        {"chain_length", Kind::Uint, "256", 1, 1u << 20},
        {"chain_count", Kind::Uint, "8192", 0, 1u << 24},
        {"color_count", Kind::Uint, "256", 1, 1u << 20},
        {"table_seed", Kind::Uint, "1", 0, UINT64_MAX},
        {"cipher", Kind::Suite, "A5_1"},
        {"sessions", Kind::Uint, "5", 1, 1000}}},
      {"rach_flood",
       {{"target", Kind::Target, ""},
        {"rate", Kind::Uint, "0", 0, 10000},
        {"duration", Kind::Uint, "200", 1, 1000000},
        {"interval", Kind::Uint, "5", 1, 1000000},
        {"recovery_attempts", Kind::Uint, "5", 0, 1000}}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<std::uint64_t> parse_uint(std::string_view v) {
  std::uint64_t out = 0;
  int base = 10;
  if (v.starts_with("0x") || v.starts_with("0X")) {
    v.remove_prefix(2);
    base = 16;
  }
  if (v.empty()) return std::nullopt;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc{} || p != v.data() + v.size()) return std::nullopt;
  return out;
}

std::optional<std::int64_t> parse_int(std::string_view v) {
  std::int64_t out = 0;
  if (v.empty()) return std::nullopt;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) return std::nullopt;
  return out;
}

std::optional<bool> parse_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  return std::nullopt;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string canonical(const ParamDef& def, const std::string& raw, std::size_t line) {
  auto bad = [&](const std::string& why) {
    return ParseError(line, std::string("attack parameter '") + def.name + "': " + why);
  };
  switch (def.kind) {
    case Kind::Target:
      if (raw.empty()) throw bad("empty target");
      return raw;
    case Kind::Uint: {
      const auto v = parse_uint(raw);
      if (!v) throw bad("expected a non-negative integer, got '" + raw + "'");
      if (*v < def.min || *v > def.max)
        throw bad("out of range [" + std::to_string(def.min) + ", " + std::to_string(def.max) + "]");
      return std::to_string(*v);
    }
    case Kind::Bool:
      if (!parse_bool(raw)) throw bad("expected true or false");
      return raw;
    case Kind::Suite: {
      const auto s = cipher::parse_suite(raw);
      if (!s) throw bad("unknown cipher suite '" + raw + "'");
      return std::string(cipher::suite_name(*s));
    }
    case Kind::Text:
      return unquote(raw);
    case Kind::Access:
      if (raw != "ota" && raw != "physical") throw bad("expected ota or physical");
      return raw;
  }
  return raw;
}

struct PendingAttack {
  std::string label;
  std::string type;
  std::size_t line = 0;
  std::map<std::string, std::pair<std::string, std::size_t>> raw;
};

}  // namespace

const std::string& AttackSpec::param(std::string_view key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  throw DomainError("attack '" + label + "' has no parameter '" + std::string(key) + "'");
}

std::vector<std::string> attack_types() {
  std::vector<std::string> out;
  for (const auto& [k, _] : schema()) out.push_back(k);
  return out;
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  bool have_variant = false;
  std::set<std::string> seen;
  std::vector<std::pair<MsSpec, std::size_t>> ms;
  std::map<std::string, std::pair<bool, bool>> ms_required;  // imsi, ki present
  std::vector<PendingAttack> attacks;

  auto ms_for = [&](const std::string& id, std::size_t line) -> MsSpec& {
    for (auto& [m, _] : ms) {
      if (m.id == id) return m;
    }
    MsSpec m;
    m.id = id;
    ms.emplace_back(m, line);
    return ms.back().first;
  };

  std::istringstream in{std::string(text)};
  std::string raw_line;
  std::size_t lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    const auto line = trim(raw_line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError(lineno, "duplicate key '" + key + "'");

    std::vector<std::string> parts;
    for (std::size_t b = 0;;) {
      const auto d = key.find('.', b);
      parts.push_back(key.substr(b, d == std::string::npos ? std::string::npos : d - b));
      if (d == std::string::npos) break;
      b = d + 1;
    }
    auto unknown = [&] { return ParseError(lineno, "unknown key '" + key + "'"); };
    auto need_uint = [&](std::uint64_t lo, std::uint64_t hi) {
      const auto v = parse_uint(value);
      if (!v || *v < lo || *v > hi)
        throw ParseError(lineno, key + ": expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return *v;
    };
    auto need_bool = [&] {
      const auto v = parse_bool(value);
      if (!v) throw ParseError(lineno, key + ": expected true or false");
      return *v;
    };
    auto need_int32 = [&] {
      const auto v = parse_int(value);
      if (!v || *v < INT32_MIN || *v > INT32_MAX) throw ParseError(lineno, key + ": expected a 32-bit integer");
      return static_cast<std::int32_t>(*v);
    };

    for (const auto& p : parts) {
      if (p.empty()) throw unknown();
    }

    if (parts[0] == "scenario" && parts.size() == 2) {
      if (parts[1] == "name") {
        if (value.empty()) throw ParseError(lineno, "empty scenario name");
        s.name = value;
      } else if (parts[1] == "variant") {
        const auto v = sim::parse_variant(value);
        if (!v) throw ParseError(lineno, "variant must be LEGACY or HARDENED");
        s.variant = *v;
        have_variant = true;
      } else if (parts[1] == "seed") {
        s.seed = need_uint(0, UINT64_MAX);
      } else {
        throw unknown();
      }
    } else if (parts[0] == "ms" && parts.size() == 3) {
      auto& m = ms_for(parts[1], lineno);
      auto& req = ms_required[parts[1]];
      const auto& f = parts[2];
      if (f == "imsi") {
        if (value.size() != 15 || !std::all_of(value.begin(), value.end(), [](char c) { return c >= '0' && c <= '9'; }))
          throw ParseError(lineno, key + ": expected 15 decimal digits");
        m.imsi = auth::Imsi(value);
        req.first = true;
      } else if (f == "ki") {
        try {
          if (value.size() != 32) throw SpecError("length");
          m.ki = block_from_hex(value);
        } catch (const std::exception&) {
          throw ParseError(lineno, key + ": expected 32 hex digits");
        }
        req.second = true;
      } else if (f == "lat") {
        m.lat = need_int32();
      } else if (f == "lon") {
        m.lon = need_int32();
      } else if (f == "tmsi") {
        m.tmsi = static_cast<std::uint32_t>(need_uint(0, UINT32_MAX));
      } else {
        throw unknown();
      }
    } else if (parts[0] == "network" && parts.size() == 2) {
      auto& n = s.network;
      const auto& f = parts[1];
      if (f == "suites") {
        n.suite_preference.clear();
        std::string item;
        std::istringstream list(value);
        while (std::getline(list, item, ',')) {
          const auto su = cipher::parse_suite(trim(item));
          if (!su) throw ParseError(lineno, "unknown cipher suite '" + trim(item) + "'");
          n.suite_preference.push_back(*su);
        }
        if (n.suite_preference.empty()) throw ParseError(lineno, "empty suite list");
      } else if (f == "rach_slots") {
        n.rach_slots = static_cast<unsigned>(need_uint(1, 64));
      } else if (f == "kc_policy") {
        if (value == "FRESH_EACH_SESSION") {
          n.kc_policy = sim::KcPolicy::fresh();
        } else if (value.starts_with("XOR_RECYCLE:")) {
          const auto m = parse_uint(std::string_view(value).substr(12));
          if (!m) throw ParseError(lineno, "XOR_RECYCLE needs a mask, e.g. XOR_RECYCLE:0x5a5a");
          n.kc_policy = sim::KcPolicy::xor_recycle(*m);
        } else {
          throw ParseError(lineno, "kc_policy must be FRESH_EACH_SESSION or XOR_RECYCLE:<mask>");
        }
      } else if (f == "triplet_reuse") {
        n.triplet_reuse = need_bool();
      } else if (f == "triplet_batch") {
        n.triplet_batch = static_cast<unsigned>(need_uint(1, 1000));
      } else if (f == "legacy_kc_bits") {
        n.legacy_kc_bits = static_cast<unsigned>(need_uint(1, 64));
      } else if (f == "allow_a51_migration") {
        n.allow_a51_migration = need_bool();
      } else {
        throw unknown();
      }
    } else if (parts[0] == "attack" && parts.size() == 3) {
      auto it = std::find_if(attacks.begin(), attacks.end(), [&](const auto& a) { return a.label == parts[1]; });
      if (it == attacks.end()) {
        attacks.push_back({parts[1], "", lineno, {}});
        it = attacks.end() - 1;
      }
      if (parts[2] == "type") {
        if (!schema().contains(value)) throw ParseError(lineno, "unknown attack type '" + value + "'");
        it->type = value;
      } else {
        it->raw[parts[2]] = {value, lineno};
      }
    } else {
      throw unknown();
    }
  }

  // Attack values first, so a bad value is reported at its own line.
  for (auto& a : attacks) {
    if (a.type.empty()) {
      if (!schema().contains(a.label)) throw ParseError(a.line, "unknown attack '" + a.label + "' (set attack." + a.label + ".type)");
      a.type = a.label;
    }
    const auto& defs = schema().at(a.type);
    for (auto& [k, v] : a.raw) {
      const auto d = std::find_if(defs.begin(), defs.end(), [&](const ParamDef& x) { return k == x.name; });
      if (d == defs.end()) throw ParseError(v.second, "unknown key 'attack." + a.label + "." + k + "'");
      v.first = canonical(*d, v.first, v.second);
    }
  }

  if (!have_variant) throw ParseError(lineno + 1, "missing required key scenario.variant");
  if (ms.empty()) throw ParseError(lineno + 1, "missing required section: at least one ms.<id>");
  for (auto& [m, line] : ms) {
    const auto& req = ms_required[m.id];
    if (!req.first) throw ParseError(line, "ms." + m.id + " is missing imsi");
    if (!req.second) throw ParseError(line, "ms." + m.id + " is missing ki");
    s.ms.push_back(m);
  }

  for (auto& a : attacks) {
    const auto& defs = schema().at(a.type);
    AttackSpec spec{a.label, a.type, {}};
    for (const auto& d : defs) {
      const auto it = a.raw.find(d.name);
      std::string val;
      if (it != a.raw.end()) {
        val = it->second.first;
      } else {
        val = d.kind == Kind::Target ? s.ms.front().id : d.def;
      }
      if (d.kind == Kind::Target &&
          std::none_of(s.ms.begin(), s.ms.end(), [&](const MsSpec& m) { return m.id == val; }))
        throw ParseError(it != a.raw.end() ? it->second.second : a.line, "attack target '" + val + "' is not an ms");
      spec.params.emplace_back(d.name, val);
    }
    s.attacks.push_back(std::move(spec));
  }
  return s;
}

std::string render_scenario(const Scenario& s) {
  std::ostringstream o;
  o << "scenario.name = " << s.name << '\n';
  o << "scenario.variant = " << sim::variant_name(s.variant) << '\n';
  o << "scenario.seed = " << s.seed << '\n';
  for (const auto& m : s.ms) {
    const auto p = "ms." + m.id + ".";
    o << p << "imsi = " << m.imsi.str() << '\n';
    o << p << "ki = " << to_hex(m.ki) << '\n';
    o << p << "lat = " << m.lat << '\n';
    o << p << "lon = " << m.lon << '\n';
    if (m.tmsi) o << p << "tmsi = " << *m.tmsi << '\n';
  }
  const auto& n = s.network;
  o << "network.suites = ";
  for (std::size_t i = 0; i < n.suite_preference.size(); ++i)
    o << (i ? "," : "") << cipher::suite_name(n.suite_preference[i]);
  o << '\n';
  o << "network.rach_slots = " << n.rach_slots << '\n';
  o << "network.kc_policy = "
    << (n.kc_policy.mode == sim::KcPolicy::Mode::XorRecycle ? "XOR_RECYCLE:" + hex64(n.kc_policy.mask)
                                                             : std::string("FRESH_EACH_SESSION"))
    << '\n';
  o << "network.triplet_reuse = " << (n.triplet_reuse ? "true" : "false") << '\n';
  o << "network.triplet_batch = " << n.triplet_batch << '\n';
  o << "network.legacy_kc_bits = " << n.legacy_kc_bits << '\n';
  o << "network.allow_a51_migration = " << (n.allow_a51_migration ? "true" : "false") << '\n';
  for (const auto& a : s.attacks) {
    const auto p = "attack." + a.label + ".";
    o << p << "type = " << a.type << '\n';
    const auto& defs = schema().at(a.type);
    for (const auto& [k, v] : a.params) {
      const auto d = std::find_if(defs.begin(), defs.end(), [&](const ParamDef& x) { return k == x.name; });
      o << p << k << " = " << (d != defs.end() && d->kind == Kind::Text ? '"' + v + '"' : v) << '\n';
    }
  }
  return o.str();
}

}  // namespace gsmlab::lab
