#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "gsmlab/entities.hpp"
#include "gsmlab/lab.hpp"

namespace gsmlab::lab {

namespace {

std::unique_ptr<sim::World> build_world(const Scenario& s, std::uint64_t seed) {
  auto w = std::make_unique<sim::World>(s.variant, s.network, seed);
  for (const auto& m : s.ms) {
    sim::MsConfig c;
    c.id = m.id;
    c.profile.imsi = m.imsi;
    c.profile.ki = m.ki;
    c.profile.tmsi = m.tmsi;
    c.position = {m.lat, m.lon};
    w->add_ms(c);
  }
  return w;
}

std::uint64_t num(const AttackSpec& a, std::string_view key) { return std::stoull(a.param(key)); }

AttackReport dispatch(const AttackSpec& a, sim::World& w) {
  const auto& target = a.param("target");
  if (a.type == "fake_bts") return attack::run_fake_bts(w, target, static_cast<unsigned>(num(a, "traffic_frames")));
  if (a.type == "mitm_downgrade") {
    attack::MitmParams p;
    p.rewrite = a.param("rewrite") == "true";
    p.rewrite_to = *cipher::parse_suite(a.param("rewrite_to"));
    p.traffic_frames = static_cast<unsigned>(num(a, "traffic_frames"));
    return attack::mitm_downgrade(w, target, p);
  }
  if (a.type == "rrlp_locate") return attack::rrlp_locate(w, target);
  if (a.type == "sms_spoof") return attack::sms_spoof(w, target, a.param("originator"), a.param("text"));
  if (a.type == "stolen_vectors") return attack::run_stolen_vectors(w, target, static_cast<unsigned>(num(a, "warmup")));
  if (a.type == "kc_prediction")
    return attack::run_kc_prediction(w, target, static_cast<unsigned>(num(a, "observations")));
  if (a.type == "clone_sim") {
    const auto access = a.param("access") == "physical" ? attack::CloneAccess::Physical : attack::CloneAccess::OverTheAir;
    return attack::run_clone_sim(w, target, num(a, "budget"), access);
  }
  if (a.type == "tmto") {
    attack::TmtoParams p;
    p.table.keyspace_bits = static_cast<unsigned>(num(a, "keyspace_bits"));
    p.table.chain_length = static_cast<std::uint32_t>(num(a, "chain_length"));
    p.table.chain_count = static_cast<std::uint32_t>(num(a, "chain_count"));
    p.table.color_count = static_cast<std::uint32_t>(num(a, "color_count"));
    p.table.seed = num(a, "table_seed");
    p.table.cipher = *cipher::parse_suite(a.param("cipher"));
    p.sessions = static_cast<unsigned>(num(a, "sessions"));
    try {
      p.table.validate();
    } catch (const SpecError& e) {
      AttackReport r;
      r.attack_id = "tmto";
      r.variant = w.variant();
      r.precondition_failed = true;
      r.outcome = "bad_table_params";
      r.add("error", e.what());
      return r;
    }
    return attack::run_tmto(w, target, p);
  }
  if (a.type == "rach_flood") {
    attack::FloodParams p;
    p.rate = static_cast<unsigned>(num(a, "rate"));
    p.duration = num(a, "duration");
    p.interval = num(a, "interval");
    p.recovery_attempts = static_cast<unsigned>(num(a, "recovery_attempts"));
    return attack::run_rach_flood(w, target, p);
  }
  throw DomainError("unknown attack type " + a.type);
}

}  // namespace

RunReport run_scenario(const Scenario& s) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.scenario = s.name;
  rep.variant = s.variant;
  rep.seed = s.seed;

  {
    auto w = build_world(s, s.seed);
    for (const auto& m : s.ms) {
      rep.attaches.push_back({m.id, sim::attach(*w, m.id)});
      sim::detach(*w, m.id);
    }
    rep.trace.push_back("# baseline");
    rep.trace.insert(rep.trace.end(), w->trace().begin(), w->trace().end());
  }

  for (std::size_t i = 0; i < s.attacks.size(); ++i) {
    const auto& a = s.attacks[i];
    auto w = build_world(s, derive_seed(s.seed, i + 1));
    auto r = dispatch(a, *w);
    rep.trace.push_back("# attack " + a.label + " type=" + a.type);
    rep.trace.insert(rep.trace.end(), w->trace().begin(), w->trace().end());
    rep.attacks.push_back({a.label, std::move(r)});
  }

  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string_view verdict(const AttackReport& r) {
  if (r.precondition_failed) return "PRE";
  return r.succeeded ? "YES" : "NO";
}

std::string render_trace(const RunReport& report) {
  std::string out;
  for (const auto& l : report.trace) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string render_matrix(std::span<const RunReport> reports) {
  std::vector<std::string> rows;
  for (const auto& r : reports) {
    for (const auto& a : r.attacks) {
      if (std::find(rows.begin(), rows.end(), a.label) == rows.end()) rows.push_back(a.label);
    }
  }
  std::size_t w0 = 6;
  for (const auto& r : rows) w0 = std::max(w0, r.size());
  std::vector<std::string> heads;
  for (const auto& r : reports) heads.emplace_back(sim::variant_name(r.variant));

  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::ostringstream o;
  std::string line = pad("attack", w0);
  for (const auto& h : heads) line += "  " + pad(h, 8);
  while (!line.empty() && line.back() == ' ') line.pop_back();
  o << line << '\n';
  for (const auto& row : rows) {
    line = pad(row, w0);
    for (std::size_t c = 0; c < reports.size(); ++c) {
      const auto& at = reports[c].attacks;
      const auto it = std::find_if(at.begin(), at.end(), [&](const AttackEntry& e) { return e.label == row; });
      line += "  " + pad(it == at.end() ? "-" : std::string(verdict(it->report)), std::max<std::size_t>(8, heads[c].size()));
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    o << line << '\n';
  }
  return o.str();
}

std::string render_report(const RunReport& report, Format format) {
  if (format == Format::Matrix) return render_matrix(std::span(&report, 1));
  std::ostringstream o;
  o << "GSMLAB-REPORT v1\n";
  o << "scenario = " << report.scenario << '\n';
  o << "variant = " << sim::variant_name(report.variant) << '\n';
  o << "seed = " << report.seed << '\n';
  o << "trace = " << report.trace_file << '\n';
  for (const auto& a : report.attaches) {
    o << "attach." << a.ms << " = " << sim::attach_status_name(a.outcome.status)
      << " suite=" << cipher::suite_name(a.outcome.negotiated_suite) << " ticks=" << a.outcome.ticks_elapsed << '\n';
  }
  for (const auto& e : report.attacks) {
    const auto p = "attack." + e.label + ".";
    const auto& r = e.report;
    o << p << "type = " << r.attack_id << '\n';
    o << p << "result = " << verdict(r) << '\n';
    o << p << "outcome = " << r.outcome << '\n';
    o << p << "queries_used = " << r.queries_used << '\n';
    o << p << "ticks_used = " << r.ticks_used << '\n';
    for (const auto& [k, v] : r.evidence) o << p << "evidence." << k << " = " << v << '\n';
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "wall_time_s = %.3f\n", report.wall_seconds);
  o << buf;
  return o.str();
}

TraceDiff diff_traces(std::string_view a, std::string_view b, std::size_t max_lines) {
  auto split = [](std::string_view s) {
    std::vector<std::string_view> out;
    while (!s.empty()) {
      const auto nl = s.find('\n');
      out.push_back(s.substr(0, nl));
      if (nl == std::string_view::npos) break;
      s.remove_prefix(nl + 1);
    }
    return out;
  };
  const auto la = split(a), lb = split(b);
  TraceDiff d;
  const auto n = std::max(la.size(), lb.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool ha = i < la.size(), hb = i < lb.size();
    if (ha && hb && la[i] == lb[i]) continue;
    ++d.differences;
    if (d.lines.size() + 2 > max_lines) continue;
    if (ha) d.lines.push_back("<" + std::to_string(i + 1) + ": " + std::string(la[i]));
    if (hb) d.lines.push_back(">" + std::to_string(i + 1) + ": " + std::string(lb[i]));
  }
  return d;
}

}  // namespace gsmlab::lab
