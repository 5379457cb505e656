#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsmlab/attacks.hpp"
#include "gsmlab/world.hpp"

namespace gsmlab::lab {

using attack::AttackReport;
using sim::Variant;

class ParseError : public SpecError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : SpecError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct MsSpec {
  sim::EntityId id;
  auth::Imsi imsi;
  Block128 ki{};
  std::int32_t lat = 0;
  std::int32_t lon = 0;
  std::optional<std::uint32_t> tmsi;
  bool operator==(const MsSpec&) const = default;
};

// Params are canonicalised and complete (defaults filled in), in schema order.
struct AttackSpec {
  std::string label;
  std::string type;
  std::vector<std::pair<std::string, std::string>> params;
  bool operator==(const AttackSpec&) const = default;

  const std::string& param(std::string_view key) const;
};

struct Scenario {
  std::string name = "unnamed";
  Variant variant = Variant::Legacy;
  std::uint64_t seed = 0;
  std::vector<MsSpec> ms;
  sim::NetworkConfig network;
  std::vector<AttackSpec> attacks;
  bool operator==(const Scenario&) const = default;
};

// `section.key = value` lines; `#` starts a comment line. Throws ParseError.
Scenario parse_scenario(std::string_view text);
// Every field, defaults included; parse_scenario(render_scenario(s)) == s.
std::string render_scenario(const Scenario& s);

// Names of the attack types run_scenario understands.
std::vector<std::string> attack_types();

struct AttachRecord {
  sim::EntityId ms;
  sim::AttachOutcome outcome;
};

struct AttackEntry {
  std::string label;
  AttackReport report;
};

struct RunReport {
  std::string scenario;
  Variant variant = Variant::Legacy;
  std::uint64_t seed = 0;
  std::vector<AttachRecord> attaches;
  std::vector<AttackEntry> attacks;
  std::vector<std::string> trace;
  std::string trace_file = "-";
  double wall_seconds = 0;
};

// Attaches every MS once in a world seeded with `seed`, then runs each attack
// in a fresh world seeded with derive_seed(seed, index + 1).
RunReport run_scenario(const Scenario& s);

enum class Format : std::uint8_t { Text, Matrix };

// `YES`, `NO` or `PRE` (precondition unmet).
std::string_view verdict(const AttackReport& r);

std::string render_report(const RunReport& report, Format format);
// One column per report, one row per attack label.
std::string render_matrix(std::span<const RunReport> reports);
std::string render_trace(const RunReport& report);

struct TraceDiff {
  std::size_t differences = 0;
  std::vector<std::string> lines;  // first few, `<n: a` / `>n: b` style
};

TraceDiff diff_traces(std::string_view a, std::string_view b, std::size_t max_lines = 20);

}  // namespace gsmlab::lab
