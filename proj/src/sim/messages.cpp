#include <algorithm>
#include <cstdio>
#include <map>

#include "gsmlab/messages.hpp"

namespace gsmlab::sim {

namespace {

using Fields = std::map<std::string, std::string>;

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string flag(bool b) { return b ? "1" : "0"; }

struct FieldVisitor {
  Fields& f;

  void operator()(const ChannelRequest& m) { f["ref"] = std::to_string(m.ref); }
  void operator()(const ImmediateAssignment& m) { f["ref"] = std::to_string(m.ref); }
  void operator()(const PagingRequest& m) { f["identity"] = quote(m.identity); }
  void operator()(const IdentityRequest& m) { f["kind"] = m.kind == IdentityKind::Imsi ? "IMSI" : "IMEI"; }
  void operator()(const IdentityResponse& m) {
    f["identity"] = quote(m.identity);
    std::string s;
    for (auto suite : {CipherSuite::None, CipherSuite::A5_1, CipherSuite::A5_2, CipherSuite::Strong}) {
      if (m.suites & suite_bit(suite)) {
        if (!s.empty()) s += '|';
        s += cipher::suite_name(suite);
      }
    }
    f["suites"] = s.empty() ? "-" : s;
    if (m.nonce) f["nonce"] = to_hex(*m.nonce);
  }
  void operator()(const AuthRequest& m) {
    f["rand"] = to_hex(m.rand);
    if (m.net_sres) f["net_sres"] = hex32(*m.net_sres);
    if (m.net_nonce) f["net_nonce"] = to_hex(*m.net_nonce);
  }
  void operator()(const AuthResponse& m) {
    f["sres"] = hex32(m.sres);
    if (m.ms_nonce) f["ms_nonce"] = to_hex(*m.ms_nonce);
  }
  void operator()(const CipherModeCommand& m) { f["suite"] = std::string(cipher::suite_name(m.suite)); }
  void operator()(const CipherModeComplete&) {}
  void operator()(const TmsiRealloc& m) { f["tmsi"] = hex32(m.tmsi); }
  void operator()(const Traffic& m) {
    f["frame"] = std::to_string(m.frame);
    f["payload"] = to_bitstring(m.payload);
    f["ciphered"] = flag(m.ciphered);
  }
  void operator()(const SmsDeliver& m) {
    f["originator"] = quote(m.originator);
    f["text"] = to_hex(m.text);
    f["frame"] = std::to_string(m.frame);
    f["ciphered"] = flag(m.ciphered);
  }
  void operator()(const LocationRequest&) {}
  void operator()(const LocationResponse& m) {
    f["lat"] = std::to_string(m.lat);
    f["lon"] = std::to_string(m.lon);
  }
};

constexpr std::string_view kKindNames[] = {
    "ChannelRequest", "ImmediateAssignment", "PagingRequest",    "IdentityRequest", "IdentityResponse",
    "AuthRequest",    "AuthResponse",        "CipherModeCommand", "CipherModeComplete", "TmsiRealloc",
    "Traffic",        "SmsDeliver",          "LocationRequest",  "LocationResponse",
};
static_assert(std::size(kKindNames) == std::variant_size_v<MessageBody>);

std::string render_with(const UmMessage& msg, bool include_mac) {
  Fields fields;
  std::visit(FieldVisitor{fields}, msg.body);
  if (include_mac && msg.mac) fields["mac"] = hex64(*msg.mac);

  std::string out(msg.kind());
  out += '{';
  bool first = true;
  for (const auto& [k, v] : fields) {
    if (!first) out += ',';
    first = false;
    out += k;
    out += '=';
    out += v;
  }
  out += '}';
  return out;
}

}  // namespace

std::string_view UmMessage::kind() const { return kKindNames[body.index()]; }

std::string render(const UmMessage& msg) { return render_with(msg, true); }

std::vector<std::uint8_t> mac_input(const UmMessage& msg) {
  const std::string s = render_with(msg, false);
  return {s.begin(), s.end()};
}

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (unsigned char c : text) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c < 0x20 || c >= 0x7F) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", c);
      out += buf;
    } else {
      out += static_cast<char>(c);
    }
  }
  out += '"';
  return out;
}

}  // namespace gsmlab::sim
