#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "gsmlab/cipher.hpp"
#include "gsmlab/common.hpp"

namespace gsmlab::sim {

using cipher::CipherSuite;

enum class IdentityKind : std::uint8_t { Imsi, Imei };

struct ChannelRequest {
  std::uint8_t ref = 0;
};
struct ImmediateAssignment {
  std::uint8_t ref = 0;
};
struct PagingRequest {
  std::string identity;
};
struct IdentityRequest {
  IdentityKind kind = IdentityKind::Imsi;
};
// `suites` is the classmark: bit n set when CipherSuite(n) is supported.
// `nonce` is the MS freshness value, present only in the hardened protocol.
struct IdentityResponse {
  std::string identity;
  std::uint8_t suites = 0;
  std::optional<Block128> nonce;
};
struct AuthRequest {
  Block128 rand{};
  std::optional<std::uint32_t> net_sres;
  std::optional<Block128> net_nonce;
};
struct AuthResponse {
  std::uint32_t sres = 0;
  std::optional<Block128> ms_nonce;
};
struct CipherModeCommand {
  CipherSuite suite = CipherSuite::None;
};
struct CipherModeComplete {};
struct TmsiRealloc {
  std::uint32_t tmsi = 0;
};
struct Traffic {
  std::uint32_t frame = 0;
  Bits payload;  // at most 114 bits, one direction's half-frame
  bool ciphered = false;
};
// The text occupies consecutive half-frames starting at `frame`.
struct SmsDeliver {
  std::string originator;
  std::vector<std::uint8_t> text;
  std::uint32_t frame = 0;
  bool ciphered = false;
};
struct LocationRequest {};
// Micro-degrees.
struct LocationResponse {
  std::int32_t lat = 0;
  std::int32_t lon = 0;
  bool operator==(const LocationResponse&) const = default;
};

using MessageBody =
    std::variant<ChannelRequest, ImmediateAssignment, PagingRequest, IdentityRequest, IdentityResponse,
                 AuthRequest, AuthResponse, CipherModeCommand, CipherModeComplete, TmsiRealloc, Traffic,
                 SmsDeliver, LocationRequest, LocationResponse>;

// The MAC travels with the message rather than as a separate variant so
// that every control message can carry one.
struct UmMessage {
  MessageBody body;
  std::optional<std::uint64_t> mac;

  UmMessage() = default;
  template <class T, class = std::enable_if_t<std::is_constructible_v<MessageBody, T> &&
                                              !std::is_same_v<std::decay_t<T>, UmMessage>>>
  UmMessage(T&& b) : body(std::forward<T>(b)) {}

  template <class T>
  const T* get() const {
    return std::get_if<T>(&body);
  }
  template <class T>
  T* get() {
    return std::get_if<T>(&body);
  }
  std::string_view kind() const;
};

constexpr std::uint8_t suite_bit(CipherSuite s) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(s)); }

// `Kind{key=value,...}` with keys sorted. Absent optionals are omitted.
std::string render(const UmMessage& msg);
// Canonical bytes authenticated by the hardened MAC (render without `mac`).
std::vector<std::uint8_t> mac_input(const UmMessage& msg);

std::string quote(std::string_view text);

}  // namespace gsmlab::sim
