#include "fishing/mac_address.hpp"

#include <optional>

#include "fishing/error.hpp"

namespace fishing {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

namespace {

std::optional<std::uint8_t> hex_digit(char c) {
  if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
  if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
  if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
  return std::nullopt;
}

std::optional<MacAddress::Octets> try_parse(std::string_view text) {
  // "xx:xx:xx:xx:xx:xx" with a single separator kind throughout.
  if (text.size() != 17) return std::nullopt;
  const char sep = text[2];
  if (sep != ':' && sep != '-') return std::nullopt;
  MacAddress::Octets octets{};
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t pos = i * 3;
    if (i > 0 && text[pos - 1] != sep) return std::nullopt;
    auto hi = hex_digit(text[pos]);
    auto lo = hex_digit(text[pos + 1]);
    if (!hi || !lo) return std::nullopt;
    octets[i] = static_cast<std::uint8_t>((*hi << 4) | *lo);
  }
  return octets;
}

}  // namespace

MacAddress MacAddress::parse(std::string_view text) {
  auto octets = try_parse(text);
  if (!octets) {
    fail_validation("malformed MAC address '" + std::string(text) + "'", {{"input", std::string(text)}});
  }
  return MacAddress(*octets);
}

bool MacAddress::is_valid(std::string_view text) { return try_parse(text).has_value(); }

MacAddress MacAddress::from_u64(std::uint64_t value) {
  Octets octets{};
  for (int i = 5; i >= 0; --i) {
    octets[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value & 0xff);
    value >>= 8;
  }
  return MacAddress(octets);
}

std::uint64_t MacAddress::to_u64() const {
  std::uint64_t value = 0;
  for (auto octet : octets_) value = (value << 8) | octet;
  return value;
}

std::string MacAddress::to_string() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(17);
  for (std::size_t i = 0; i < octets_.size(); ++i) {
    if (i > 0) out.push_back(':');
    out.push_back(kHex[octets_[i] >> 4]);
    out.push_back(kHex[octets_[i] & 0x0f]);
  }
  return out;
}

}  // namespace fishing
