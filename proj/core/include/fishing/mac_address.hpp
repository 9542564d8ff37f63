#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace fishing {

/// 48-bit IEEE 802 MAC address. Canonical text form is lowercase hex pairs
/// joined by ':' ("aa:bb:cc:00:11:22").
class MacAddress {
 public:
  using Octets = std::array<std::uint8_t, 6>;

  constexpr MacAddress() = default;
  constexpr explicit MacAddress(const Octets& octets) : octets_(octets) {}

  /// Accepts six hex pairs separated by ':' or '-', any case. Throws
  /// Error(validation) naming the offending input otherwise.
  static MacAddress parse(std::string_view text);
  static bool is_valid(std::string_view text);

  /// Low 48 bits of `value`, most significant octet first.
  static MacAddress from_u64(std::uint64_t value);
  std::uint64_t to_u64() const;

  std::string to_string() const;
  const Octets& octets() const { return octets_; }

  bool locally_administered() const { return (octets_[0] & 0x02) != 0; }
  bool multicast() const { return (octets_[0] & 0x01) != 0; }

  friend constexpr auto operator<=>(const MacAddress&, const MacAddress&) = default;

 private:
  Octets octets_{};
};

}  // namespace fishing

template <>
struct std::hash<fishing::MacAddress> {
  std::size_t operator()(const fishing::MacAddress& mac) const noexcept {
    return std::hash<std::uint64_t>{}(mac.to_u64());
  }
};
