// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace provledger {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

inline ByteSpan as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// 32-byte SHA-256 value. Default-constructed digests are all zeros, which is
// the genesis prev_hash.
class Digest {
 public:
  static constexpr std::size_t kSize = 32;

  Digest() = default;
  explicit Digest(const std::array<std::uint8_t, kSize>& raw) : bytes_(raw) {}

  static Digest of(ByteSpan data);
  static Digest of(std::string_view data) { return of(as_bytes(data)); }
  // HMAC-SHA256(key, data); the default signature token.
  static Digest keyed(ByteSpan key, ByteSpan data);
  static Digest from_hex(std::string_view hex);

  const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }
  std::string hex() const;
  bool is_zero() const;

  friend auto operator<=>(const Digest&, const Digest&) = default;

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

std::string to_hex(ByteSpan data);
Bytes from_hex(std::string_view hex);

std::string base64_encode(ByteSpan data);
Bytes base64_decode(std::string_view text);

// Name-based lowercase UUID (SHA-256 truncated to 16 bytes, version nibble 8,
// RFC 4122 variant). Every asset id in the key scheme is produced by this.
std::string uuid_from(std::string_view name);
bool is_uuid(std::string_view s);

}  // namespace provledger
