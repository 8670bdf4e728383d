// SPDX-License-Identifier: Apache-2.0

#include "provledger/codec.hpp"

#include <algorithm>

namespace provledger {

void Writer::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void Writer::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void Writer::str(std::string_view s) { bytes(as_bytes(s)); }

void Writer::bytes(ByteSpan b) {
  u32(static_cast<std::uint32_t>(b.size()));
  out_.insert(out_.end(), b.begin(), b.end());
}

void Writer::digest(const Digest& d) { out_.insert(out_.end(), d.bytes().begin(), d.bytes().end()); }

void Writer::string_map(const std::map<std::string, std::string>& m) {
  u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& [k, v] : m) {
    str(k);
    str(v);
  }
}

void Writer::string_list(const std::vector<std::string>& v) {
  u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v) str(s);
}

void Reader::need(std::size_t n) const {
  if (in_.size() - pos_ < n) throw DecodeError("truncated input at offset " + std::to_string(pos_));
}

std::uint8_t Reader::u8() {
  need(1);
  return in_[pos_++];
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

bool Reader::boolean() {
  const auto b = u8();
  if (b > 1) throw DecodeError("invalid boolean byte at offset " + std::to_string(pos_ - 1));
  return b == 1;
}

std::string Reader::str() {
  const auto n = u32();
  need(n);
  std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
  pos_ += n;
  return s;
}

Bytes Reader::bytes() {
  const auto n = u32();
  need(n);
  Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return b;
}

Digest Reader::digest() {
  need(Digest::kSize);
  std::array<std::uint8_t, Digest::kSize> raw{};
  std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(pos_), Digest::kSize, raw.begin());
  pos_ += Digest::kSize;
  return Digest{raw};
}

std::map<std::string, std::string> Reader::string_map() {
  const auto n = u32();
  std::map<std::string, std::string> m;
  std::string prev;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto k = str();
    if (i > 0 && k <= prev) throw DecodeError("map keys not in canonical order");
    prev = k;
    m.emplace(std::move(k), str());
  }
  return m;
}

std::vector<std::string> Reader::string_list() {
  const auto n = u32();
  std::vector<std::string> v;
  v.reserve(std::min<std::uint32_t>(n, 1024));
  for (std::uint32_t i = 0; i < n; ++i) v.push_back(str());
  return v;
}

void Reader::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes at offset " + std::to_string(pos_));
}

}  // namespace provledger
