// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/digest.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace provledger {

// Canonical binary form used for hashing and for the ledger dump:
//   u8        one byte
//   u32/u64   big-endian
//   bool      one byte, 0x00 or 0x01 (anything else is a decode error)
//   string    u32 length, raw bytes
//   bytes     u32 length, raw bytes
//   digest    32 raw bytes
//   map       u32 count, entries in ascending key order
//   list      u32 count, elements in stored order
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void boolean(bool v) { u8(v ? 1 : 0); }
  void str(std::string_view s);
  void bytes(ByteSpan b);
  void digest(const Digest& d);
  void string_map(const std::map<std::string, std::string>& m);
  void string_list(const std::vector<std::string>& v);

  const Bytes& data() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteSpan in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  bool boolean();
  std::string str();
  Bytes bytes();
  Digest digest();
  std::map<std::string, std::string> string_map();
  std::vector<std::string> string_list();

  bool done() const { return pos_ == in_.size(); }
  std::size_t position() const { return pos_; }
  // Throws unless every byte was consumed.
  void expect_done() const;

 private:
  void need(std::size_t n) const;

  ByteSpan in_;
  std::size_t pos_ = 0;
};

}  // namespace provledger
