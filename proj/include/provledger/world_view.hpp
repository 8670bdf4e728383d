// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/assets.hpp"
#include "provledger/world_state.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace provledger::assets {

class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Read-only key lookup. Implementations may record what was read.
class WorldView {
 public:
  virtual ~WorldView() = default;
  virtual std::optional<Bytes> get(std::string_view key) const = 0;

  template <class T>
  std::optional<T> load(std::string_view id) const {
    auto raw = get(make_key(T::kTag, id));
    if (!raw) return std::nullopt;
    return decode<T>(*raw);
  }

  template <class T>
  T require(std::string_view id) const {
    auto v = load<T>(id);
    if (!v) throw LookupError("not-found: " + make_key(T::kTag, id));
    return *v;
  }
};

// Adapter over a committed world state.
class StateView : public WorldView {
 public:
  explicit StateView(const ledger::WorldState& state) : state_(state) {}
  std::optional<Bytes> get(std::string_view key) const override;

 private:
  const ledger::WorldState& state_;
};

// Plain in-memory view; used by tests and oracles.
class MapView : public WorldView {
 public:
  std::optional<Bytes> get(std::string_view key) const override;

  template <class T>
  void put(const T& asset) {
    values_[asset.key()] = encode(asset);
  }
  void erase(std::string_view key) { values_.erase(std::string(key)); }

 private:
  std::map<std::string, Bytes, std::less<>> values_;
};

}  // namespace provledger::assets
