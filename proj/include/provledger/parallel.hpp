// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/acl.hpp"
#include "provledger/block.hpp"
#include "provledger/storage.hpp"

#include <string>
#include <vector>

// OpenMP kernels. Each has a serial reference (verify_chain, storage::audit,
// check_access in a loop) and must produce identical results.
namespace provledger::parallel {

int max_threads();

// Block hashes are recomputed concurrently; linking stays sequential.
ledger::VerificationReport verify_chain(const std::vector<ledger::Block>& blocks);

// Blob digests are computed concurrently; entries keep the serial order.
std::vector<storage::AuditEntry> audit(const ledger::WorldState& state, const storage::StoreSet& stores);

struct AccessQuery {
  std::string participant_id;
  assets::Acl acl;
  std::string owner;
};

std::vector<bool> check_access_serial(const assets::WorldView& view, const std::vector<AccessQuery>& queries);
std::vector<bool> check_access_batch(const assets::WorldView& view, const std::vector<AccessQuery>& queries);

}  // namespace provledger::parallel
