#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rpoa/hash.hpp"
#include "rpoa/types.hpp"

namespace rpoa {

enum class TxKind : std::uint8_t { transfer = 0, service = 1 };

/// A ledger transaction. `amount` is used by transfers, `worth_w` by service
/// transactions; `receiver` is ignored for service transactions.
struct Transaction {
    TxKind kind = TxKind::transfer;
    AccountId sender;
    AccountId receiver;
    Amount amount = 0;
    double worth_w = 0.0;
    Amount miner_wage = 0;
    std::uint64_t nonce = 0;

    bool operator==(const Transaction&) const = default;
};

struct BlockHeader {
    Digest parent_hash{};
    Digest body_hash{};
    Height height = 0;
    std::int64_t timestamp_ms = 0;
    AccountId miner;
    double psi_claimed = 1.0;
    std::uint64_t nonce = 0;

    bool operator==(const BlockHeader&) const = default;
};

struct Block {
    BlockHeader header;
    std::vector<Transaction> txs;

    bool operator==(const Block&) const = default;
};

// Canonical encodings. See docs in README ("Canonical serialization").
std::vector<std::uint8_t> serialize(const Transaction& tx);
std::vector<std::uint8_t> serialize(const BlockHeader& header);

Digest body_hash(std::span<const Transaction> txs);
Digest header_hash(const BlockHeader& header);

/// Height-0 header: zero parent, empty body, timestamp 0, no miner.
BlockHeader genesis_header();

} // namespace rpoa
