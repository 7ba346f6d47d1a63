#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpoa/activity.hpp"
#include "rpoa/fees.hpp"
#include "rpoa/primitives.hpp"
#include "rpoa/types.hpp"

namespace rpoa::ledger {

/// A refundable locked amount, credited back at `release_height` (inclusive).
struct Stake {
    Amount amount = 0;
    Height release_height = 0;

    bool operator==(const Stake&) const = default;
};

struct AccountState {
    Amount balance = 0;
    std::vector<Stake> stakes;
    std::vector<activity::ServiceRecord> service_history;
    bool entered = false;          // entrance fee paid
    std::uint64_t next_nonce = 0;

    bool operator==(const AccountState&) const = default;
};

/// Account-model chain state after the block at `height` has been applied.
struct ChainState {
    std::map<AccountId, AccountState> accounts;
    Height height = 0;
    Amount total_staked = 0;

    /// Sum of all balances plus everything still staked.
    [[nodiscard]] Amount total_supply() const;
    /// True when total_staked equals the sum of every outstanding stake.
    [[nodiscard]] bool stakes_consistent() const;

    bool operator==(const ChainState&) const = default;
};

struct LedgerParams {
    activity::ActivityParams activity;
    fees::FeeSchedule fees;
};

enum class LedgerErrc {
    unknown_sender,
    bad_nonce,
    insufficient_balance,
    worth_cap_exceeded,
    block_worth_cap_exceeded,
    height_mismatch,
    malformed,
};

const char* to_string(LedgerErrc code);

class LedgerError : public std::runtime_error {
public:
    LedgerError(LedgerErrc code, const std::string& what)
        : std::runtime_error(what), code_(code)
    {
    }

    [[nodiscard]] LedgerErrc code() const noexcept { return code_; }

private:
    LedgerErrc code_;
};

/// What a transaction cost its sender.
struct TxReceipt {
    AccountId sender;
    TxKind kind = TxKind::transfer;
    Amount entrance_fee = 0;
    Amount upload_fee = 0;
    Amount miner_wage = 0;
    double psi = 1.0; // sender activity the upload fee was priced at
};

/// Activity of `id` evaluated at `height`; 1 for accounts that do not exist yet.
double account_activity(const ChainState& state, const AccountId& id, Height height,
                        const activity::ActivityParams& params);

/// Applies one transaction included by `miner` at `height`. Either the whole
/// transaction applies or `state` is left untouched and LedgerError is thrown.
TxReceipt apply_transaction_in_place(ChainState& state, const Transaction& tx, const AccountId& miner, Height height,
                                     const LedgerParams& params);

ChainState apply_transaction(ChainState state, const Transaction& tx, const AccountId& miner, Height height,
                             const LedgerParams& params);

/// Credits every stake with release_height <= height back to its owner.
/// Returns the released sum.
Amount release_matured_stakes_in_place(ChainState& state, Height height);

ChainState release_matured_stakes(ChainState state, Height height);

struct BlockOutcome {
    ChainState state;
    std::vector<TxReceipt> receipts;
    Amount released = 0;
};

/// Applies a block on top of `state`: transactions in order, stake maturation at
/// the new height, then the block reward. The input is never modified; any
/// failure throws LedgerError.
BlockOutcome execute_block(const ChainState& state, const Block& block, const LedgerParams& params);

ChainState apply_block(const ChainState& state, const Block& block, const LedgerParams& params);

} // namespace rpoa::ledger
