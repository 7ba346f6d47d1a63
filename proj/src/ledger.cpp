#include "rpoa/ledger.hpp"

#include <limits>

namespace rpoa::ledger {

namespace {

Amount checked_add(Amount a, Amount b)
{
    Amount r;
    if (__builtin_add_overflow(a, b, &r))
        throw LedgerError(LedgerErrc::malformed, "amount overflow");
    return r;
}

Amount fee_atoms(double coins)
{
    try {
        return to_atoms(coins);
    } catch (const std::domain_error& e) {
        throw LedgerError(LedgerErrc::malformed, e.what());
    }
}

} // namespace

const char* to_string(LedgerErrc code)
{
    switch (code) {
    case LedgerErrc::unknown_sender: return "unknown-sender";
    case LedgerErrc::bad_nonce: return "bad-nonce";
    case LedgerErrc::insufficient_balance: return "insufficient-balance";
    case LedgerErrc::worth_cap_exceeded: return "worth-cap-exceeded";
    case LedgerErrc::block_worth_cap_exceeded: return "block-worth-cap-exceeded";
    case LedgerErrc::height_mismatch: return "height-mismatch";
    case LedgerErrc::malformed: return "malformed";
    }
    return "unknown";
}

Amount ChainState::total_supply() const
{
    Amount sum = total_staked;
    for (const auto& [id, acct] : accounts)
        sum += acct.balance;
    return sum;
}

bool ChainState::stakes_consistent() const
{
    Amount sum = 0;
    for (const auto& [id, acct] : accounts) {
        for (const auto& s : acct.stakes) {
            if (s.amount <= 0)
                return false;
            sum += s.amount;
        }
    }
    return sum == total_staked;
}

double account_activity(const ChainState& state, const AccountId& id, Height height,
                        const activity::ActivityParams& params)
{
    auto it = state.accounts.find(id);
    if (it == state.accounts.end())
        return 1.0;
    return activity::total_activity(it->second.service_history, height, params);
}

TxReceipt apply_transaction_in_place(ChainState& state, const Transaction& tx, const AccountId& miner, Height height,
                                     const LedgerParams& params)
{
    if (tx.miner_wage < 0)
        throw LedgerError(LedgerErrc::malformed, "miner wage must be non-negative");
    if (miner.empty())
        throw LedgerError(LedgerErrc::malformed, "including miner must be named");

    auto sender_it = state.accounts.find(tx.sender);
    if (sender_it == state.accounts.end())
        throw LedgerError(LedgerErrc::unknown_sender, "unknown sender '" + tx.sender + "'");
    AccountState& sender = sender_it->second;
    if (tx.nonce != sender.next_nonce)
        throw LedgerError(LedgerErrc::bad_nonce, "expected nonce " + std::to_string(sender.next_nonce) + " from '"
                                                     + tx.sender + "', got " + std::to_string(tx.nonce));

    TxReceipt receipt;
    receipt.sender = tx.sender;
    receipt.kind = tx.kind;
    receipt.miner_wage = tx.miner_wage;

    // Everything below up to the mutation block only reads state.
    Amount debit = 0;
    if (tx.kind == TxKind::transfer) {
        if (tx.amount < 0 || tx.worth_w != 0.0)
            throw LedgerError(LedgerErrc::malformed, "transfer must carry a non-negative amount and no worth");
        if (tx.receiver.empty())
            throw LedgerError(LedgerErrc::malformed, "transfer needs a receiver");
        debit = checked_add(tx.amount, tx.miner_wage);
    } else {
        if (tx.amount != 0 || !(tx.worth_w >= 0.0))
            throw LedgerError(LedgerErrc::malformed, "service transaction must carry non-negative worth and no amount");
        if (tx.worth_w > params.fees.max_block_worth_omega_w)
            throw LedgerError(LedgerErrc::worth_cap_exceeded, "service worth exceeds the per-block cap");
        try {
            receipt.psi = activity::total_activity(sender.service_history, height, params.activity);
            if (!sender.entered)
                receipt.entrance_fee = fee_atoms(fees::entrance_fee(static_cast<std::int64_t>(height), params.fees));
            receipt.upload_fee = fee_atoms(fees::upload_fee(tx.worth_w, receipt.psi, params.fees));
        } catch (const std::invalid_argument& e) {
            throw LedgerError(LedgerErrc::malformed, e.what());
        }
        debit = checked_add(checked_add(receipt.entrance_fee, receipt.upload_fee), tx.miner_wage);
    }
    if (sender.balance < debit)
        throw LedgerError(LedgerErrc::insufficient_balance, "'" + tx.sender + "' cannot cover " + std::to_string(debit)
                                                                + " atoms");

    // std::map insertion below keeps `sender` valid.
    sender.balance -= debit;
    sender.next_nonce += 1;
    if (tx.kind == TxKind::transfer) {
        state.accounts[tx.receiver].balance += tx.amount;
    } else {
        const Height lock = params.fees.stake_lock_blocks;
        if (receipt.entrance_fee > 0)
            sender.stakes.push_back({receipt.entrance_fee, height + fees::kEntranceLockMultiplier * lock});
        if (receipt.upload_fee > 0)
            sender.stakes.push_back({receipt.upload_fee, height + lock});
        state.total_staked += receipt.entrance_fee + receipt.upload_fee;
        sender.entered = true;
        sender.service_history.push_back({tx.worth_w, height, tx.sender});
    }
    state.accounts[miner].balance += tx.miner_wage;
    return receipt;
}

ChainState apply_transaction(ChainState state, const Transaction& tx, const AccountId& miner, Height height,
                             const LedgerParams& params)
{
    apply_transaction_in_place(state, tx, miner, height, params);
    return state;
}

Amount release_matured_stakes_in_place(ChainState& state, Height height)
{
    Amount released = 0;
    for (auto& [id, acct] : state.accounts) {
        auto& stakes = acct.stakes;
        std::size_t kept = 0;
        for (std::size_t i = 0; i < stakes.size(); ++i) {
            if (stakes[i].release_height <= height) {
                acct.balance += stakes[i].amount;
                released += stakes[i].amount;
            } else {
                stakes[kept++] = stakes[i];
            }
        }
        stakes.resize(kept);
    }
    state.total_staked -= released;
    return released;
}

ChainState release_matured_stakes(ChainState state, Height height)
{
    release_matured_stakes_in_place(state, height);
    return state;
}

BlockOutcome execute_block(const ChainState& state, const Block& block, const LedgerParams& params)
{
    const BlockHeader& header = block.header;
    if (header.height != state.height + 1)
        throw LedgerError(LedgerErrc::height_mismatch, "block height " + std::to_string(header.height)
                                                           + " does not follow state height "
                                                           + std::to_string(state.height));
    if (header.miner.empty())
        throw LedgerError(LedgerErrc::malformed, "block has no miner");

    double worth = 0.0;
    for (const auto& tx : block.txs) {
        if (tx.kind == TxKind::service)
            worth += tx.worth_w;
    }
    if (worth > params.fees.max_block_worth_omega_w)
        throw LedgerError(LedgerErrc::block_worth_cap_exceeded, "block service worth exceeds the per-block cap");

    BlockOutcome out{state, {}, 0};
    out.receipts.reserve(block.txs.size());
    for (const auto& tx : block.txs)
        out.receipts.push_back(apply_transaction_in_place(out.state, tx, header.miner, header.height, params));
    out.released = release_matured_stakes_in_place(out.state, header.height);
    out.state.accounts[header.miner].balance += to_atoms(params.fees.block_reward);
    out.state.height = header.height;
    return out;
}

ChainState apply_block(const ChainState& state, const Block& block, const LedgerParams& params)
{
    return execute_block(state, block, params).state;
}

} // namespace rpoa::ledger
