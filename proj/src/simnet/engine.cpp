#include "rpoa/simnet/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rpoa::simnet {

namespace {

// Placeholder miner used while selecting a block body; the real miner only ever
// receives extra credit, so a body valid for the placeholder is valid for anyone.
const AccountId kBodyBuilder = "<block-builder>";

constexpr std::uint64_t kMaxHashAttemptsPerBlock = 200'000'000;

} // namespace

ledger::ChainState Simulator::genesis_state(std::span<const MinerAgent> roster)
{
    ledger::ChainState state;
    for (const auto& m : roster)
        state.accounts[m.id].balance = to_atoms(m.initial_balance);
    return state;
}

Simulator::Simulator(consensus::ProtocolParams params, MiningMode mode, std::vector<MinerAgent> roster,
                     std::uint64_t seed)
    : params_(std::move(params)),
      mode_(mode),
      roster_(std::move(roster)),
      mining_rng_(derive_seed(seed, 0)),
      service_rng_(derive_seed(seed, 1)),
      tip_(consensus::genesis_tip(genesis_state(roster_)))
{
    params_.validate();
    hash_rates_.reserve(roster_.size());
    stats_.reserve(roster_.size());
    for (const auto& m : roster_) {
        hash_rates_.push_back(m.hash_rate_g);
        MinerStats s;
        s.id = m.id;
        s.hash_rate = m.hash_rate_g;
        stats_.push_back(std::move(s));
    }
}

void Simulator::scale_hash_rates(double factor)
{
    for (std::size_t i = 0; i < hash_rates_.size(); ++i) {
        hash_rates_[i] *= factor;
        stats_[i].hash_rate = hash_rates_[i];
    }
}

void Simulator::issue_services(Height height)
{
    for (const auto& m : roster_) {
        const ServicePolicy& policy = m.service;
        const Amount wage = to_atoms(policy.miner_wage);
        for (const auto& s : policy.script) {
            if (s.height == height)
                mempool_.push_back({m.id, s.worth, wage});
        }
        if (policy.period_blocks > 0 && (height - 1) % policy.period_blocks == 0)
            mempool_.push_back({m.id, policy.period_worth, wage});
        if (policy.rate > 0.0) {
            const std::uint64_t n = service_rng_.poisson(policy.rate);
            for (std::uint64_t k = 0; k < n; ++k)
                mempool_.push_back({m.id, service_rng_.uniform(policy.worth_min, policy.worth_max), wage});
        }
    }
}

MiningOdds Simulator::odds(const consensus::ChainTip& parent, std::span<const std::size_t> eligible) const
{
    MiningOdds out;
    const Height height = parent.height() + 1;
    const std::size_t n = roster_.size();
    out.psi.resize(n);
    out.thresholds.resize(n);
    out.rates.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.psi[i] = consensus::miner_psi(parent.state, roster_[i].id, height, params_.activity);
        out.thresholds[i] = consensus::mining_threshold(parent.difficulty.eta, out.psi[i], params_.chain);
    }
    for (std::size_t i : eligible) {
        out.rates[i] = hash_rates_[i] * consensus::success_probability(out.thresholds[i], params_.chain);
        out.total_rate += out.rates[i];
    }
    return out;
}

double Simulator::advance_clock(double total_rate)
{
    if (!(total_rate > 0.0))
        throw std::runtime_error("no eligible miner can produce blocks (total block rate is zero)");
    clock_s_ += mining_rng_.exponential(total_rate);
    return clock_s_;
}

std::size_t Simulator::draw_miner(const MiningOdds& odds)
{
    return mining_rng_.categorical(odds.rates, odds.total_rate);
}

std::int64_t Simulator::next_timestamp(const consensus::ChainTip& parent) const
{
    const auto rounded = static_cast<std::int64_t>(std::llround(clock_s_ * 1000.0));
    return std::max(rounded, parent.difficulty.median_time_past() + 1);
}

std::vector<Transaction> Simulator::select_body(const consensus::ChainTip& parent)
{
    std::vector<Transaction> body;
    if (mempool_.empty())
        return body;
    const Height height = parent.height() + 1;
    const auto ledger_params = params_.ledger();
    const double cap = params_.fees.max_block_worth_omega_w;
    ledger::ChainState scratch = parent.state;
    double worth_used = 0.0;
    while (!mempool_.empty()) {
        const ServiceIntent& intent = mempool_.front();
        if (intent.worth > cap) {
            mempool_.pop_front();
            continue;
        }
        if (worth_used + intent.worth > cap)
            break; // stays queued for the next block
        auto it = scratch.accounts.find(intent.sender);
        if (it != scratch.accounts.end()) {
            Transaction tx;
            tx.kind = TxKind::service;
            tx.sender = intent.sender;
            tx.worth_w = intent.worth;
            tx.miner_wage = intent.wage;
            tx.nonce = it->second.next_nonce;
            try {
                ledger::apply_transaction_in_place(scratch, tx, kBodyBuilder, height, ledger_params);
                worth_used += intent.worth;
                body.push_back(std::move(tx));
            } catch (const ledger::LedgerError&) {
                // unaffordable: dropped
            }
        }
        mempool_.pop_front();
    }
    return body;
}

MinedBlock Simulator::finish(const consensus::ChainTip& parent, Block block, std::size_t miner,
                             const MiningOdds& odds, consensus::PowCheck pow)
{
    MinedBlock out;
    out.miner_index = miner;
    out.connected = consensus::connect_block(parent, block, params_, pow);
    out.record.height = block.header.height;
    out.record.timestamp_ms = block.header.timestamp_ms;
    out.record.miner = block.header.miner;
    out.record.psi_at_mine = odds.psi[miner];
    out.record.threshold = out.connected.threshold;
    out.record.interblock_ms = block.header.timestamp_ms - parent.difficulty.recent_timestamps_ms.back();
    out.block = std::move(block);
    return out;
}

MinedBlock Simulator::forge_empty(const consensus::ChainTip& parent, std::size_t miner, const MiningOdds& odds)
{
    Block block;
    block.header.parent_hash = parent.hash;
    block.header.body_hash = body_hash({});
    block.header.height = parent.height() + 1;
    block.header.timestamp_ms = next_timestamp(parent);
    block.header.miner = roster_[miner].id;
    block.header.psi_claimed = odds.psi[miner];
    return finish(parent, std::move(block), miner, odds, consensus::PowCheck::skip);
}

MinedBlock Simulator::mine_analytic(const consensus::ChainTip& parent)
{
    std::vector<std::size_t> all(roster_.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    const MiningOdds o = odds(parent, all);
    advance_clock(o.total_rate);
    const std::size_t winner = draw_miner(o);

    Block block;
    block.txs = select_body(parent);
    block.header.parent_hash = parent.hash;
    block.header.body_hash = body_hash(block.txs);
    block.header.height = parent.height() + 1;
    block.header.timestamp_ms = next_timestamp(parent);
    block.header.miner = roster_[winner].id;
    block.header.psi_claimed = o.psi[winner];
    auto mined = finish(parent, std::move(block), winner, o, consensus::PowCheck::skip);
    adopt(mined, o);
    return mined;
}

MinedBlock Simulator::mine_real_hash(const consensus::ChainTip& parent)
{
    std::vector<std::size_t> all(roster_.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    const MiningOdds o = odds(parent, all);

    double total_hash = 0.0;
    for (double g : hash_rates_)
        total_hash += g;
    if (!(total_hash > 0.0))
        throw std::runtime_error("no miner has a positive hash rate");

    const std::vector<Transaction> body = select_body(parent);
    const Digest body_digest = body_hash(body);
    std::vector<std::uint64_t> nonces(roster_.size(), 0);
    const unsigned beta = params_.chain.hash_bits_beta;

    for (std::uint64_t attempt = 0; attempt < kMaxHashAttemptsPerBlock; ++attempt) {
        clock_s_ += mining_rng_.exponential(total_hash);
        const std::size_t who = mining_rng_.categorical(hash_rates_, total_hash);
        BlockHeader header;
        header.parent_hash = parent.hash;
        header.body_hash = body_digest;
        header.height = parent.height() + 1;
        header.timestamp_ms = next_timestamp(parent);
        header.miner = roster_[who].id;
        header.psi_claimed = o.psi[who];
        header.nonce = nonces[who]++;
        if (consensus::check_pow(consensus::hash_value(header_hash(header), beta), o.thresholds[who])) {
            auto mined = finish(parent, Block{std::move(header), body}, who, o, consensus::PowCheck::enforce);
            adopt(mined, o);
            return mined;
        }
    }
    throw std::runtime_error("real-hash mining exceeded the per-block attempt budget");
}

void Simulator::adopt(MinedBlock mined, const MiningOdds& odds)
{
    std::map<AccountId, std::size_t> index;
    for (std::size_t i = 0; i < roster_.size(); ++i)
        index.emplace(roster_[i].id, i);
    for (const auto& r : mined.connected.receipts) {
        auto it = index.find(r.sender);
        if (it == index.end())
            continue;
        auto& s = stats_[it->second];
        s.entrance_fees_paid += r.entrance_fee;
        s.upload_fees_paid += r.upload_fee;
        s.wages_paid += r.miner_wage;
    }
    stats_[mined.miner_index].blocks_won += 1;
    for (std::size_t i = 0; i < roster_.size(); ++i)
        stats_[i].psi_trajectory.push_back(odds.psi[i]);
    if (mined.record.threshold == params_.chain.max_threshold())
        ++saturated_;
    records_.push_back(mined.record);
    tip_ = std::move(mined.connected.tip);
    last_block_ = std::move(mined.block);
}

const BlockRecord& Simulator::mine_next()
{
    if (mode_ == MiningMode::analytic)
        mine_analytic(tip_);
    else
        mine_real_hash(tip_);
    return records_.back();
}

std::vector<MinerStats> Simulator::miner_stats() const
{
    std::vector<MinerStats> out = stats_;
    for (auto& s : out) {
        s.final_psi = ledger::account_activity(tip_.state, s.id, tip_.height(), params_.activity);
        auto it = tip_.state.accounts.find(s.id);
        if (it != tip_.state.accounts.end()) {
            s.final_balance = it->second.balance;
            for (const auto& st : it->second.stakes)
                s.final_staked += st.amount;
        }
    }
    return out;
}

} // namespace rpoa::simnet
