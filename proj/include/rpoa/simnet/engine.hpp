#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "rpoa/consensus.hpp"
#include "rpoa/rng.hpp"
#include "rpoa/simnet/scenario.hpp"
#include "rpoa/simnet/simnet.hpp"

namespace rpoa::simnet {

/// A pending service transaction; the nonce is assigned when a block includes it.
struct ServiceIntent {
    AccountId sender;
    double worth = 0.0;
    Amount wage = 0;
};

/// Per-miner view of one parent tip: activity, threshold and block-finding rate.
struct MiningOdds {
    std::vector<double> psi;
    std::vector<Uint256> thresholds;
    std::vector<double> rates; // blocks per second
    double total_rate = 0.0;
};

/// Result of mining one block on some parent.
struct MinedBlock {
    Block block;
    consensus::ConnectResult connected;
    BlockRecord record;
    std::size_t miner_index = 0;
};

/// Drives block production for one roster. Holds the simulated clock, the RNG
/// streams and the mempool; chain tips are plain values so callers can race
/// several forks against one another.
class Simulator {
public:
    Simulator(consensus::ProtocolParams params, MiningMode mode, std::vector<MinerAgent> roster,
              std::uint64_t seed);

    [[nodiscard]] const consensus::ChainTip& tip() const { return tip_; }
    [[nodiscard]] const std::vector<MinerAgent>& roster() const { return roster_; }
    [[nodiscard]] const std::vector<BlockRecord>& records() const { return records_; }
    [[nodiscard]] const consensus::ProtocolParams& params() const { return params_; }
    [[nodiscard]] double clock() const { return clock_s_; }
    [[nodiscard]] std::uint64_t saturated_blocks() const { return saturated_; }
    /// The block most recently adopted by mine_next (genesis child onwards).
    [[nodiscard]] const Block& last_block() const { return last_block_; }

    /// Multiplies every hash rate by `factor` from now on.
    void scale_hash_rates(double factor);
    [[nodiscard]] double hash_rate(std::size_t miner) const { return hash_rates_[miner]; }

    /// Queues the service transactions agents issue for block `height`.
    void issue_services(Height height);

    /// Mines the next block on the main tip among all miners and adopts it.
    const BlockRecord& mine_next();

    /// Per-miner odds of extending `parent`; miners outside `eligible` get rate 0.
    [[nodiscard]] MiningOdds odds(const consensus::ChainTip& parent, std::span<const std::size_t> eligible) const;

    /// Advances the clock by an exponential waiting time at `total_rate`.
    double advance_clock(double total_rate);
    /// Picks a miner with probability proportional to its rate.
    std::size_t draw_miner(const MiningOdds& odds);
    /// Uniform draw on the mining stream.
    double draw_uniform() { return mining_rng_.uniform(); }

    /// Forges and connects a block by `miner` on `parent` at the current clock,
    /// with an empty body. The PoW is not searched (analytic mode).
    MinedBlock forge_empty(const consensus::ChainTip& parent, std::size_t miner, const MiningOdds& odds);

    /// Final per-miner aggregates for the main chain.
    [[nodiscard]] std::vector<MinerStats> miner_stats() const;

    [[nodiscard]] static ledger::ChainState genesis_state(std::span<const MinerAgent> roster);

private:
    std::vector<Transaction> select_body(const consensus::ChainTip& parent);
    std::int64_t next_timestamp(const consensus::ChainTip& parent) const;
    MinedBlock finish(const consensus::ChainTip& parent, Block block, std::size_t miner, const MiningOdds& odds,
                      consensus::PowCheck pow);
    MinedBlock mine_analytic(const consensus::ChainTip& parent);
    MinedBlock mine_real_hash(const consensus::ChainTip& parent);
    void adopt(MinedBlock mined, const MiningOdds& odds);

    consensus::ProtocolParams params_;
    MiningMode mode_;
    std::vector<MinerAgent> roster_;
    std::vector<double> hash_rates_;
    Rng mining_rng_;
    Rng service_rng_;
    double clock_s_ = 0.0;
    consensus::ChainTip tip_;
    std::deque<ServiceIntent> mempool_;
    std::vector<BlockRecord> records_;
    std::vector<MinerStats> stats_;
    std::uint64_t saturated_ = 0;
    Block last_block_;
};

} // namespace rpoa::simnet
