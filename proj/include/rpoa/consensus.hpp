#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rpoa/activity.hpp"
#include "rpoa/fees.hpp"
#include "rpoa/hash.hpp"
#include "rpoa/ledger.hpp"
#include "rpoa/primitives.hpp"
#include "rpoa/uint256.hpp"

namespace rpoa::consensus {

struct ChainParams {
    unsigned hash_bits_beta = 256;
    double target_interval_CT = 60.0;   // seconds
    std::uint32_t retarget_window_W = 20; // blocks

    /// The all-ones beta-bit value; every hash is at most this.
    [[nodiscard]] Uint256 max_threshold() const { return Uint256::all_ones(hash_bits_beta); }

    /// Requires 64 <= beta <= 256, CT > 0, W >= 1.
    void validate() const;

    bool operator==(const ChainParams&) const = default;
};

/// Every protocol constant, grouped.
struct ProtocolParams {
    ChainParams chain;
    activity::ActivityParams activity;
    fees::FeeSchedule fees;

    [[nodiscard]] ledger::LedgerParams ledger() const { return {activity, fees}; }
    void validate() const;

    bool operator==(const ProtocolParams&) const = default;
};

/// Timestamps must exceed the median of this many previous blocks.
inline constexpr std::size_t kMedianTimeSpan = 11;

/// mean(intervals) / CT, or 1.0 for an empty list. Throws on CT <= 0.
double difficulty_factor(std::span<const double> intervals, double target_interval);

/// Retarget state carried by each chain tip.
///
/// Each stored interval is the observed inter-block time multiplied by the
/// difficulty factor that block was mined under, i.e. the time the block would
/// have taken at eta = 1. The mean of those over the last W blocks, divided by
/// CT, is the next eta. Until W intervals exist eta stays 1.
struct DifficultyState {
    std::deque<double> recent_intervals;
    double eta = 1.0;
    std::deque<std::int64_t> recent_timestamps_ms;

    void record_block(std::int64_t timestamp_ms, const ChainParams& params);
    /// Median of the stored timestamps (upper median); 0 when none are stored.
    [[nodiscard]] std::int64_t median_time_past() const;

    bool operator==(const DifficultyState&) const = default;
};

/// min(floor(2^(beta-1) * eta * psi), 2^beta - 1), computed exactly from the
/// binary values of eta and psi. Throws std::invalid_argument on eta <= 0 or psi < 1.
Uint256 mining_threshold(double eta, double psi, const ChainParams& params);

/// The leading `beta` bits of a digest read as a big-endian integer.
Uint256 hash_value(const Digest& digest, unsigned beta);

/// hash <= threshold.
inline bool check_pow(const Uint256& hash, const Uint256& threshold) { return hash <= threshold; }

/// Chance that one hash attempt meets `threshold`: (threshold + 1) / 2^beta.
double success_probability(const Uint256& threshold, const ChainParams& params);

/// Expected hashes per block at `threshold`: 2^beta / threshold (threshold 0 counts as 1).
double block_work(const Uint256& threshold, const ChainParams& params);

enum class BlockStatus {
    ok,
    bad_linkage,
    bad_height,
    bad_timestamp,
    psi_mismatch,
    bad_pow,
    bad_body,
};

const char* to_string(BlockStatus status);

class ConsensusError : public std::runtime_error {
public:
    explicit ConsensusError(BlockStatus status);
    [[nodiscard]] BlockStatus status() const noexcept { return status_; }

private:
    BlockStatus status_;
};

struct ChainTip {
    Digest hash{};
    ledger::ChainState state;
    DifficultyState difficulty;
    double cumulative_work = 0.0;

    [[nodiscard]] Height height() const { return state.height; }

    bool operator==(const ChainTip&) const = default;
};

ChainTip genesis_tip(ledger::ChainState initial_state);

/// Activity the given miner mines a block at `height` with, from the parent state.
double miner_psi(const ledger::ChainState& parent_state, const AccountId& miner, Height height,
                 const activity::ActivityParams& params);

/// Threshold the given miner faces when extending `parent`.
Uint256 threshold_for(const ChainTip& parent, const AccountId& miner, const ProtocolParams& params);

enum class PowCheck { enforce, skip };

/// Checks linkage, height, median-time-past, the claimed activity and (unless skipped) the mining inequality.
BlockStatus validate_header(const ChainTip& parent, const BlockHeader& header, const ProtocolParams& params,
                            PowCheck pow = PowCheck::enforce);

struct ConnectResult {
    ChainTip tip;
    std::vector<ledger::TxReceipt> receipts;
    Uint256 threshold;
};

/// Validates a block against its parent and applies it. Throws ConsensusError or
/// ledger::LedgerError; `parent` is never modified.
ConnectResult connect_block(const ChainTip& parent, const Block& block, const ProtocolParams& params,
                            PowCheck pow = PowCheck::enforce);

/// Searches nonces from `tmpl.nonce` upward for a header meeting `threshold`.
std::optional<BlockHeader> mine_header(BlockHeader tmpl, const Uint256& threshold, unsigned beta,
                                       std::uint64_t max_attempts);

struct WorkedHeader {
    BlockHeader header;
    Uint256 threshold;
};

/// Sum of block_work over a linked chain segment. Throws std::invalid_argument on broken linkage.
double cumulative_work(std::span<const WorkedHeader> chain, const ChainParams& params);

struct TipCandidate {
    Digest hash{};
    double cumulative_work = 0.0;
};

/// Index of the heaviest tip; equal work goes to the smaller hash. Throws on an empty set.
std::size_t fork_choice(std::span<const TipCandidate> tips);

} // namespace rpoa::consensus
