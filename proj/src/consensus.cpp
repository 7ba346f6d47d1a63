#include "rpoa/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rpoa::consensus {

void ChainParams::validate() const
{
    if (hash_bits_beta < 64 || hash_bits_beta > 256)
        throw std::invalid_argument("hash_bits_beta must be within [64, 256]");
    if (!(target_interval_CT > 0.0) || !std::isfinite(target_interval_CT))
        throw std::invalid_argument("target_interval_CT must be a finite positive number of seconds");
    if (retarget_window_W < 1)
        throw std::invalid_argument("retarget_window_W must be at least 1");
}

void ProtocolParams::validate() const
{
    chain.validate();
    activity.validate();
    fees.validate();
}

double difficulty_factor(std::span<const double> intervals, double target_interval)
{
    if (!(target_interval > 0.0))
        throw std::invalid_argument("target_interval_CT must be positive");
    if (intervals.empty())
        return 1.0;
    double sum = 0.0;
    for (double v : intervals)
        sum += v;
    return (sum / static_cast<double>(intervals.size())) / target_interval;
}

void DifficultyState::record_block(std::int64_t timestamp_ms, const ChainParams& params)
{
    if (!recent_timestamps_ms.empty()) {
        const double observed = static_cast<double>(timestamp_ms - recent_timestamps_ms.back()) / 1000.0;
        recent_intervals.push_back(observed * eta);
        while (recent_intervals.size() > params.retarget_window_W)
            recent_intervals.pop_front();
    }
    recent_timestamps_ms.push_back(timestamp_ms);
    while (recent_timestamps_ms.size() > kMedianTimeSpan)
        recent_timestamps_ms.pop_front();

    if (recent_intervals.size() >= params.retarget_window_W) {
        const std::vector<double> window(recent_intervals.begin(), recent_intervals.end());
        // An all-zero window (equal timestamps) would give eta 0; keep the previous value then.
        if (const double next = difficulty_factor(window, params.target_interval_CT); next > 0.0)
            eta = next;
    }
}

std::int64_t DifficultyState::median_time_past() const
{
    if (recent_timestamps_ms.empty())
        return 0;
    std::vector<std::int64_t> sorted(recent_timestamps_ms.begin(), recent_timestamps_ms.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted[sorted.size() / 2];
}

Uint256 mining_threshold(double eta, double psi, const ChainParams& params)
{
    params.validate();
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw std::invalid_argument("difficulty factor must be a finite positive number");
    if (!(psi >= 1.0) || !std::isfinite(psi))
        throw std::invalid_argument("activity must be at least 1");

    // eta = m1 * 2^(e1-53), psi = m2 * 2^(e2-53) with integer 53-bit mantissas, so
    // 2^(beta-1) * eta * psi = (m1 * m2) * 2^shift exactly.
    int e1 = 0;
    int e2 = 0;
    const auto m1 = static_cast<std::uint64_t>(std::ldexp(std::frexp(eta, &e1), 53));
    const auto m2 = static_cast<std::uint64_t>(std::ldexp(std::frexp(psi, &e2), 53));
    const unsigned __int128 product = static_cast<unsigned __int128>(m1) * m2;
    const int shift = e1 + e2 - 106 + static_cast<int>(params.hash_bits_beta) - 1;

    const Uint256 max = params.max_threshold();
    const Uint256 wide = Uint256::from_u128(product);
    if (shift >= 0) {
        if (wide.bit_length() + static_cast<unsigned>(shift) > params.hash_bits_beta)
            return max;
        return wide << static_cast<unsigned>(shift);
    }
    const Uint256 floored = wide >> static_cast<unsigned>(-shift);
    return std::min(floored, max);
}

Uint256 hash_value(const Digest& digest, unsigned beta)
{
    return Uint256::from_big_endian(digest) >> (Uint256::kBits - beta);
}

double success_probability(const Uint256& threshold, const ChainParams& params)
{
    return std::ldexp(threshold.to_double() + 1.0, -static_cast<int>(params.hash_bits_beta));
}

double block_work(const Uint256& threshold, const ChainParams& params)
{
    const double t = threshold.is_zero() ? 1.0 : threshold.to_double();
    return std::ldexp(1.0, static_cast<int>(params.hash_bits_beta)) / t;
}

const char* to_string(BlockStatus status)
{
    switch (status) {
    case BlockStatus::ok: return "ok";
    case BlockStatus::bad_linkage: return "bad-linkage";
    case BlockStatus::bad_height: return "bad-height";
    case BlockStatus::bad_timestamp: return "bad-timestamp";
    case BlockStatus::psi_mismatch: return "psi-mismatch";
    case BlockStatus::bad_pow: return "bad-pow";
    case BlockStatus::bad_body: return "bad-body";
    }
    return "unknown";
}

ConsensusError::ConsensusError(BlockStatus status)
    : std::runtime_error(std::string("block rejected: ") + to_string(status)), status_(status)
{
}

ChainTip genesis_tip(ledger::ChainState initial_state)
{
    ChainTip tip;
    const BlockHeader genesis = genesis_header();
    tip.hash = header_hash(genesis);
    initial_state.height = 0;
    tip.state = std::move(initial_state);
    tip.difficulty.recent_timestamps_ms.push_back(genesis.timestamp_ms);
    return tip;
}

double miner_psi(const ledger::ChainState& parent_state, const AccountId& miner, Height height,
                 const activity::ActivityParams& params)
{
    return ledger::account_activity(parent_state, miner, height, params);
}

Uint256 threshold_for(const ChainTip& parent, const AccountId& miner, const ProtocolParams& params)
{
    const double psi = miner_psi(parent.state, miner, parent.height() + 1, params.activity);
    return mining_threshold(parent.difficulty.eta, psi, params.chain);
}

BlockStatus validate_header(const ChainTip& parent, const BlockHeader& header, const ProtocolParams& params,
                            PowCheck pow)
{
    if (header.parent_hash != parent.hash)
        return BlockStatus::bad_linkage;
    if (header.height != parent.height() + 1)
        return BlockStatus::bad_height;
    if (header.timestamp_ms <= parent.difficulty.median_time_past())
        return BlockStatus::bad_timestamp;
    const double psi = miner_psi(parent.state, header.miner, header.height, params.activity);
    if (header.psi_claimed != psi)
        return BlockStatus::psi_mismatch;
    if (pow == PowCheck::enforce) {
        const Uint256 threshold = mining_threshold(parent.difficulty.eta, psi, params.chain);
        if (!check_pow(hash_value(header_hash(header), params.chain.hash_bits_beta), threshold))
            return BlockStatus::bad_pow;
    }
    return BlockStatus::ok;
}

ConnectResult connect_block(const ChainTip& parent, const Block& block, const ProtocolParams& params, PowCheck pow)
{
    if (const BlockStatus status = validate_header(parent, block.header, params, pow); status != BlockStatus::ok)
        throw ConsensusError(status);
    if (block.header.body_hash != body_hash(block.txs))
        throw ConsensusError(BlockStatus::bad_body);

    ConnectResult out;
    out.threshold = mining_threshold(parent.difficulty.eta, block.header.psi_claimed, params.chain);
    auto executed = ledger::execute_block(parent.state, block, params.ledger());
    out.receipts = std::move(executed.receipts);
    out.tip.state = std::move(executed.state);
    out.tip.hash = header_hash(block.header);
    out.tip.difficulty = parent.difficulty;
    out.tip.difficulty.record_block(block.header.timestamp_ms, params.chain);
    out.tip.cumulative_work = parent.cumulative_work + block_work(out.threshold, params.chain);
    return out;
}

std::optional<BlockHeader> mine_header(BlockHeader tmpl, const Uint256& threshold, unsigned beta,
                                       std::uint64_t max_attempts)
{
    for (std::uint64_t i = 0; i < max_attempts; ++i) {
        if (check_pow(hash_value(header_hash(tmpl), beta), threshold))
            return tmpl;
        ++tmpl.nonce;
    }
    return std::nullopt;
}

double cumulative_work(std::span<const WorkedHeader> chain, const ChainParams& params)
{
    double total = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (i > 0) {
            const BlockHeader& prev = chain[i - 1].header;
            const BlockHeader& cur = chain[i].header;
            if (cur.parent_hash != header_hash(prev) || cur.height != prev.height + 1)
                throw std::invalid_argument("chain segment is not linked at height " + std::to_string(cur.height));
        }
        total += block_work(chain[i].threshold, params);
    }
    return total;
}

std::size_t fork_choice(std::span<const TipCandidate> tips)
{
    if (tips.empty())
        throw std::invalid_argument("fork choice needs at least one tip");
    std::size_t best = 0;
    for (std::size_t i = 1; i < tips.size(); ++i) {
        const auto& cand = tips[i];
        const auto& cur = tips[best];
        if (cand.cumulative_work > cur.cumulative_work
            || (cand.cumulative_work == cur.cumulative_work && cand.hash < cur.hash))
            best = i;
    }
    return best;
}

} // namespace rpoa::consensus
