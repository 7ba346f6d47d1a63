#include "rpoa/primitives.hpp"

#include <cmath>
#include <stdexcept>

#include "rpoa/serialize.hpp"

namespace rpoa {

Amount to_atoms(double coins)
{
    if (!std::isfinite(coins))
        throw std::domain_error("currency amount is not finite");
    const double atoms = std::round(coins * static_cast<double>(kAtomsPerCoin));
    if (std::fabs(atoms) >= 9.0e18)
        throw std::domain_error("currency amount overflows the ledger range");
    return static_cast<Amount>(atoms);
}

double to_coins(Amount atoms)
{
    return static_cast<double>(atoms) / static_cast<double>(kAtomsPerCoin);
}

namespace {

void write_tx(ByteWriter& w, const Transaction& tx)
{
    w.u8(static_cast<std::uint8_t>(tx.kind));
    w.str(tx.sender);
    w.str(tx.receiver);
    w.i64(tx.amount);
    w.f64(tx.worth_w);
    w.i64(tx.miner_wage);
    w.u64(tx.nonce);
}

} // namespace

std::vector<std::uint8_t> serialize(const Transaction& tx)
{
    ByteWriter w;
    write_tx(w, tx);
    return w.release();
}

std::vector<std::uint8_t> serialize(const BlockHeader& header)
{
    ByteWriter w;
    w.fixed(header.parent_hash);
    w.fixed(header.body_hash);
    w.u64(header.height);
    w.i64(header.timestamp_ms);
    w.str(header.miner);
    w.f64(header.psi_claimed);
    w.u64(header.nonce);
    return w.release();
}

Digest body_hash(std::span<const Transaction> txs)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(txs.size()));
    for (const auto& tx : txs)
        w.blob(serialize(tx));
    return sha256(w.bytes());
}

Digest header_hash(const BlockHeader& header)
{
    return sha256(serialize(header));
}

BlockHeader genesis_header()
{
    BlockHeader g;
    g.body_hash = body_hash({});
    return g;
}

} // namespace rpoa
