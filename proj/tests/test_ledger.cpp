#include <cmath>
#include <random>

#include "doctest.h"
#include "rpoa/ledger.hpp"

using namespace rpoa;
using namespace rpoa::ledger;

namespace {

ChainState funded(std::initializer_list<std::pair<const char*, double>> balances)
{
    ChainState s;
    for (const auto& [id, coins] : balances)
        s.accounts[id].balance = to_atoms(coins);
    return s;
}

Transaction service(const std::string& sender, double worth, std::uint64_t nonce, Amount wage = 0)
{
    Transaction tx;
    tx.kind = TxKind::service;
    tx.sender = sender;
    tx.worth_w = worth;
    tx.nonce = nonce;
    tx.miner_wage = wage;
    return tx;
}

Transaction transfer(const std::string& from, const std::string& to, Amount amount, std::uint64_t nonce,
                     Amount wage = 0)
{
    Transaction tx;
    tx.sender = from;
    tx.receiver = to;
    tx.amount = amount;
    tx.nonce = nonce;
    tx.miner_wage = wage;
    return tx;
}

double oracle_psi(const std::vector<std::pair<double, Height>>& records, Height now, const LedgerParams& p)
{
    double psi = 1.0;
    const auto& a = p.activity;
    for (const auto& [w, h] : records) {
        const double tf = std::pow(a.time_scale_T / (static_cast<double>(now - h) + a.time_scale_T), a.decay_exponent_r);
        psi += a.activity_scale_alpha * tf * (a.worth_cap_chi - a.worth_scale_L / (w + a.worth_scale_L / a.worth_cap_chi));
    }
    return psi;
}

} // namespace

TEST_CASE("first service transaction at height 0 pays no entrance fee")
{
    LedgerParams p;
    p.fees.entrance_base_gamma_e = 1234.0;
    auto s = funded({{"u", 100.0}});
    const auto r = apply_transaction_in_place(s, service("u", 500.0, 0), "m", 0, p);
    CHECK(r.entrance_fee == 0);
    CHECK(r.upload_fee == to_atoms(2.0 * 0.5 * 1.0));
    const auto& acct = s.accounts.at("u");
    REQUIRE(acct.stakes.size() == 1);
    CHECK(acct.stakes[0].amount == r.upload_fee);
    CHECK(acct.stakes[0].release_height == p.fees.stake_lock_blocks);
    CHECK(acct.entered);
    CHECK(s.total_staked == r.upload_fee);
}

TEST_CASE("transfer of the full balance")
{
    LedgerParams p;
    auto s = funded({{"a", 7.0}});
    s = apply_transaction(s, transfer("a", "b", to_atoms(7.0), 0), "m", 1, p);
    CHECK(s.accounts.at("a").balance == 0);
    CHECK(s.accounts.at("b").balance == to_atoms(7.0));
    CHECK(s.total_supply() == to_atoms(7.0));
}

TEST_CASE("upload fee uses the sender's recomputed activity")
{
    LedgerParams p;
    auto s = funded({{"u", 10000.0}});
    apply_transaction_in_place(s, service("u", 40.0, 0), "m", 3, p);
    apply_transaction_in_place(s, service("u", 250.0, 1), "m", 20, p);
    const Amount before = s.accounts.at("u").balance;
    const auto r = apply_transaction_in_place(s, service("u", 100.0, 2), "m", 60, p);

    const double psi = oracle_psi({{40.0, 3}, {250.0, 20}}, 60, p);
    CHECK(r.psi == doctest::Approx(psi).epsilon(1e-12));
    const double fee = p.fees.upload_base_gamma_u * p.fees.service_base_alpha_fee * 100.0 /
                       p.fees.max_block_worth_omega_w * psi;
    CHECK(r.upload_fee == to_atoms(fee));
    CHECK(r.entrance_fee == 0);
    CHECK(before - s.accounts.at("u").balance == to_atoms(fee));
}

TEST_CASE("entrance fee is charged once and locked longer")
{
    LedgerParams p;
    auto s = funded({{"u", 1000.0}});
    const auto r1 = apply_transaction_in_place(s, service("u", 10.0, 0), "m", 16, p);
    CHECK(r1.entrance_fee == to_atoms(4.0));
    const auto r2 = apply_transaction_in_place(s, service("u", 10.0, 1), "m", 25, p);
    CHECK(r2.entrance_fee == 0);
    const auto& stakes = s.accounts.at("u").stakes;
    REQUIRE(stakes.size() == 3);
    CHECK(stakes[0].release_height == 16 + fees::kEntranceLockMultiplier * p.fees.stake_lock_blocks);
    CHECK(stakes[1].release_height == 16 + p.fees.stake_lock_blocks);
}

TEST_CASE("transfers never charge the entrance fee")
{
    LedgerParams p;
    auto s = funded({{"a", 10.0}});
    apply_transaction_in_place(s, transfer("a", "b", 1, 0), "m", 400, p);
    CHECK(!s.accounts.at("a").entered);
    CHECK(s.total_staked == 0);
}

TEST_CASE("transaction errors leave state untouched")
{
    LedgerParams p;
    const auto s0 = funded({{"a", 1.0}});
    auto s = s0;
    auto code = [&](const Transaction& tx) {
        try {
            apply_transaction_in_place(s, tx, "m", 5, p);
        } catch (const LedgerError& e) {
            return e.code();
        }
        FAIL("transaction unexpectedly applied");
        return LedgerErrc::malformed;
    };
    CHECK(code(transfer("a", "b", to_atoms(1.0) + 1, 0)) == LedgerErrc::insufficient_balance);
    CHECK(code(transfer("a", "b", to_atoms(1.0), 0, 1)) == LedgerErrc::insufficient_balance);
    CHECK(code(transfer("a", "b", 1, 1)) == LedgerErrc::bad_nonce);
    CHECK(code(transfer("zed", "b", 1, 0)) == LedgerErrc::unknown_sender);
    CHECK(code(service("a", p.fees.max_block_worth_omega_w + 1.0, 0)) == LedgerErrc::worth_cap_exceeded);
    CHECK(code(service("a", 900.0, 0)) == LedgerErrc::insufficient_balance);
    CHECK(s == s0);
}

TEST_CASE("stake release")
{
    auto s = funded({{"a", 0.0}, {"b", 0.0}});
    s.accounts["a"].stakes = {{100, 10}, {50, 11}};
    s.accounts["b"].stakes = {{7, 10}};
    s.total_staked = 157;
    CHECK(release_matured_stakes(s, 9) == s);

    const Amount supply = s.total_supply();
    const auto r = release_matured_stakes(s, 10);
    CHECK(r.accounts.at("a").balance == 100);
    CHECK(r.accounts.at("b").balance == 7);
    CHECK(r.total_staked == 50);
    CHECK(r.total_supply() == supply);
    CHECK(r.stakes_consistent());
}

TEST_CASE("randomized stake release conserves supply")
{
    std::mt19937_64 gen(99);
    ChainState s;
    for (int i = 0; i < 12; ++i) {
        auto& acct = s.accounts["acct" + std::to_string(i)];
        acct.balance = static_cast<Amount>(gen() % 100000);
        for (int k = 0; k < 5; ++k) {
            const Amount a = 1 + static_cast<Amount>(gen() % 5000);
            acct.stakes.push_back({a, gen() % 50});
            s.total_staked += a;
        }
    }
    const Amount supply = s.total_supply();
    for (Height h = 0; h < 60; h += 3) {
        s = release_matured_stakes(s, h);
        CHECK(s.total_supply() == supply);
        CHECK(s.stakes_consistent());
    }
    CHECK(s.total_staked == 0);
}

TEST_CASE("block application")
{
    LedgerParams p;
    auto s = funded({{"u", 500.0}});
    s.height = 9;

    Block empty;
    empty.header.height = 10;
    empty.header.miner = "m";
    const auto e = apply_block(s, empty, p);
    CHECK(e.height == 10);
    CHECK(e.accounts.at("m").balance == to_atoms(p.fees.block_reward));

    Block one = empty;
    one.txs = {service("u", 300.0, 0, 25)};
    // composition oracle: transaction, then maturation, then reward
    auto expected = apply_transaction(s, one.txs[0], "m", 10, p);
    expected = release_matured_stakes(expected, 10);
    expected.accounts["m"].balance += to_atoms(p.fees.block_reward);
    expected.height = 10;
    CHECK(apply_block(s, one, p) == expected);
    CHECK(expected.accounts.at("m").balance == to_atoms(p.fees.block_reward) + 25);
}

TEST_CASE("block worth cap and atomicity")
{
    LedgerParams p;
    auto s = funded({{"u", 5000.0}, {"v", 5000.0}});
    Block b;
    b.header.height = 1;
    b.header.miner = "m";
    b.txs = {service("u", 600.0, 0), service("v", 600.0, 0)};
    try {
        apply_block(s, b, p);
        FAIL("over-cap block accepted");
    } catch (const LedgerError& e) {
        CHECK(e.code() == LedgerErrc::block_worth_cap_exceeded);
    }

    b.txs = {service("u", 100.0, 0), transfer("v", "u", 1, 5)};
    const auto copy = s;
    CHECK_THROWS_AS(apply_block(s, b, p), LedgerError);
    CHECK(s == copy);

    b.header.height = 3;
    b.txs.clear();
    try {
        apply_block(s, b, p);
        FAIL("wrong height accepted");
    } catch (const LedgerError& e) {
        CHECK(e.code() == LedgerErrc::height_mismatch);
    }
}
