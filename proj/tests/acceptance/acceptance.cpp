// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <gmp.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"
#include "rpoa/activity.hpp"
#include "rpoa/cli/app.hpp"
#include "rpoa/consensus.hpp"
#include "rpoa/fees.hpp"
#include "rpoa/ledger.hpp"
#include "rpoa/simnet/simnet.hpp"

#ifndef RPOA_SCENARIO_DIR
#error "RPOA_SCENARIO_DIR must point at the example scenarios"
#endif

using namespace rpoa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
};

std::string coins_fmt(Amount atoms)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.8f", to_coins(atoms));
    return buf;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool close_rel(long double got, long double want, long double tol)
{
    if (want == 0.0L)
        return std::fabs(got) <= tol;
    return std::fabs(got - want) <= tol * std::fabs(want);
}

// ---------------------------------------------------------------------------
// 1. Closed forms against algebraically rearranged long-double oracles.

Outcome closed_forms()
{
    Outcome o;
    std::mt19937_64 gen(0xC0FFEE);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    constexpr int kInputs = 2000;
    constexpr long double kTol = 1e-9L;
    int checked = 0;

    for (int i = 0; i < kInputs; ++i) {
        activity::ActivityParams a;
        a.time_scale_T = std::exp2(20.0 * u(gen));
        a.decay_exponent_r = 0.1 + 4.0 * u(gen);
        a.worth_cap_chi = 0.5 + 50.0 * u(gen);
        a.worth_scale_L = 0.5 + 1000.0 * u(gen);
        a.activity_scale_alpha = 0.1 + 10.0 * u(gen);
        const double p = std::exp2(24.0 * u(gen)) - 1.0;
        const double w = std::exp2(30.0 * u(gen)) - 1.0;

        const long double T = a.time_scale_T, r = a.decay_exponent_r, chi = a.worth_cap_chi, L = a.worth_scale_L,
                          alpha = a.activity_scale_alpha;
        // TF = exp(-r * log1p(p/T)); WF = chi * w / (w + L/chi)
        const long double tf = std::exp(-r * std::log1p(static_cast<long double>(p) / T));
        const long double wf = chi * w / (w + L / chi);
        o.require(close_rel(activity::time_factor(p, a), tf, kTol), "time factor");
        o.require(close_rel(activity::worth_factor(w, a), wf, kTol) || std::fabs(wf) < 1e-12L, "worth factor");
        o.require(close_rel(activity::tx_activity(p, w, a), alpha * tf * wf, kTol) || wf < 1e-12L, "tx activity");

        // Total activity over a random history, summed in long double.
        std::vector<activity::ServiceRecord> history;
        const Height now = 1 + static_cast<Height>(u(gen) * 1e6);
        long double psi = 1.0L;
        const int n = static_cast<int>(u(gen) * 12);
        for (int k = 0; k < n; ++k) {
            const Height h = static_cast<Height>(u(gen) * static_cast<double>(now));
            const double wk = 500.0 * u(gen);
            history.push_back({wk, h, "u"});
            const long double pk = static_cast<long double>(now - h);
            psi += alpha * std::exp(-r * std::log1p(pk / T)) * chi * wk / (wk + L / chi);
        }
        o.require(close_rel(activity::total_activity(history, now, a), psi, kTol), "total activity");

        fees::FeeSchedule f;
        f.entrance_base_gamma_e = 0.01 + 100.0 * u(gen);
        f.service_base_alpha_fee = 0.01 + 100.0 * u(gen);
        f.max_block_worth_omega_w = 1.0 + 1e6 * u(gen);
        f.upload_base_gamma_u = 0.01 + 10.0 * u(gen);
        const auto height = static_cast<std::int64_t>(u(gen) * 1e9);
        const double wf_in = f.max_block_worth_omega_w * u(gen);
        const double psi_in = 1.0 + 1000.0 * u(gen);
        const long double entrance = f.entrance_base_gamma_e * std::exp(0.5L * std::log(static_cast<long double>(height)));
        o.require(close_rel(fees::entrance_fee(height, f), height == 0 ? 0.0L : entrance, kTol), "entrance fee");
        const long double base = (static_cast<long double>(wf_in) / f.max_block_worth_omega_w) * f.service_base_alpha_fee;
        o.require(close_rel(fees::base_service_fee(wf_in, f), base, kTol), "base service fee");
        const long double upload =
            static_cast<long double>(f.upload_base_gamma_u) * f.service_base_alpha_fee * psi_in * wf_in /
            f.max_block_worth_omega_w;
        o.require(close_rel(fees::upload_fee(wf_in, psi_in, f), upload, kTol), "upload fee");
        ++checked;
    }

    activity::ActivityParams a;
    a.activity_scale_alpha = 1.7;
    a.worth_cap_chi = 13.0;
    o.require(activity::time_factor(0.0, a) == 1.0, "TF(0) == 1");
    o.require(activity::worth_factor(0.0, a) == 0.0, "WF(0) == 0");
    o.require(activity::total_activity({}, 123, a) == 1.0, "psi(empty) == 1");
    o.require(activity::max_tx_activity(a) == 1.7 * 13.0, "sup xi == alpha * chi");
    o.require(activity::tx_activity(0.0, 1e15, a) < activity::max_tx_activity(a), "xi below its supremum");
    o.note(std::to_string(checked) + " random inputs per formula, rel tol 1e-9");
    return o;
}

// ---------------------------------------------------------------------------
// 2. Threshold against exact rational arithmetic.

std::string gmp_threshold_hex(double eta, double psi, unsigned beta)
{
    mpq_t q, r;
    mpq_inits(q, r, nullptr);
    mpq_set_d(q, eta);
    mpq_set_d(r, psi);
    mpq_mul(q, q, r);
    mpq_mul_2exp(q, q, beta - 1);
    mpz_t fl, mx;
    mpz_inits(fl, mx, nullptr);
    mpz_fdiv_q(fl, mpq_numref(q), mpq_denref(q));
    mpz_set_ui(mx, 1);
    mpz_mul_2exp(mx, mx, beta);
    mpz_sub_ui(mx, mx, 1);
    if (mpz_cmp(fl, mx) > 0)
        mpz_set(fl, mx);
    std::string out(mpz_sizeinbase(fl, 16) + 2, '\0');
    mpz_get_str(out.data(), 16, fl);
    out.resize(std::strlen(out.c_str()));
    mpz_clears(fl, mx, nullptr);
    mpq_clears(q, r, nullptr);
    return out;
}

std::string stripped(const Uint256& v)
{
    const std::string h = v.to_hex();
    const auto pos = h.find_first_not_of('0');
    return pos == std::string::npos ? "0" : h.substr(pos);
}

Outcome thresholds()
{
    Outcome o;
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    consensus::ChainParams p;
    int mismatches = 0;
    int linear_checked = 0;
    Uint256 worst;
    for (int i = 0; i < 1000; ++i) {
        const double eta = std::exp2(-60.0 + 62.0 * u(gen)) * (1.0 + u(gen));
        const double psi = 1.0 + std::exp2(10.0 * u(gen)) * u(gen);
        if (stripped(consensus::mining_threshold(eta, psi, p)) != gmp_threshold_hex(eta, psi, p.hash_bits_beta))
            ++mismatches;
        const Uint256 t1 = consensus::mining_threshold(eta, psi, p);
        const Uint256 t2 = consensus::mining_threshold(eta, 2.0 * psi, p);
        if (t2 == p.max_threshold())
            continue;
        const Uint256 twice = t1 + t1;
        const Uint256 diff = t2 > twice ? t2 - twice : twice - t2;
        worst = std::max(worst, diff);
        ++linear_checked;
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " thresholds differ from the exact reference");
    o.require(worst <= Uint256(2), "linearity deviation above 2");
    o.require(linear_checked >= 500, "too few unclamped linearity pairs");
    o.note("1000/1000 bit-exact at beta=256; max |t(2psi) - 2t(psi)| = " + stripped(worst) + " over " +
           std::to_string(linear_checked) + " unclamped pairs");
    return o;
}

// ---------------------------------------------------------------------------
// 3. Retarget convergence (ensemble of seeded runs).

Outcome retarget()
{
    Outcome o;
    simnet::Scenario s;
    s.kind = simnet::ExperimentKind::retarget;
    s.seed = 2024;
    s.duration_blocks = 1000;
    s.hash_rate_step = simnet::HashRateStep{500, 4.0};
    s.retarget.windows = {20};
    const auto r = simnet::run_retarget_experiment(s);
    const auto& w = r.retarget->windows.front();
    o.require(w.settled, "ensemble trailing mean left the band before the step");
    o.require(w.reconverged, "no re-convergence within 150 blocks of the step");
    o.note("runs " + std::to_string(w.runs) + ", steady mean " + num(w.steady_mean_interval_s) + " s (CT 60), " +
           "max dev blocks 200-499 " + num(w.settled_max_deviation) + ", max dev blocks 650-1000 " +
           num(w.post_step_max_deviation.value_or(-1)) + ", in band from block " +
           (w.reconverged_at ? std::to_string(*w.reconverged_at) : std::string("never")) +
           "; single run max dev " + num(w.single_run_max_deviation) + " (informational)");
    return o;
}

// ---------------------------------------------------------------------------
// 4. Block-win ratio under a 2:1 activity ratio.

Outcome fairness()
{
    Outcome o;
    simnet::Scenario s;
    s.seed = 31337;
    s.duration_blocks = 10000;
    s.activity.time_scale_T = 1e15; // no decay over the run
    // WF(w) = 1 at w = L / (chi (chi - 1)), so one transaction lifts psi to ~2.
    const double w = s.activity.worth_scale_L / (s.activity.worth_cap_chi * (s.activity.worth_cap_chi - 1.0));
    simnet::MinerAgent busy;
    busy.id = "busy";
    busy.service.script = {{1, w}};
    simnet::MinerAgent plain;
    plain.id = "plain";
    s.miners = {busy, plain};

    const auto r = simnet::run_simulation(s);
    const double won_busy = static_cast<double>(r.miners[0].blocks_won);
    const double won_plain = static_cast<double>(r.miners[1].blocks_won);
    const double ratio = won_busy / won_plain;

    // Exponential-race oracle: P(win) is proportional to g * (threshold + 1).
    const double psi = r.miners[0].final_psi;
    consensus::ChainParams cp;
    const double eta = 1e-9;
    const double oracle = (consensus::mining_threshold(eta, psi, cp).to_double() + 1.0) /
                          (consensus::mining_threshold(eta, 1.0, cp).to_double() + 1.0);
    o.require(std::abs(psi - 2.0) < 1e-9, "activity ratio is not 2:1");
    o.require(std::abs(ratio / 2.0 - 1.0) <= 0.05, "win ratio outside 2 +/- 5%");
    o.note("blocks " + num(won_busy) + " vs " + num(won_plain) + ", ratio " + num(ratio) + ", oracle " + num(oracle));
    return o;
}

// ---------------------------------------------------------------------------
// 5. Majority attack.

Outcome attack()
{
    Outcome o;
    auto run = [&](double share, std::uint64_t depth, std::uint64_t seed) {
        simnet::Scenario s;
        s.kind = simnet::ExperimentKind::attack;
        s.seed = seed;
        s.attack.adversary_share = share;
        s.attack.depth = depth;
        s.attack.budget = 200;
        s.attack.runs = 100;
        return *simnet::run_majority_attack(s).attack;
    };
    const auto high = run(0.9, 2, 9001);
    const auto low = run(0.1, 6, 9002);
    auto consistent = [](const simnet::AttackReport& r) {
        const double n = static_cast<double>(r.runs.size());
        const double ref = r.reference_probability;
        return std::abs(r.success_rate - ref) <= 3.0 * std::sqrt(ref * (1.0 - ref) / n) + 1.0 / n;
    };
    o.require(high.success_rate > 0.95, "share 0.9 success rate not above 95%");
    o.require(low.success_rate < 0.05, "share 0.1 success rate not below 5%");
    o.require(consistent(high) && consistent(low), "success rate inconsistent with the random-walk oracle");
    o.note("share 0.9 depth 2: " + num(high.success_rate) + " (oracle " + num(high.reference_probability) +
           "); share 0.1 depth 6: " + num(low.success_rate) + " (oracle " + num(low.reference_probability) +
           "); 100 runs each, budget 200");
    return o;
}

// ---------------------------------------------------------------------------
// 6. Sybil economics.

double oracle_psi(double worth, std::uint64_t period, Height now, const activity::ActivityParams& a)
{
    long double psi = 1.0L;
    for (Height h = 1; h < now; h += period) {
        const long double tf = std::pow(a.time_scale_T / (static_cast<long double>(now - h) + a.time_scale_T),
                                        static_cast<long double>(a.decay_exponent_r));
        psi += a.activity_scale_alpha * tf * a.worth_cap_chi * worth / (worth + a.worth_scale_L / a.worth_cap_chi);
    }
    return static_cast<double>(psi);
}

Outcome sybil()
{
    Outcome o;
    simnet::Scenario s;
    s.kind = simnet::ExperimentKind::sybil;
    s.seed = 555;
    s.duration_blocks = 1000;
    const auto& k = s.sybil;

    // Predicted activity of each side at the end, before simulating.
    const double psi_single = oracle_psi(k.service_worth, k.service_period, s.duration_blocks, s.activity);
    const double psi_member = oracle_psi(k.service_worth / static_cast<double>(k.sybil_count), k.service_period,
                                         s.duration_blocks, s.activity);
    o.require(psi_member < psi_single, "oracle: split identities should carry less activity each");

    const auto r = simnet::run_sybil_experiment(s);
    const auto& rep = *r.sybil;
    o.require(std::abs(rep.single.weighted_final_psi / psi_single - 1.0) < 1e-9, "single-side activity vs oracle");
    o.require(std::abs(rep.cluster.weighted_final_psi / psi_member - 1.0) < 1e-9, "cluster activity vs oracle");
    o.require(rep.cluster.entrance_fees >= 5 * rep.single.entrance_fees && rep.single.entrance_fees > 0,
              "cluster entrance fees below 5x the single identity's");
    const double n = static_cast<double>(r.blocks.size());
    o.require(static_cast<double>(rep.cluster.blocks_won) <= n / 2.0 + 3.0 * rep.block_sigma,
              "cluster won more blocks than the 3-sigma allowance");
    o.note("entrance fees " + num(to_coins(rep.cluster.entrance_fees)) + " vs " +
           num(to_coins(rep.single.entrance_fees)) + " (ratio " + num(rep.entrance_fee_ratio) + "), blocks " +
           std::to_string(rep.cluster.blocks_won) + " vs " + std::to_string(rep.single.blocks_won) +
           ", final psi " + num(rep.cluster.weighted_final_psi) + " vs " + num(rep.single.weighted_final_psi));
    return o;
}

// ---------------------------------------------------------------------------
// 7. Activity bound regression.

Outcome theorem1()
{
    Outcome o;
    simnet::Scenario s;
    s.kind = simnet::ExperimentKind::theorem1;
    s.seed = 11;
    s.theorem1.samples = 100000;
    const auto r = simnet::run_theorem1_experiment(s);
    const auto& t = *r.theorem1;
    double min_r2 = 1.0;
    for (const auto& series : t.series)
        min_r2 = std::min(min_r2, series.fit.r2);
    o.require(t.series.front().cells.size() == 5, "grid is not 5 points");
    o.require(min_r2 > 0.99, "R^2 not above 0.99");
    o.require(t.max_slope_deviation < 0.01, "slope moved by 1% or more across (T, r, L)");
    o.note("slope " + num(t.series.front().fit.slope) + ", min R^2 " + num(min_r2) + ", max slope deviation " +
           num(t.max_slope_deviation) + " over " + std::to_string(t.series.size() - 1) + " variants, clamping bias " +
           num(t.clamping_bias));
    return o;
}

// ---------------------------------------------------------------------------
// 8. Determinism of every subcommand.

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism()
{
    Outcome o;
    const fs::path root = fs::temp_directory_path() / ("rpoa_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::string dir = RPOA_SCENARIO_DIR;
    const std::vector<std::vector<std::string>> commands{
        {"run", "--scenario", dir + "/run.json"},
        {"attack", "--scenario", dir + "/attack.json"},
        {"sybil", "--scenario", dir + "/sybil.json"},
        {"theorem1", "--grid", "default", "--samples", "100000", "--seed", "3"},
        {"retarget-sweep", "--scenario", dir + "/retarget.json"},
        {"fees-table", "--heights", "0,4,10000", "--worths", "0,250,1000", "--psis", "1,2,3"},
    };
    int compared = 0;
    for (const auto& base : commands) {
        std::vector<fs::path> outs;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = root / (base[0] + "_" + std::to_string(rep));
            auto args = base;
            args.insert(args.end(), {"--out", out.string(), "--quiet"});
            std::ostringstream sink_out, sink_err;
            if (cli::run_app(args, sink_out, sink_err) != cli::kExitOk)
                o.require(false, base[0] + " exited with an error");
            outs.push_back(out);
        }
        for (const auto& entry : fs::directory_iterator(outs[0])) {
            const auto name = entry.path().filename();
            std::string a = slurp(outs[0] / name);
            std::string b = slurp(outs[1] / name);
            if (name == "manifest.json") {
                auto ja = nlohmann::json::parse(a);
                auto jb = nlohmann::json::parse(b);
                for (auto* j : {&ja, &jb}) {
                    j->erase("started_at");
                    j->erase("finished_at");
                    j->erase("output_dir");
                }
                a = ja.dump();
                b = jb.dump();
            }
            o.require(a == b, base[0] + "/" + name.string() + " differs");
            ++compared;
        }
    }
    fs::remove_all(root);
    o.note(std::to_string(compared) + " files compared across 6 subcommands (manifest wall-clock fields excluded)");
    return o;
}

// ---------------------------------------------------------------------------
// 9. Ledger fuzz.

Outcome ledger_fuzz()
{
    Outcome o;
    ledger::LedgerParams params;
    params.fees.stake_lock_blocks = 25;
    params.fees.entrance_base_gamma_e = 0.5;
    std::mt19937_64 gen(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    ledger::ChainState state;
    const std::vector<std::string> ids{"a", "b", "c", "d", "e", "f", "g", "h"};
    for (const auto& id : ids)
        state.accounts[id].balance = to_atoms(200.0 + 800.0 * u(gen));
    const Amount genesis_supply = state.total_supply();
    const Amount reward = to_atoms(params.fees.block_reward);

    int rejected_blocks = 0;
    int rejected_txs = 0;
    for (Height h = 1; h <= 500; ++h) {
        Block block;
        block.header.height = h;
        block.header.miner = ids[gen() % ids.size()];
        ledger::ChainState scratch = state;
        double worth = 0.0;
        const int n = static_cast<int>(gen() % 8);
        for (int i = 0; i < n; ++i) {
            Transaction tx;
            tx.sender = ids[gen() % ids.size()];
            const auto& acct = scratch.accounts.at(tx.sender);
            tx.nonce = acct.next_nonce;
            tx.miner_wage = static_cast<Amount>(u(gen) * 0.01 * static_cast<double>(kAtomsPerCoin));
            if (u(gen) < 0.5) {
                tx.kind = TxKind::transfer;
                tx.receiver = ids[gen() % ids.size()];
                tx.amount = static_cast<Amount>(u(gen) * 0.6 * static_cast<double>(acct.balance));
            } else {
                tx.kind = TxKind::service;
                tx.worth_w = 400.0 * u(gen);
            }
            const double fault = u(gen);
            if (fault < 0.05)
                tx.nonce += 1;
            else if (fault < 0.10 && tx.kind == TxKind::transfer)
                tx.amount = acct.balance + 1;
            else if (fault < 0.13)
                tx.sender = "ghost";

            const ledger::ChainState before = scratch;
            try {
                ledger::apply_transaction_in_place(scratch, tx, block.header.miner, h, params);
                if (tx.kind == TxKind::service && worth + tx.worth_w > params.fees.max_block_worth_omega_w) {
                    scratch = before;
                    continue;
                }
                worth += tx.kind == TxKind::service ? tx.worth_w : 0.0;
                block.txs.push_back(tx);
            } catch (const ledger::LedgerError&) {
                ++rejected_txs;
                if (!(scratch == before))
                    o.require(false, "failed transaction modified state at height " + std::to_string(h));
                // The same transaction inside a block must sink the whole block, leaving state untouched.
                Block bad = block;
                bad.txs.push_back(tx);
                const ledger::ChainState snapshot = state;
                try {
                    ledger::apply_block(state, bad, params);
                    o.require(false, "block with a failing transaction was accepted");
                } catch (const ledger::LedgerError&) {
                    ++rejected_blocks;
                }
                if (!(state == snapshot))
                    o.require(false, "failed block modified state");
            }
        }
        state = ledger::apply_block(state, block, params);
        if (state.total_supply() - genesis_supply != static_cast<Amount>(h) * reward)
            o.require(false, "supply drift at height " + std::to_string(h));
        if (!state.stakes_consistent())
            o.require(false, "total_staked mismatch at height " + std::to_string(h));
    }
    o.require(state.height == 500, "chain did not reach 500 blocks");
    o.require(rejected_blocks > 0, "fuzz produced no failing blocks");
    o.note("500 blocks, created " + coins_fmt(state.total_supply() - genesis_supply) + " coins = 500 x reward, " +
           std::to_string(rejected_txs) + " rejected txs, " + std::to_string(rejected_blocks) +
           " rejected blocks left state unchanged, staked at end " + coins_fmt(state.total_staked));
    return o;
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"closed-form formulas", closed_forms},
        {"threshold exactness", thresholds},
        {"retarget convergence", retarget},
        {"activity-weighted fairness", fairness},
        {"majority attack", attack},
        {"sybil economics", sybil},
        {"activity bound regression", theorem1},
        {"determinism", determinism},
        {"ledger conservation", ledger_fuzz},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
