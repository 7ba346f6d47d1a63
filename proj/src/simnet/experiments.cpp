#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "rpoa/simnet/engine.hpp"
#include "rpoa/simnet/simnet.hpp"

namespace rpoa::simnet {

namespace {

/// Calls fn(i) for i in [0, n) on a small worker pool; results land at index i,
/// so the output does not depend on scheduling.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, Fn fn)
{
    std::vector<T> out(n);
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            (void)w;
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    if (!failed.exchange(true))
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

std::vector<MinerAgent> current_roster(const Simulator& sim)
{
    std::vector<MinerAgent> roster = sim.roster();
    for (std::size_t i = 0; i < roster.size(); ++i)
        roster[i].hash_rate_g = sim.hash_rate(i);
    return roster;
}

RunMetrics collect_metrics(const Simulator& sim)
{
    RunMetrics m;
    const auto& records = sim.records();
    m.chain_length = sim.tip().height();
    if (!records.empty()) {
        double sum_ms = 0.0;
        for (const auto& r : records)
            sum_ms += static_cast<double>(r.interblock_ms);
        m.mean_interblock_s = sum_ms / 1000.0 / static_cast<double>(records.size());
        m.saturation_fraction =
            static_cast<double>(sim.saturated_blocks()) / static_cast<double>(records.size());
    }
    m.final_eta = sim.tip().difficulty.eta;
    const auto roster = current_roster(sim);
    const bool any_power = std::any_of(roster.begin(), roster.end(), [](const MinerAgent& a) {
        return a.hash_rate_g > 0.0;
    });
    if (any_power)
        m.final_power = compute_power(sim.tip().state, roster, sim.tip().height(), sim.params().activity);
    m.total_supply = sim.tip().state.total_supply();
    return m;
}

void run_blocks(Simulator& sim, const Scenario& scenario, Height from, Height to)
{
    for (Height h = from; h <= to; ++h) {
        if (scenario.hash_rate_step && scenario.hash_rate_step->height == h)
            sim.scale_hash_rates(scenario.hash_rate_step->factor);
        sim.issue_services(h);
        sim.mine_next();
    }
}

void add_saturation_warning(SimResult& result)
{
    if (result.metrics.saturation_fraction > 0.9) {
        result.warnings.push_back("threshold clamped at the hash-space maximum for " +
                                  std::to_string(result.metrics.saturation_fraction * 100.0) +
                                  "% of blocks; block times no longer respond to difficulty");
    }
}

} // namespace

SimResult run_simulation(const Scenario& scenario)
{
    scenario.validate();
    Simulator sim(scenario.protocol(), scenario.mining_mode, scenario.miners, scenario.seed);
    run_blocks(sim, scenario, 1, scenario.duration_blocks);

    SimResult result;
    result.kind = scenario.kind;
    result.scenario = scenario;
    result.blocks = sim.records();
    result.miners = sim.miner_stats();
    result.metrics = collect_metrics(sim);
    add_saturation_warning(result);
    return result;
}

// ---------------------------------------------------------------------------
// Majority attack

double attack_reference_probability(double p, std::uint64_t depth, std::uint64_t budget)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("attack_reference_probability: p must lie in [0, 1]");
    // dist[k] = probability the adversary trails by k blocks and has not won yet.
    const std::size_t size = depth + budget + 2;
    std::vector<double> dist(size, 0.0);
    std::vector<double> next(size, 0.0);
    dist[depth] = 1.0;
    double won = 0.0;
    for (std::uint64_t step = 0; step < budget; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t k = 0; k < size; ++k) {
            if (dist[k] == 0.0)
                continue;
            if (k == 0)
                won += dist[k] * p;
            else
                next[k - 1] += dist[k] * p;
            if (k + 1 < size)
                next[k + 1] += dist[k] * (1.0 - p);
        }
        dist.swap(next);
    }
    return won;
}

namespace {

struct AttackSetup {
    std::vector<MinerAgent> roster;
    std::size_t adversary = 0;
};

AttackSetup attack_setup(const Scenario& scenario)
{
    AttackSetup setup;
    setup.roster = scenario.miners;
    auto it = std::find_if(setup.roster.begin(), setup.roster.end(), [](const MinerAgent& m) {
        return m.behavior == Behavior::withhold_and_overtake;
    });
    setup.adversary = it == setup.roster.end() ? 0 : static_cast<std::size_t>(it - setup.roster.begin());
    setup.roster[setup.adversary].behavior = Behavior::withhold_and_overtake;

    double total = 0.0;
    double honest = 0.0;
    std::size_t honest_count = 0;
    for (std::size_t i = 0; i < setup.roster.size(); ++i) {
        total += setup.roster[i].hash_rate_g;
        if (i != setup.adversary) {
            honest += setup.roster[i].hash_rate_g;
            ++honest_count;
        }
    }
    const double s = scenario.attack.adversary_share;
    for (std::size_t i = 0; i < setup.roster.size(); ++i) {
        auto& m = setup.roster[i];
        if (i == setup.adversary)
            m.hash_rate_g = s * total;
        else if (honest > 0.0)
            m.hash_rate_g = (1.0 - s) * total * m.hash_rate_g / honest;
        else
            m.hash_rate_g = (1.0 - s) * total / static_cast<double>(honest_count);
    }
    return setup;
}

AttackRun run_one_attack(const Scenario& scenario, const AttackSetup& setup, std::uint64_t run_seed)
{
    const auto& knobs = scenario.attack;
    Simulator sim(scenario.protocol(), MiningMode::analytic, setup.roster, run_seed);

    std::vector<consensus::ChainTip> history{sim.tip()};
    const Height warmup = std::max(knobs.warmup_blocks, knobs.depth);
    for (Height h = 1; h <= warmup; ++h) {
        sim.issue_services(h);
        sim.mine_next();
        history.push_back(sim.tip());
    }

    AttackRun run;
    run.seed = run_seed;
    consensus::ChainTip priv = history[warmup - knobs.depth];
    consensus::ChainTip pub = sim.tip();
    run.adversary_power = compute_power(priv.state, setup.roster, priv.height() + 1, scenario.activity)
                              .share_of(setup.roster[setup.adversary].id);

    const std::vector<std::size_t> adversary{setup.adversary};
    std::vector<std::size_t> honest;
    for (std::size_t i = 0; i < setup.roster.size(); ++i) {
        if (i != setup.adversary)
            honest.push_back(i);
    }

    for (std::uint64_t b = 0; b < knobs.budget; ++b) {
        const MiningOdds priv_odds = sim.odds(priv, adversary);
        const MiningOdds pub_odds = sim.odds(pub, honest);
        const double total = priv_odds.total_rate + pub_odds.total_rate;
        sim.advance_clock(total);
        ++run.blocks_used;
        if (sim.draw_uniform() * total < priv_odds.total_rate) {
            priv = sim.forge_empty(priv, setup.adversary, priv_odds).connected.tip;
            ++run.adversary_blocks;
        } else {
            const std::size_t who = sim.draw_miner(pub_odds);
            pub = sim.forge_empty(pub, who, pub_odds).connected.tip;
            ++run.honest_blocks;
        }
        if (priv.cumulative_work > pub.cumulative_work) {
            const std::vector<consensus::TipCandidate> tips{{pub.hash, pub.cumulative_work},
                                                            {priv.hash, priv.cumulative_work}};
            run.success = consensus::fork_choice(tips) == 1;
            break;
        }
    }
    return run;
}

} // namespace

SimResult run_majority_attack(const Scenario& scenario)
{
    scenario.validate();
    const AttackSetup setup = attack_setup(scenario);
    const auto& knobs = scenario.attack;

    AttackReport report;
    report.adversary_share = knobs.adversary_share;
    report.depth = knobs.depth;
    report.budget = knobs.budget;
    report.runs = parallel_map<AttackRun>(knobs.runs, [&](std::size_t i) {
        return run_one_attack(scenario, setup, derive_seed(scenario.seed, 1000 + i));
    });

    double successes = 0.0;
    double power = 0.0;
    for (const auto& r : report.runs) {
        successes += r.success ? 1.0 : 0.0;
        power += r.adversary_power;
    }
    const auto n = static_cast<double>(report.runs.size());
    report.success_rate = successes / n;
    report.reference_probability = attack_reference_probability(power / n, knobs.depth, knobs.budget);

    SimResult result;
    result.kind = scenario.kind;
    result.scenario = scenario;
    result.attack = std::move(report);
    if (scenario.mining_mode == MiningMode::real_hash)
        result.warnings.push_back("attack races always use analytic mining");
    return result;
}

// ---------------------------------------------------------------------------
// Sybil economics

std::vector<MinerAgent> sybil_roster(const Scenario& scenario)
{
    const auto& knobs = scenario.sybil;
    double total = 0.0;
    for (const auto& m : scenario.miners)
        total += m.hash_rate_g;
    const auto k = static_cast<double>(knobs.sybil_count);

    std::vector<MinerAgent> roster;
    MinerAgent single;
    single.id = "single";
    single.hash_rate_g = total / 2.0;
    single.initial_balance = knobs.identity_balance;
    single.service.period_blocks = knobs.service_period;
    single.service.period_worth = knobs.service_worth;
    roster.push_back(single);
    for (std::uint64_t i = 1; i <= knobs.sybil_count; ++i) {
        MinerAgent s;
        s.id = "sybil-" + std::to_string(i);
        s.behavior = Behavior::sybil_cluster;
        s.hash_rate_g = total / (2.0 * k);
        s.initial_balance = knobs.identity_balance / k;
        s.service.period_blocks = knobs.service_period;
        s.service.period_worth = knobs.service_worth / k;
        roster.push_back(s);
    }
    return roster;
}

SimResult run_sybil_experiment(const Scenario& scenario)
{
    scenario.validate();
    const auto roster = sybil_roster(scenario);
    Simulator sim(scenario.protocol(), scenario.mining_mode, roster, scenario.seed);
    run_blocks(sim, scenario, 1, scenario.duration_blocks);

    SimResult result;
    result.kind = scenario.kind;
    result.scenario = scenario;
    result.blocks = sim.records();
    result.miners = sim.miner_stats();
    result.metrics = collect_metrics(sim);
    add_saturation_warning(result);

    SybilReport report;
    report.sybil_count = scenario.sybil.sybil_count;
    report.single.label = "single";
    report.cluster.label = "cluster";
    double single_weight = 0.0;
    double cluster_weight = 0.0;
    for (const auto& m : result.miners) {
        SybilSide& side = m.id == "single" ? report.single : report.cluster;
        double& weight = m.id == "single" ? single_weight : cluster_weight;
        side.ids.push_back(m.id);
        side.hash_rate += m.hash_rate;
        side.blocks_won += m.blocks_won;
        side.entrance_fees += m.entrance_fees_paid;
        side.upload_fees += m.upload_fees_paid;
        weight += m.hash_rate * m.final_psi;
    }
    report.single.weighted_final_psi = report.single.hash_rate > 0.0 ? single_weight / report.single.hash_rate : 1.0;
    report.cluster.weighted_final_psi =
        report.cluster.hash_rate > 0.0 ? cluster_weight / report.cluster.hash_rate : 1.0;
    report.entrance_fee_ratio = report.single.entrance_fees > 0
                                    ? static_cast<double>(report.cluster.entrance_fees) /
                                          static_cast<double>(report.single.entrance_fees)
                                    : 0.0;
    report.block_sigma = std::sqrt(static_cast<double>(result.blocks.size()) * 0.25);
    result.sybil = std::move(report);
    return result;
}

// ---------------------------------------------------------------------------
// Retarget sweep

namespace {

struct RetargetRun {
    std::vector<double> interblock_s; // index = height; [0] unused
    std::vector<BlockRecord> records;
    std::vector<MinerStats> miners;
    RunMetrics metrics;
};

/// trailing[h] = mean of interblock over heights (h - n, h]; 0 for h < n.
std::vector<double> trailing_mean(const std::vector<double>& interblock_s, std::uint64_t n)
{
    std::vector<double> out(interblock_s.size(), 0.0);
    double sum = 0.0;
    for (std::size_t h = 1; h < interblock_s.size(); ++h) {
        sum += interblock_s[h];
        if (h > n)
            sum -= interblock_s[h - n];
        if (h >= n)
            out[h] = sum / static_cast<double>(n);
    }
    return out;
}

double max_deviation(const std::vector<double>& series, Height from, Height to, double target)
{
    double worst = 0.0;
    for (Height h = from; h <= to && h < series.size(); ++h)
        worst = std::max(worst, std::abs(series[h] / target - 1.0));
    return worst;
}

} // namespace

SimResult run_retarget_experiment(const Scenario& scenario)
{
    scenario.validate();
    const auto& knobs = scenario.retarget;
    const Height duration = scenario.duration_blocks;
    const double ct = scenario.chain.target_interval_CT;

    SimResult result;
    result.kind = scenario.kind;
    result.scenario = scenario;
    RetargetReport report;

    for (std::size_t wi = 0; wi < knobs.windows.size(); ++wi) {
        Scenario variant = scenario;
        variant.chain.retarget_window_W = knobs.windows[wi];
        const std::uint64_t window_seed = derive_seed(scenario.seed, knobs.windows[wi]);

        auto runs = parallel_map<RetargetRun>(knobs.runs, [&](std::size_t r) {
            Simulator sim(variant.protocol(), variant.mining_mode, variant.miners, derive_seed(window_seed, r));
            run_blocks(sim, variant, 1, duration);
            RetargetRun out;
            out.interblock_s.assign(duration + 1, 0.0);
            for (const auto& rec : sim.records())
                out.interblock_s[rec.height] = static_cast<double>(rec.interblock_ms) / 1000.0;
            if (r == 0) {
                out.records = sim.records();
                out.miners = sim.miner_stats();
                out.metrics = collect_metrics(sim);
            }
            return out;
        });

        RetargetWindowResult w;
        w.window = knobs.windows[wi];
        w.runs = knobs.runs;
        w.ensemble_trailing_mean_s.assign(duration + 1, 0.0);
        for (const auto& run : runs) {
            const auto tm = trailing_mean(run.interblock_s, knobs.trailing);
            for (std::size_t h = 0; h < tm.size(); ++h)
                w.ensemble_trailing_mean_s[h] += tm[h];
        }
        for (auto& v : w.ensemble_trailing_mean_s)
            v /= static_cast<double>(runs.size());

        const bool stepped = scenario.hash_rate_step && scenario.hash_rate_step->height <= duration;
        const Height settle_end = stepped ? scenario.hash_rate_step->height - 1 : duration;
        const Height settle_from = knobs.settle_height;
        if (settle_end >= settle_from) {
            w.settled_max_deviation = max_deviation(w.ensemble_trailing_mean_s, settle_from, settle_end, ct);
            double sum = 0.0;
            for (Height h = settle_from; h <= settle_end; ++h)
                sum += w.ensemble_trailing_mean_s[h];
            w.steady_mean_interval_s = sum / static_cast<double>(settle_end - settle_from + 1);
            w.single_run_max_deviation =
                max_deviation(trailing_mean(runs[0].interblock_s, knobs.trailing), settle_from, settle_end, ct);
        }
        w.settled = w.settled_max_deviation <= knobs.tolerance;

        if (stepped) {
            const Height step = scenario.hash_rate_step->height;
            const Height from = step + knobs.reconverge_blocks;
            if (from <= duration) {
                w.post_step_max_deviation = max_deviation(w.ensemble_trailing_mean_s, from, duration, ct);
                w.reconverged = *w.post_step_max_deviation <= knobs.tolerance;
            } else {
                w.reconverged = false;
            }
            // Earliest height from which the ensemble stays inside the band to the end.
            std::optional<Height> since;
            for (Height h = duration; h >= step; --h) {
                if (std::abs(w.ensemble_trailing_mean_s[h] / ct - 1.0) > knobs.tolerance)
                    break;
                since = h;
            }
            w.reconverged_at = since;
        }

        if (wi == 0) {
            result.blocks = std::move(runs[0].records);
            result.miners = std::move(runs[0].miners);
            result.metrics = std::move(runs[0].metrics);
        }
        report.windows.push_back(std::move(w));
    }
    result.retarget = std::move(report);
    add_saturation_warning(result);
    return result;
}

SimResult run_experiment(const Scenario& scenario)
{
    switch (scenario.kind) {
    case ExperimentKind::run: return run_simulation(scenario);
    case ExperimentKind::attack: return run_majority_attack(scenario);
    case ExperimentKind::sybil: return run_sybil_experiment(scenario);
    case ExperimentKind::theorem1: return run_theorem1_experiment(scenario);
    case ExperimentKind::retarget: return run_retarget_experiment(scenario);
    }
    throw std::logic_error("unknown experiment kind");
}

} // namespace rpoa::simnet
