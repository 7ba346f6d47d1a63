#include <algorithm>
#include <cmath>
#include <set>

#include "rpoa/rng.hpp"
#include "rpoa/simnet/simnet.hpp"

namespace rpoa::simnet {

double theorem1_analytic_bound(const Theorem1Cell& cell, double service_fraction_c,
                               const activity::ActivityParams& params)
{
    return service_fraction_c * cell.n_b * cell.gamma / cell.n_u * activity::max_tx_activity(params);
}

namespace {

Theorem1CellResult sample_cell(const Theorem1Cell& cell, const Theorem1Knobs& knobs, double xi_sup,
                               const activity::ActivityParams& params, std::uint64_t seed)
{
    Rng rng(seed);
    const double mean = knobs.service_fraction_c * cell.n_b * cell.gamma / cell.n_u;
    const double sd = knobs.zeta_sd_ratio * mean;
    double sum = 0.0;
    std::uint64_t clamped = 0;
    for (std::uint64_t i = 0; i < knobs.samples; ++i) {
        double zeta = mean + sd * rng.normal();
        if (zeta < 0.0) {
            zeta = 0.0;
            ++clamped;
        }
        sum += zeta;
    }
    Theorem1CellResult out;
    out.cell = cell;
    out.nu = cell.nu();
    out.mean_zeta = sum / static_cast<double>(knobs.samples);
    out.clamp_fraction = static_cast<double>(clamped) / static_cast<double>(knobs.samples);
    out.expected_xi = out.mean_zeta * xi_sup;
    out.analytic_xi = theorem1_analytic_bound(cell, knobs.service_fraction_c, params);
    return out;
}

Theorem1Series run_series(const Theorem1Knobs& knobs, const activity::ActivityParams& params, std::uint64_t seed)
{
    Theorem1Series series;
    series.activity = params;
    // Per-transaction activity of a fresh, very large service transaction.
    series.xi_sup = activity::tx_activity(0.0, knobs.sup_worth, params);
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t j = 0; j < knobs.grid.size(); ++j) {
        series.cells.push_back(sample_cell(knobs.grid[j], knobs, series.xi_sup, params, derive_seed(seed, j)));
        xs.push_back(series.cells.back().nu);
        ys.push_back(series.cells.back().expected_xi);
    }
    series.fit = fit_least_squares(xs, ys);
    return series;
}

} // namespace

SimResult run_theorem1_experiment(const Scenario& scenario)
{
    scenario.validate();
    const auto& knobs = scenario.theorem1;

    Theorem1Report report;
    report.series.push_back(run_series(knobs, scenario.activity, derive_seed(scenario.seed, 7000)));
    for (std::size_t i = 0; i < knobs.variants.size(); ++i) {
        activity::ActivityParams params = scenario.activity;
        params.time_scale_T = knobs.variants[i].time_scale_T;
        params.decay_exponent_r = knobs.variants[i].decay_exponent_r;
        params.worth_scale_L = knobs.variants[i].worth_scale_L;
        report.series.push_back(run_series(knobs, params, derive_seed(scenario.seed, 7001 + i)));
    }

    const double base_slope = report.series.front().fit.slope;
    for (std::size_t i = 1; i < report.series.size(); ++i) {
        const double dev = base_slope != 0.0 ? std::abs(report.series[i].fit.slope / base_slope - 1.0) : 0.0;
        report.max_slope_deviation = std::max(report.max_slope_deviation, dev);
    }

    const Theorem1Series& base = report.series.front();
    for (const auto& c : base.cells) {
        if (c.analytic_xi > 0.0)
            report.clamping_bias = std::max(report.clamping_bias, std::abs(c.expected_xi / c.analytic_xi - 1.0));
    }

    std::set<double> miner_counts;
    for (const auto& c : knobs.grid)
        miner_counts.insert(c.n_m);
    if (miner_counts.size() >= 2) {
        std::vector<double> n_m;
        std::vector<double> residual;
        for (const auto& c : base.cells) {
            n_m.push_back(c.cell.n_m);
            residual.push_back(c.expected_xi - (base.fit.slope * c.nu + base.fit.intercept));
        }
        report.n_m_residual_slope = fit_least_squares(n_m, residual).slope;
    }

    SimResult result;
    result.kind = scenario.kind;
    result.scenario = scenario;
    result.theorem1 = std::move(report);
    return result;
}

} // namespace rpoa::simnet
