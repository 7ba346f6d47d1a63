#include <cmath>
#include <stdexcept>

#include "rpoa/simnet/simnet.hpp"

namespace rpoa::simnet {

double PowerReport::total() const
{
    double sum = 0.0;
    for (const auto& [id, share] : shares)
        sum += share;
    return sum;
}

double PowerReport::share_of(const AccountId& id) const
{
    for (const auto& [who, share] : shares) {
        if (who == id)
            return share;
    }
    return 0.0;
}

PowerReport compute_power(const ledger::ChainState& state, std::span<const MinerAgent> roster, Height height,
                          const activity::ActivityParams& params)
{
    if (roster.empty())
        throw std::invalid_argument("compute_power: empty roster");
    PowerReport report;
    report.height = height;
    double denom = 0.0;
    for (const auto& m : roster) {
        const double weight = m.hash_rate_g * ledger::account_activity(state, m.id, height, params);
        report.shares.emplace_back(m.id, weight);
        denom += weight;
    }
    if (!(denom > 0.0))
        throw std::invalid_argument("compute_power: every miner has zero g * psi");
    for (auto& [id, share] : report.shares)
        share /= denom;
    return report;
}

RegressionFit fit_least_squares(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("fit_least_squares: need equally sized, non-empty samples");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    RegressionFit fit;
    if (sxx == 0.0) {
        fit.intercept = my;
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace rpoa::simnet
