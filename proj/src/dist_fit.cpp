#include "ruinlab/dist_fit.hpp"

#include "ruinlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

namespace ruinlab {

namespace {

double sorted_sum(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return std::accumulate(sorted.begin(), sorted.end(), 0.0);
}

void check_counts(std::span<const double> counts) {
    for (double c : counts) {
        if (!(c >= 0.0) || std::floor(c) != c) {
            throw std::invalid_argument(fmt::format("claim counts must be non-negative integers, got {}", c));
        }
    }
}

double chi_square_stat(std::span<const double> observed, std::span<const double> expected) {
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    return stat;
}

} // namespace

FrequencyFit fit_poisson(std::span<const double> counts) {
    if (counts.size() < 2) {
        throw std::invalid_argument("fit_poisson: need at least two observations");
    }
    check_counts(counts);
    FrequencyFit fit;
    fit.n = counts.size();
    fit.lambda_hat = sorted_sum(counts) / static_cast<double>(fit.n);
    if (!(fit.lambda_hat > 0.0)) {
        throw NumericalError("fit_poisson: all counts are zero");
    }
    fit.std_error = std::sqrt(fit.lambda_hat / static_cast<double>(fit.n));
    return fit;
}

SeverityFit fit_exponential(std::span<const double> amounts) {
    if (amounts.size() < 2) {
        throw std::invalid_argument("fit_exponential: need at least two observations");
    }
    for (double a : amounts) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw std::invalid_argument(fmt::format("fit_exponential: amounts must be positive, got {}", a));
        }
    }
    SeverityFit fit;
    fit.n = amounts.size();
    fit.rate_hat = static_cast<double>(fit.n) / sorted_sum(amounts);
    fit.std_error = fit.rate_hat / std::sqrt(static_cast<double>(fit.n));
    return fit;
}

SeverityFit fit_claim_severity(std::span<const double> counts, std::span<const double> totals) {
    if (counts.size() != totals.size()) {
        throw std::invalid_argument("fit_claim_severity: length mismatch");
    }
    check_counts(counts);
    for (std::size_t i = 0; i < totals.size(); ++i) {
        if (!(totals[i] >= 0.0) || (counts[i] == 0.0 && totals[i] != 0.0) ||
            (counts[i] > 0.0 && totals[i] == 0.0)) {
            throw std::invalid_argument("fit_claim_severity: totals must be positive exactly when counts are");
        }
    }
    const double n_claims = sorted_sum(counts);
    if (n_claims < 2.0) {
        throw std::invalid_argument("fit_claim_severity: need at least two claims");
    }
    SeverityFit fit;
    fit.n = static_cast<std::size_t>(n_claims);
    fit.rate_hat = n_claims / sorted_sum(totals);
    fit.std_error = fit.rate_hat / std::sqrt(n_claims);
    return fit;
}

double chi_square_upper_tail(double statistic, int dof) {
    if (dof < 1) {
        throw std::invalid_argument("chi_square_upper_tail: dof must be >= 1");
    }
    if (!(statistic >= 0.0)) {
        throw std::invalid_argument("chi_square_upper_tail: statistic must be >= 0");
    }
    if (statistic == 0.0) {
        return 1.0;
    }
    if (std::isinf(statistic)) {
        return 0.0;
    }
    return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

GofResult gof_poisson(std::span<const double> counts, const FrequencyFit& fit, double min_expected) {
    if (counts.size() < 10) {
        throw std::invalid_argument("gof_poisson: need at least 10 observations");
    }
    check_counts(counts);
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    if (*lo == *hi) {
        throw NumericalError("gof_poisson: degenerate data (all counts equal), binning is meaningless");
    }

    const double n = static_cast<double>(counts.size());
    const boost::math::poisson_distribution<> pois(fit.lambda_hat);

    // Bins are [lower, upper] value ranges; the last upper is unbounded.
    std::vector<long> lower;
    std::vector<double> expected;
    long start = 0;
    double acc = 0.0;
    for (long k = 0;; ++k) {
        acc += n * boost::math::pdf(pois, static_cast<double>(k));
        const double tail_after = n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(k)));
        if (tail_after < min_expected) {
            // remaining mass cannot form its own bin: close as the upper tail
            lower.push_back(start);
            expected.push_back(acc + tail_after);
            break;
        }
        if (acc >= min_expected) {
            lower.push_back(start);
            expected.push_back(acc);
            start = k + 1;
            acc = 0.0;
        }
    }
    // A short final tail (< min_expected) merges into its predecessor.
    if (expected.size() >= 2 && expected.back() < min_expected) {
        expected[expected.size() - 2] += expected.back();
        expected.pop_back();
        lower.pop_back();
    }

    const std::size_t bins = expected.size();
    if (bins < 3) {
        throw NumericalError(fmt::format("gof_poisson: only {} bins after pooling (need 3)", bins));
    }
    std::vector<double> observed(bins, 0.0);
    for (double c : counts) {
        const auto k = static_cast<long>(c);
        const auto it = std::upper_bound(lower.begin(), lower.end(), k);
        observed[static_cast<std::size_t>(it - lower.begin()) - 1] += 1.0;
    }

    GofResult out;
    out.bins = bins;
    out.statistic = chi_square_stat(observed, expected);
    out.dof = static_cast<int>(bins) - 2;
    out.p_value = chi_square_upper_tail(out.statistic, out.dof);
    return out;
}

GofResult gof_exponential(std::span<const double> amounts, const SeverityFit& fit, int bins) {
    if (bins < 3) {
        throw std::invalid_argument("gof_exponential: need at least 3 bins");
    }
    const auto n = amounts.size();
    const int usable = std::min<int>(bins, static_cast<int>(n / 5));
    if (usable < 3) {
        throw NumericalError(fmt::format("gof_exponential: {} observations support fewer than 3 bins", n));
    }
    std::vector<double> observed(static_cast<std::size_t>(usable), 0.0);
    for (double a : amounts) {
        if (!(a > 0.0)) {
            throw std::invalid_argument("gof_exponential: amounts must be positive");
        }
        // fitted CDF value picks the equiprobable bin
        const double F = -std::expm1(-fit.rate_hat * a);
        auto j = static_cast<std::size_t>(F * usable);
        observed[std::min(j, observed.size() - 1)] += 1.0;
    }
    const std::vector<double> expected(observed.size(), static_cast<double>(n) / usable);

    GofResult out;
    out.bins = observed.size();
    out.statistic = chi_square_stat(observed, expected);
    out.dof = usable - 2;
    out.p_value = chi_square_upper_tail(out.statistic, out.dof);
    return out;
}

} // namespace ruinlab
