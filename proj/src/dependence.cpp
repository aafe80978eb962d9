#include "ruinlab/dependence.hpp"

#include "ruinlab/errors.hpp"
#include "ruinlab/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

namespace ruinlab {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_n, const char* who) {
    if (x.size() != y.size()) {
        throw std::invalid_argument(fmt::format("{}: length mismatch ({} vs {})", who, x.size(), y.size()));
    }
    if (x.size() < min_n) {
        throw std::invalid_argument(fmt::format("{}: need at least {} pairs", who, min_n));
    }
}

// Number of pairs i < j with v[i] > v[j]; sorts v.
std::uint64_t count_inversions(std::vector<double>& v) {
    std::vector<double> buffer(v.size());
    std::uint64_t swaps = 0;
    for (std::size_t width = 1; width < v.size(); width *= 2) {
        for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, v.size());
            const std::size_t hi = std::min(lo + 2 * width, v.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[j] < v[i]) {
                    swaps += mid - i;
                    buffer[k++] = v[j++];
                } else {
                    buffer[k++] = v[i++];
                }
            }
            while (i < mid) buffer[k++] = v[i++];
            while (j < hi) buffer[k++] = v[j++];
        }
        std::swap(v, buffer);
    }
    return swaps;
}

// Sum of t(t-1)/2 over runs of equal values in a sorted sequence.
template <class It, class Eq>
std::uint64_t tied_pairs(It first, It last, Eq eq) {
    std::uint64_t total = 0;
    while (first != last) {
        auto run_end = std::next(first);
        while (run_end != last && eq(*run_end, *first)) {
            ++run_end;
        }
        const auto t = static_cast<std::uint64_t>(std::distance(first, run_end));
        total += t * (t - 1) / 2;
        first = run_end;
    }
    return total;
}

} // namespace

Correlation pearson_correlation(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, 3, "pearson_correlation");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::invalid_argument("pearson_correlation: constant input");
    }
    Correlation out;
    out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double one_minus_r2 = 1.0 - out.r * out.r;
    if (one_minus_r2 <= 0.0) {
        out.p_value = 0.0;
        return out;
    }
    const double dof = n - 2.0;
    const double t = out.r * std::sqrt(dof / one_minus_r2);
    const boost::math::students_t dist(dof);
    out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
    return out;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, 3, "kendall_tau");
    const std::size_t n = x.size();
    std::vector<std::pair<double, double>> xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xy[i] = {x[i], y[i]};
    }
    std::sort(xy.begin(), xy.end());

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t n1 =
        tied_pairs(xy.begin(), xy.end(), [](const auto& a, const auto& b) { return a.first == b.first; });
    const std::uint64_t n3 = tied_pairs(xy.begin(), xy.end(), [](const auto& a, const auto& b) { return a == b; });

    std::vector<double> ys(n);
    std::transform(xy.begin(), xy.end(), ys.begin(), [](const auto& p) { return p.second; });
    const std::uint64_t swaps = count_inversions(ys);
    const std::uint64_t n2 = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

    const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    if (denom == 0.0) {
        throw std::invalid_argument("kendall_tau: constant input");
    }
    const double s = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
                     static_cast<double>(n3) - 2.0 * static_cast<double>(swaps);
    return std::clamp(s / denom, -1.0, 1.0);
}

double gumbel_cdf(double z, double k, double theta) {
    if (!(theta >= 1.0)) {
        throw std::invalid_argument("gumbel_cdf: theta must be >= 1");
    }
    if (!(z >= 0.0 && z <= 1.0 && k >= 0.0 && k <= 1.0)) {
        throw std::invalid_argument("gumbel_cdf: arguments must lie in [0, 1]");
    }
    if (z == 0.0 || k == 0.0) {
        return 0.0;
    }
    if (z == 1.0) {
        return k;
    }
    if (k == 1.0) {
        return z;
    }
    const double a = std::pow(-std::log(z), theta);
    const double b = std::pow(-std::log(k), theta);
    return std::exp(-std::pow(a + b, 1.0 / theta));
}

double gumbel_theta_from_tau(double tau) {
    if (!(tau < 1.0)) {
        throw NumericalError("Gumbel theta is unbounded for Kendall tau = 1");
    }
    return tau > 0.0 ? 1.0 / (1.0 - tau) : 1.0;
}

double fit_gumbel_theta(std::span<const double> x, std::span<const double> y) {
    return gumbel_theta_from_tau(kendall_tau(x, y));
}

std::pair<double, double> sample_gumbel_pair(double theta, Engine& engine) {
    if (!(theta >= 1.0)) {
        throw std::invalid_argument("sample_gumbel_pair: theta must be >= 1");
    }
    if (theta == 1.0) {
        const double u = uniform01(engine);
        const double v = uniform01(engine);
        return {u, v};
    }
    const double alpha = 1.0 / theta;
    const double angle = std::numbers::pi * uniform01(engine);
    const double w = exponential(engine, 1.0);
    const double frailty = std::sin(alpha * angle) / std::pow(std::sin(angle), 1.0 / alpha) *
                           std::pow(std::sin((1.0 - alpha) * angle) / w, (1.0 - alpha) / alpha);
    const double e1 = exponential(engine, 1.0);
    const double e2 = exponential(engine, 1.0);
    return {std::exp(-std::pow(e1 / frailty, alpha)), std::exp(-std::pow(e2 / frailty, alpha))};
}

double cvm_independence_statistic(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, 2, "cvm_independence_statistic");
    const auto u = pseudo_observations(x);
    const auto v = pseudo_observations(y);
    const std::size_t n = u.size();
    double stat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t below = 0;
        for (std::size_t j = 0; j < n; ++j) {
            below += (u[j] <= u[i] && v[j] <= v[i]) ? 1 : 0;
        }
        const double d = static_cast<double>(below) / static_cast<double>(n) - u[i] * v[i];
        stat += d * d;
    }
    return stat;
}

IndependenceTest copula_independence_test(std::span<const double> x, std::span<const double> y,
                                          int n_bootstrap, std::uint64_t seed) {
    check_pair(x, y, 20, "copula_independence_test");
    if (n_bootstrap < 200) {
        throw std::invalid_argument("copula_independence_test: need at least 200 bootstrap replicates");
    }
    IndependenceTest out;
    out.n_bootstrap = n_bootstrap;
    out.cvm_statistic = cvm_independence_statistic(x, y);

    std::vector<double> shuffled(y.begin(), y.end());
    int exceed = 0;
    for (int b = 0; b < n_bootstrap; ++b) {
        std::copy(y.begin(), y.end(), shuffled.begin());
        SplitMix64 gen(derive_seed(seed, static_cast<std::uint64_t>(b)));
        // Fisher-Yates with an explicit index draw (portable across standard libraries)
        for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(uniform01(gen) * static_cast<double>(i + 1));
            std::swap(shuffled[i], shuffled[std::min(j, i)]);
        }
        if (cvm_independence_statistic(x, shuffled) >= out.cvm_statistic) {
            ++exceed;
        }
    }
    out.p_value = (1.0 + exceed) / (1.0 + n_bootstrap);
    return out;
}

ConditionalSeverity conditional_severity_scores(std::span<const double> counts,
                                                std::span<const double> totals, double claim_rate) {
    if (counts.size() != totals.size()) {
        throw std::invalid_argument("conditional_severity_scores: length mismatch");
    }
    if (!(claim_rate > 0.0)) {
        throw std::invalid_argument("conditional_severity_scores: claim rate must be positive");
    }
    ConditionalSeverity out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] <= 0.0) {
            continue;
        }
        out.counts.push_back(counts[i]);
        out.scores.push_back(boost::math::gamma_p(counts[i], claim_rate * totals[i]));
    }
    return out;
}

DependenceReport measure_dependence(std::span<const double> counts, std::span<const double> totals,
                                    double claim_rate, int n_bootstrap, std::uint64_t seed) {
    DependenceReport report;
    const auto corr = pearson_correlation(counts, totals);
    report.pearson_r = corr.r;
    report.pearson_p = corr.p_value;

    const auto cond = conditional_severity_scores(counts, totals, claim_rate);
    report.kendall_tau = kendall_tau(cond.counts, cond.scores);
    report.gumbel_theta = gumbel_theta_from_tau(report.kendall_tau);
    if (report.kendall_tau <= 0.0) {
        report.warnings.push_back(fmt::format(
            "Kendall tau {:.4f} <= 0: Gumbel cannot represent negative dependence, theta clamped to 1",
            report.kendall_tau));
    }
    const auto test = copula_independence_test(cond.counts, cond.scores, n_bootstrap, seed);
    report.cvm_statistic = test.cvm_statistic;
    report.independence_p = test.p_value;
    return report;
}

} // namespace ruinlab
