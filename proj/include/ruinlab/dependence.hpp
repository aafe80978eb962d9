#pragma once

#include "ruinlab/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ruinlab {

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;  // two-sided, Student-t with n - 2 dof
};

Correlation pearson_correlation(std::span<const double> x, std::span<const double> y);

// Kendall's tau-b, O(n log n) (Knight's merge-sort count).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Gumbel copula C(z, k) = exp(-[(-ln z)^theta + (-ln k)^theta]^(1/theta)).
double gumbel_cdf(double z, double k, double theta);

// Kendall-tau inversion: theta = 1 / (1 - tau), clamped to 1 for tau <= 0.
// Throws NumericalError when tau >= 1.
double gumbel_theta_from_tau(double tau);
double fit_gumbel_theta(std::span<const double> x, std::span<const double> y);

// Marshall-Olkin frailty sampler: V positive stable with index 1/theta
// (Kanter's representation), U_i = exp(-(E_i / V)^(1/theta)).
std::pair<double, double> sample_gumbel_pair(double theta, Engine& engine);

struct IndependenceTest {
    double cvm_statistic = 0.0;
    double p_value = 1.0;
    int n_bootstrap = 0;
};

// Cramer-von Mises distance sum_i (C_n(U_i, V_i) - U_i V_i)^2 between the
// empirical copula of the pseudo-observations and the independence copula.
double cvm_independence_statistic(std::span<const double> x, std::span<const double> y);

// p-value from `n_bootstrap` random re-pairings of y against x; replicate b
// draws from substream derive_seed(seed, b).
IndependenceTest copula_independence_test(std::span<const double> x, std::span<const double> y,
                                          int n_bootstrap, std::uint64_t seed);

// Probability integral transform of each month's total claims given its
// claim count, under i.i.d. exponential claims with rate `claim_rate`:
// P(Gamma(N, claim_rate) <= S). Months without claims are skipped; the
// returned counts are the matching N values.
struct ConditionalSeverity {
    std::vector<double> counts;
    std::vector<double> scores;
};
ConditionalSeverity conditional_severity_scores(std::span<const double> counts,
                                                std::span<const double> totals, double claim_rate);

struct DependenceReport {
    double pearson_r = 0.0;  // claim count vs claims paid
    double pearson_p = 1.0;
    double kendall_tau = 0.0;  // claim count vs conditional severity score
    double gumbel_theta = 1.0;
    double cvm_statistic = 0.0;
    double independence_p = 1.0;
    std::vector<std::string> warnings;
};

DependenceReport measure_dependence(std::span<const double> counts, std::span<const double> totals,
                                    double claim_rate, int n_bootstrap, std::uint64_t seed);

} // namespace ruinlab
