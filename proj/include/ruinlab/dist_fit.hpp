#pragma once

#include <span>
#include <vector>

namespace ruinlab {

// Poisson claim-frequency fit. lambda_hat is the sample mean (the MLE).
struct FrequencyFit {
    double lambda_hat = 0.0;
    double std_error = 0.0;  // sqrt(lambda_hat / n)
    std::size_t n = 0;
};

// Exponential fit. rate_hat = 1 / sample mean (the MLE).
struct SeverityFit {
    double rate_hat = 0.0;
    double std_error = 0.0;  // rate_hat / sqrt(n)
    std::size_t n = 0;
};

struct GofResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    std::size_t bins = 0;
};

FrequencyFit fit_poisson(std::span<const double> counts);
SeverityFit fit_exponential(std::span<const double> amounts);

// Per-claim exponential severity from monthly aggregates: with N_t claims
// totalling S_t in month t, the likelihood of the individual claims is
// maximised at sum(N) / sum(S); n is the total number of claims.
SeverityFit fit_claim_severity(std::span<const double> counts, std::span<const double> totals);

// Upper tail of chi-square(dof) at `statistic`, i.e. Q(dof/2, statistic/2).
double chi_square_upper_tail(double statistic, int dof);

// Pearson chi-square test of a fitted Poisson. Adjacent values are pooled
// until each bin expects at least `min_expected` observations; the last bin
// is the open upper tail. dof = bins - 2 (one estimated parameter).
GofResult gof_poisson(std::span<const double> counts, const FrequencyFit& fit,
                      double min_expected = 5.0);

// Chi-square test of a fitted exponential on equiprobable bins. The bin
// count is reduced when needed so each bin expects at least five values.
GofResult gof_exponential(std::span<const double> amounts, const SeverityFit& fit, int bins = 10);

} // namespace ruinlab
