#pragma once

#include "ruinlab/risk_process.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace ruinlab {

struct RuinEstimate {
    double u0 = 0.0;
    Assumption assumption = Assumption::Independent;
    double psi_hat = 0.0;
    double std_error = 0.0;  // sqrt(psi (1 - psi) / n_paths)
    std::size_t n_paths = 0;
    int horizon = 0;
};

// Wilson score interval for psi at normal quantile z.
std::pair<double, double> wilson_interval(const RuinEstimate& estimate, double z = 1.96);

struct McOptions {
    std::size_t n_paths = 10'000;
    std::uint64_t master_seed = 1;
    unsigned workers = 0;  // 0 = hardware concurrency
};

// Path i uses PathStream::for_path(master_seed, i), so the estimate does not
// depend on the number of workers.
RuinEstimate estimate_ruin_mc(const RiskModel& model, double u0, Assumption assumption,
                              const McOptions& options);

// One estimate per grid point from common random numbers: every path is
// simulated once and scored against every u0, so psi_hat is non-increasing
// along an ascending grid. Throws std::invalid_argument for an empty,
// unsorted or negative grid.
std::vector<RuinEstimate> ruin_curve(const RiskModel& model, std::span<const double> grid,
                                     Assumption assumption, const McOptions& options);

struct AdjustmentCoefficient {
    double R = 0.0;
    double residual = 0.0;  // |E[exp(-R (S - c))] - 1|
};

// Positive root of lambda (beta / (beta - r) - 1) = c r on (0, beta) by
// bisection. Throws NumericalError when there is no sign change (loading <= 0).
AdjustmentCoefficient adjustment_coefficient(const RiskModel& model);

// Closed form loading * beta / (1 + loading) for exponential claims.
double adjustment_coefficient_exponential(const RiskModel& model);

// psi(u) = exp(-R u) / (1 + loading): infinite-horizon ruin probability of
// the compound Poisson model with exponential claims.
double cramer_lundberg_psi(const RiskModel& model, double u0);

double lundberg_bound(const RiskModel& model, double u0);

// Markov-modulated interest on the surplus: state j earns rate i_j,
// transitions follow a row-stochastic matrix.
struct InterestModel {
    std::vector<double> rates;
    std::vector<std::vector<double>> transition;

    static InterestModel constant(double rate);
};

void validate(const InterestModel& interest);

// Distribution of the loss of one period: survival function and density.
struct LossDistribution {
    std::function<double(double)> survival;
    std::function<double(double)> density;
};

LossDistribution exponential_loss(double rate);

struct RecursionSettings {
    int n_periods = 1;
    double step = 0.0;  // quadrature/grid step; 0 picks premium / 10
};

// Finite-time ruin probability with stochastic interest:
//   psi_1(u, s)     = sum_j P_sj Vbar(w_j)
//   psi_{n+1}(u, s) = sum_j P_sj [ Vbar(w_j) + int_0^{w_j} psi_n(w_j - z, j) dV(z) ]
// with w_j = u (1 + i_j) + premium. psi_n is tabulated on a uniform grid
// (linear interpolation between nodes) and the integral uses the trapezoid
// rule. Throws std::invalid_argument when step > premium / 10.
double finite_time_ruin_recursive(double u0, const InterestModel& interest, std::size_t start_state,
                                  const LossDistribution& loss, double premium,
                                  const RecursionSettings& settings);

// psi_1(u0, s) .. psi_n(u0, s) from one tabulation.
std::vector<double> finite_time_ruin_sequence(double u0, const InterestModel& interest,
                                              std::size_t start_state, const LossDistribution& loss,
                                              double premium, const RecursionSettings& settings);

struct RefinedRuin {
    double psi = 0.0;
    double step = 0.0;
    double halving_change = 0.0;  // |psi(step) - psi(2 step)|, the error estimate
};

// Halves the step from premium / 10 until successive results differ by less
// than `tolerance`. Throws NumericalError after `max_halvings`.
RefinedRuin finite_time_ruin_refined(double u0, const InterestModel& interest, std::size_t start_state,
                                     const LossDistribution& loss, double premium, int n_periods,
                                     double tolerance = 1e-4, int max_halvings = 8);

} // namespace ruinlab
