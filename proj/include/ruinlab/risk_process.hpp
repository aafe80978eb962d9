#pragma once

#include "ruinlab/rng.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace ruinlab {

enum class Assumption { Independent, Dependent };

std::string_view to_string(Assumption a) noexcept;

// When ruin is checked. PeriodEnd inspects the surplus after each period's
// premium and claims settle. Continuous spreads the period's claims over
// uniform arrival times with the premium accruing linearly, and checks the
// surplus right after every claim (the classical compound Poisson model
// observed on unit periods).
enum class Monitoring { PeriodEnd, Continuous };

std::string_view to_string(Monitoring m) noexcept;

// Discrete-time surplus process: per period, Poisson(lambda) claims with
// exponential(beta) sizes; premium c = (1 + loading) * lambda / beta.
struct RiskModel {
    double lambda = 0.0;        // expected claims per period
    double beta = 1.0;          // claim-size rate, 1 / mean claim
    double loading = 0.1;       // premium loading
    double copula_theta = 1.0;  // Gumbel coupling of count and claim-size level
    int horizon = 60;           // periods
    Monitoring monitoring = Monitoring::PeriodEnd;
};

// Throws std::invalid_argument: lambda >= 0, beta > 0, loading > 0,
// copula_theta >= 1, horizon >= 1.
void validate(const RiskModel& model);

double premium_per_period(const RiskModel& model) noexcept;
double expected_period_loss(const RiskModel& model) noexcept;

// Smallest n with P(N <= n) >= u for N ~ Poisson(lambda).
long poisson_quantile(double u, double lambda);

class PoissonInverter {
public:
    explicit PoissonInverter(double lambda);
    long operator()(double u) const;

private:
    double lambda_;
    std::vector<double> cdf_;
};

struct PeriodLoss {
    long count = 0;
    double total = 0.0;
};

// Random state for one simulated path: a main engine for counts and amounts
// plus addressable per-period substreams for within-period detail (arrival
// times, claim splits), so the main stream is consumed identically whatever
// the monitoring needs.
struct PathStream {
    Engine engine;
    std::uint64_t period_seed = 0;

    static PathStream for_path(std::uint64_t master_seed, std::uint64_t path_index);
    SplitMix64 period_stream(int period) const noexcept;
};

// Per-period loss generator for one model and assumption.
//
// Independent: N = F_Poisson^{-1}(u) and N i.i.d. exponential(beta) claims.
// Dependent: (u, v) from the Gumbel copula, N = F_Poisson^{-1}(u) and
//   S = F_{Gamma(N, beta)}^{-1}(v), i.e. v sets the rank of the period's
//   claim-size level given N. Conditional on N the claims are an
//   exchangeable split of S (uniform spacings). For copula_theta = 1 the
//   law equals the independent case and the independent draw is used.
class PeriodSampler {
public:
    PeriodSampler(const RiskModel& model, Assumption assumption);

    // Fills `claims` with the individual claim sizes when they are produced
    // by the main stream (independent route); otherwise leaves it empty.
    PeriodLoss draw(Engine& engine, std::vector<double>& claims) const;

    // Loss for explicit copula coordinates (u, v).
    PeriodLoss from_uniforms(double u, double v) const;

    bool uses_copula() const noexcept { return copula_; }

private:
    RiskModel model_;
    PoissonInverter inverter_;
    bool copula_;
};

// Splits `total` into `count` exchangeable claims (uniform spacings).
void split_total(double total, long count, SplitMix64& gen, std::vector<double>& claims);

double aggregate_claims_independent(const RiskModel& model, Engine& engine);
double aggregate_claims_dependent(const RiskModel& model, Engine& engine);
PeriodLoss aggregate_claims_copula(const RiskModel& model, double u, double v);

struct SurplusPath {
    double u0 = 0.0;
    std::vector<double> values;  // values[0] = u0, values[n] = surplus at end of period n
    std::optional<int> ruin_time;  // first period with the surplus below zero
};

// Stops at the ruin period. Under continuous monitoring the ruin period can
// end with a non-negative surplus (the dip happened inside the period).
SurplusPath simulate_surplus_path(const RiskModel& model, double u0, Assumption assumption,
                                  PathStream& stream);

// Running minimum of the surplus process started at 0 (premiums minus
// claims). A path started at u0 is ruined iff u0 + minimum < 0, which makes
// the outcome for every u0 a function of one draw sequence. Simulation stops
// once the minimum drops below `stop_below`.
double simulate_running_minimum(const RiskModel& model, const PeriodSampler& sampler,
                                PathStream& stream, double stop_below);

} // namespace ruinlab
