#include "ruinlab/risk_process.hpp"

#include "ruinlab/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

namespace ruinlab {

namespace {

// Largest double below 1; keeps quantile functions finite.
constexpr double kBelowOne = 1.0 - 0x1.0p-53;

// Lowest surplus reached inside a period that starts at `start`, with the
// claims arriving at uniform order-statistic times and premium accruing at
// rate c. Arrival times come from `gen` after any claim split.
double within_period_minimum(double start, double c, const std::vector<double>& claims, SplitMix64& gen) {
    const std::size_t n = claims.size();
    // sorted uniforms via normalised exponential spacings
    std::vector<double> cumulative(n + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        acc += exponential(gen, 1.0);
        cumulative[k] = acc;
    }
    double lowest = std::numeric_limits<double>::infinity();
    double paid = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        paid += claims[k];
        lowest = std::min(lowest, start + c * (cumulative[k] / acc) - paid);
    }
    return lowest;
}

} // namespace

std::string_view to_string(Assumption a) noexcept {
    return a == Assumption::Independent ? "independent" : "dependent";
}

std::string_view to_string(Monitoring m) noexcept {
    return m == Monitoring::PeriodEnd ? "period_end" : "continuous";
}

void validate(const RiskModel& m) {
    if (!(m.lambda >= 0.0) || !std::isfinite(m.lambda)) {
        throw std::invalid_argument("risk model: lambda must be >= 0");
    }
    if (!(m.beta > 0.0) || !std::isfinite(m.beta)) {
        throw std::invalid_argument("risk model: beta must be > 0");
    }
    if (!(m.loading > 0.0)) {
        throw std::invalid_argument("risk model: loading must be > 0 (net profit condition)");
    }
    if (!(m.copula_theta >= 1.0) || !std::isfinite(m.copula_theta)) {
        throw std::invalid_argument("risk model: copula theta must be >= 1");
    }
    if (m.horizon < 1) {
        throw std::invalid_argument("risk model: horizon must be >= 1");
    }
}

double premium_per_period(const RiskModel& m) noexcept {
    return (1.0 + m.loading) * m.lambda / m.beta;
}

double expected_period_loss(const RiskModel& m) noexcept {
    return m.lambda / m.beta;
}

PoissonInverter::PoissonInverter(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("Poisson rate must be finite and >= 0");
    }
    if (lambda > 700.0) {
        return;  // exp(-lambda) underflows; quantiles come from the distribution object
    }
    double pmf = std::exp(-lambda);
    double cdf = pmf;
    cdf_.push_back(cdf);
    // extend past the mode until the remaining tail is below double resolution
    for (long n = 1;; ++n) {
        pmf *= lambda / static_cast<double>(n);
        cdf += pmf;
        cdf_.push_back(cdf);
        if (static_cast<double>(n) > lambda && (cdf >= kBelowOne || pmf < 1e-18 * cdf)) {
            break;
        }
    }
}

long PoissonInverter::operator()(double u) const {
    if (cdf_.empty()) {
        const boost::math::poisson_distribution<> dist(lambda_);
        const double p = std::clamp(u, 0x1.0p-60, kBelowOne);
        auto n = static_cast<long>(boost::math::quantile(dist, p));
        // settle on the right-continuous inverse
        while (n > 0 && boost::math::cdf(dist, static_cast<double>(n - 1)) >= u) --n;
        while (boost::math::cdf(dist, static_cast<double>(n)) < u) ++n;
        return n;
    }
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) {
        return static_cast<long>(cdf_.size()) - 1;
    }
    return static_cast<long>(it - cdf_.begin());
}

long poisson_quantile(double u, double lambda) {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw std::invalid_argument("poisson_quantile: u must lie in [0, 1]");
    }
    return PoissonInverter(lambda)(u);
}

PathStream PathStream::for_path(std::uint64_t master_seed, std::uint64_t path_index) {
    const std::uint64_t path_seed = derive_seed(master_seed, path_index);
    return PathStream{make_engine(path_seed), derive_seed(path_seed, 0x5eedULL)};
}

SplitMix64 PathStream::period_stream(int period) const noexcept {
    return SplitMix64(derive_seed(period_seed, static_cast<std::uint64_t>(period)));
}

PeriodSampler::PeriodSampler(const RiskModel& model, Assumption assumption)
    : model_(model), inverter_(model.lambda),
      copula_(assumption == Assumption::Dependent && model.copula_theta > 1.0) {
    if (!(model.beta > 0.0)) {
        throw std::invalid_argument("PeriodSampler: beta must be > 0");
    }
    if (!(model.copula_theta >= 1.0)) {
        throw std::invalid_argument("PeriodSampler: copula theta must be >= 1");
    }
}

PeriodLoss PeriodSampler::from_uniforms(double u, double v) const {
    PeriodLoss loss;
    loss.count = inverter_(u);
    if (loss.count > 0) {
        const double level = boost::math::gamma_p_inv(static_cast<double>(loss.count),
                                                       std::clamp(v, 0.0, kBelowOne));
        loss.total = level / model_.beta;
    }
    return loss;
}

PeriodLoss PeriodSampler::draw(Engine& engine, std::vector<double>& claims) const {
    claims.clear();
    if (copula_) {
        const auto [u, v] = sample_gumbel_pair(model_.copula_theta, engine);
        return from_uniforms(u, v);
    }
    PeriodLoss loss;
    loss.count = inverter_(uniform01(engine));
    for (long k = 0; k < loss.count; ++k) {
        const double z = exponential(engine, model_.beta);
        claims.push_back(z);
        loss.total += z;
    }
    return loss;
}

void split_total(double total, long count, SplitMix64& gen, std::vector<double>& claims) {
    claims.clear();
    if (count <= 0) {
        return;
    }
    double acc = 0.0;
    for (long k = 0; k < count; ++k) {
        claims.push_back(exponential(gen, 1.0));
        acc += claims.back();
    }
    for (auto& z : claims) {
        z = total * (z / acc);
    }
}

double aggregate_claims_independent(const RiskModel& model, Engine& engine) {
    std::vector<double> claims;
    return PeriodSampler(model, Assumption::Independent).draw(engine, claims).total;
}

double aggregate_claims_dependent(const RiskModel& model, Engine& engine) {
    std::vector<double> claims;
    return PeriodSampler(model, Assumption::Dependent).draw(engine, claims).total;
}

PeriodLoss aggregate_claims_copula(const RiskModel& model, double u, double v) {
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("aggregate_claims_copula: (u, v) must lie in [0, 1]^2");
    }
    RiskModel coupled = model;
    coupled.copula_theta = std::max(coupled.copula_theta, std::nextafter(1.0, 2.0));
    return PeriodSampler(coupled, Assumption::Dependent).from_uniforms(u, v);
}

namespace {

// Claims of one period in arrival order, drawing any split from `gen`.
const std::vector<double>& period_claims(const PeriodSampler& sampler, const PeriodLoss& loss,
                                         std::vector<double>& claims, SplitMix64& gen) {
    if (sampler.uses_copula()) {
        split_total(loss.total, loss.count, gen, claims);
    }
    return claims;
}

} // namespace

SurplusPath simulate_surplus_path(const RiskModel& model, double u0, Assumption assumption,
                                  PathStream& stream) {
    validate(model);
    if (!(u0 >= 0.0)) {
        throw std::invalid_argument("simulate_surplus_path: u0 must be >= 0");
    }
    const PeriodSampler sampler(model, assumption);
    const double c = premium_per_period(model);

    SurplusPath path;
    path.u0 = u0;
    path.values.reserve(static_cast<std::size_t>(model.horizon) + 1);
    path.values.push_back(u0);
    std::vector<double> claims;
    double surplus = u0;
    for (int n = 1; n <= model.horizon; ++n) {
        const PeriodLoss loss = sampler.draw(stream.engine, claims);
        bool ruined = false;
        if (model.monitoring == Monitoring::Continuous && loss.count > 0 && surplus - loss.total < 0.0) {
            auto gen = stream.period_stream(n);
            const auto& ordered = period_claims(sampler, loss, claims, gen);
            ruined = within_period_minimum(surplus, c, ordered, gen) < 0.0;
        }
        surplus = surplus + c - loss.total;
        path.values.push_back(surplus);
        if (ruined || surplus < 0.0) {
            path.ruin_time = n;
            break;
        }
    }
    return path;
}

double simulate_running_minimum(const RiskModel& model, const PeriodSampler& sampler, PathStream& stream,
                                double stop_below) {
    const double c = premium_per_period(model);
    std::vector<double> claims;
    double level = 0.0;
    double lowest = 0.0;
    for (int n = 1; n <= model.horizon; ++n) {
        const PeriodLoss loss = sampler.draw(stream.engine, claims);
        if (model.monitoring == Monitoring::Continuous && loss.count > 0 && level - loss.total < lowest) {
            auto gen = stream.period_stream(n);
            const auto& ordered = period_claims(sampler, loss, claims, gen);
            lowest = std::min(lowest, within_period_minimum(level, c, ordered, gen));
        }
        level = level + c - loss.total;
        lowest = std::min(lowest, level);
        if (lowest < stop_below) {
            break;
        }
    }
    return lowest;
}

} // namespace ruinlab
