#include "ruinlab/synthetic.hpp"

#include "ruinlab/risk_process.hpp"
#include "ruinlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ruinlab {

std::vector<SegmentTruth> paper_shaped_truths() {
    return {
        {Product::Motor, 17.33, 17.33 / 529456.00, 2.0, 0.15, 0.10},
        {Product::Householders, 8.80, 8.80 / 28671.19, 2.5, 0.15, 0.10},
        {Product::FireAllied, 4.20, 4.20 / 242873.78, 3.0, 0.15, 0.10},
    };
}

std::vector<MonthlyRecord> generate_dataset(std::span<const SegmentTruth> truths, int months,
                                            std::uint64_t seed) {
    if (months < 1) {
        throw std::invalid_argument("generate_dataset: months must be >= 1");
    }
    std::vector<MonthlyRecord> records;
    records.reserve(truths.size() * static_cast<std::size_t>(months));
    for (std::size_t t = 0; t < truths.size(); ++t) {
        const auto& truth = truths[t];
        RiskModel model;
        model.lambda = truth.lambda;
        model.beta = truth.claim_rate;
        model.loading = truth.loading;
        model.copula_theta = truth.copula_theta;
        validate(model);
        const PeriodSampler sampler(model, Assumption::Dependent);
        auto engine = make_engine(derive_seed(seed, static_cast<std::uint64_t>(truth.product)));
        const double sigma = std::sqrt(std::log1p(truth.premium_cv * truth.premium_cv));
        std::vector<double> claims;
        for (int m = 0; m < months; ++m) {
            const PeriodLoss loss = sampler.draw(engine, claims);
            // Box-Muller keeps the draw sequence independent of the standard library
            const double r = std::sqrt(-2.0 * std::log(uniform01(engine)));
            const double z = r * std::cos(2.0 * std::numbers::pi * uniform01(engine));
            const double premium = premium_per_period(model) * std::exp(sigma * z - 0.5 * sigma * sigma);

            MonthlyRecord rec;
            rec.period = m;
            rec.product = truth.product;
            rec.premium = std::round(premium * 100.0) / 100.0;
            rec.claim_count = loss.count;
            rec.claims_paid = loss.count == 0 ? 0.0 : std::max(0.01, std::round(loss.total * 100.0) / 100.0);
            records.push_back(rec);
        }
    }
    return records;
}

} // namespace ruinlab
