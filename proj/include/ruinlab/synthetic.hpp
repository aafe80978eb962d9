#pragma once

#include "ruinlab/claims_ingest.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ruinlab {

// Generating parameters for one product's monthly series.
struct SegmentTruth {
    Product product = Product::Motor;
    double lambda = 1.0;        // claims per month
    double claim_rate = 1.0;    // 1 / mean claim size
    double copula_theta = 1.0;  // Gumbel coupling used by the dependent sampler
    double loading = 0.1;       // premium = (1 + loading) * expected monthly claims
    double premium_cv = 0.1;    // lognormal noise on the monthly premium
};

// Frequencies and monthly claim means of the three product lines in the
// published descriptive table, with moderate loadings and strong coupling
// (FireAllied strongest).
std::vector<SegmentTruth> paper_shaped_truths();

// Monthly records drawn from the dependent period sampler; amounts are
// rounded to cents. Deterministic for a fixed seed.
std::vector<MonthlyRecord> generate_dataset(std::span<const SegmentTruth> truths, int months,
                                            std::uint64_t seed);

} // namespace ruinlab
