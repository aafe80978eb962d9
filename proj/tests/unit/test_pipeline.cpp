#include "ruinlab/errors.hpp"
#include "ruinlab/pipeline.hpp"
#include "ruinlab/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

using namespace ruinlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

PipelineConfig quick_config() {
    PipelineConfig c;
    c.grid = {0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75};
    c.grid_unit = GridUnit::MeanLoss;
    c.n_paths = 2000;
    c.bootstrap = 200;
    c.workers = 1;
    return c;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("ruinlab_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<SegmentTruth> independent_truths() {
    auto truths = paper_shaped_truths();
    for (auto& t : truths) t.copula_theta = 1.0;
    return truths;
}

} // namespace

TEST(Config, RoundTrip) {
    PipelineConfig c;
    EXPECT_EQ(parse_config(serialize(c)), c);

    c.input = "data/claims.csv";
    c.products = {Segment::FireAllied, Segment::Motor};
    c.loading = LoadingMode{false, 0.125};
    c.grid = {0, 0.1, 1.0 / 3.0, 1e6};
    c.grid_unit = GridUnit::MeanLoss;
    c.n_paths = 12345;
    c.horizon = 7;
    c.seed = 18446744073709551615ULL;
    c.bootstrap = 250;
    c.out = "out dir";
    c.monitoring = Monitoring::Continuous;
    c.dependence_alpha = 0.05;
    c.workers = 3;
    const auto text = serialize(c);
    EXPECT_EQ(parse_config(text), c);
    EXPECT_EQ(serialize(parse_config(text)), text);
}

TEST(Config, ParsesCommentsAndRejectsUnknownKeys) {
    const auto c = parse_config("# comment\n\n seed = 7 \r\ngrid=0, 5,10 # trailing\nloading=fixed:0.2\n");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.grid, (std::vector<double>{0, 5, 10}));
    EXPECT_FALSE(c.loading.implied);
    EXPECT_DOUBLE_EQ(c.loading.fixed, 0.2);
    EXPECT_THROW(parse_config("colour=blue\n"), InputError);
    EXPECT_THROW(parse_config("seed\n"), InputError);
    EXPECT_THROW(parse_config("n_paths=many\n"), InputError);
    EXPECT_THROW(parse_config("loading=fixed:-1\n"), InputError);
    EXPECT_THROW(parse_config("products=Motor,Cars\n"), InputError);
    EXPECT_THROW(load_config("/nonexistent/ruinlab.cfg"), InputError);
}

TEST(Config, Validation) {
    auto c = quick_config();
    EXPECT_NO_THROW(validate(c));
    auto bad = c;
    bad.grid = {0, 2, 1};
    EXPECT_THROW(validate(bad), InputError);
    bad = c;
    bad.grid = {-1, 2};
    EXPECT_THROW(validate(bad), InputError);
    bad = c;
    bad.n_paths = 999;
    EXPECT_THROW(validate(bad), InputError);
    bad = c;
    bad.products = {Segment::Motor, Segment::Motor};
    EXPECT_THROW(validate(bad), InputError);
    bad = c;
    bad.dependence_alpha = 1.5;
    EXPECT_THROW(validate(bad), InputError);
}

TEST(Synthetic, DeterministicAndShaped) {
    const auto truths = paper_shaped_truths();
    const auto a = generate_dataset(truths, 60, 3);
    const auto b = generate_dataset(truths, 60, 3);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 180u);
    for (const auto& r : a) EXPECT_NO_THROW(validate(r));
}

TEST(Pipeline, RecoversGeneratingParameters) {
    // Claim frequency is recovered under the coupled generator; the per-claim
    // rate is checked on uncoupled data, where it is the exponential MLE.
    for (const auto& [truths, check_rate] :
         {std::pair{paper_shaped_truths(), false}, std::pair{independent_truths(), true}}) {
        const auto records = generate_dataset(truths, 120, 2013);
        auto config = quick_config();
        config.products = {Segment::Motor, Segment::Householders, Segment::FireAllied};
        const auto report = analyze(config, records);
        ASSERT_EQ(report.segments.size(), 3u);
        for (std::size_t i = 0; i < truths.size(); ++i) {
            const auto& s = report.segments[i];
            EXPECT_LT(std::fabs(s.frequency.lambda_hat - truths[i].lambda), 3.0 * s.frequency.std_error)
                << to_string(s.segment);
            if (check_rate) {
                EXPECT_LT(std::fabs(s.claim_severity.rate_hat - truths[i].claim_rate),
                          3.0 * s.claim_severity.std_error)
                    << to_string(s.segment);
            } else {
                EXPECT_GT(s.dependence.gumbel_theta, 1.0);
            }
        }
    }
}

TEST(Pipeline, ReportShapeAndDeterminism) {
    const auto records = generate_dataset(paper_shaped_truths(), 60, 11);
    auto config = quick_config();
    const auto a = analyze(config, records);
    const auto b = analyze(config, records);
    EXPECT_EQ(report_json(a), report_json(b));

    ASSERT_EQ(a.segments.size(), 4u);
    for (const auto& s : a.segments) {
        EXPECT_EQ(s.independent.size(), config.grid.size());
        EXPECT_EQ(s.dependent.size(), config.grid.size());
        EXPECT_EQ(s.grid.size(), config.grid.size());
        EXPECT_TRUE(s.dependent_vs_independent);
        EXPECT_EQ(s.months, 60u);
    }
    ASSERT_TRUE(a.friedman);
    EXPECT_EQ(a.friedman->ranks.size(), 3u);
    ASSERT_EQ(a.pairwise.size(), 3u);
    EXPECT_EQ(a.pairwise[0].first, Segment::Householders);
    EXPECT_EQ(a.pairwise[0].second, Segment::Motor);

    config.workers = 4;
    const auto c = analyze(config, records);
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        for (std::size_t g = 0; g < config.grid.size(); ++g) {
            EXPECT_EQ(c.segments[i].dependent[g].psi_hat, a.segments[i].dependent[g].psi_hat);
            EXPECT_EQ(c.segments[i].independent[g].psi_hat, a.segments[i].independent[g].psi_hat);
        }
    }
}

TEST(Pipeline, CurrencyGridIsUsedAsGiven) {
    const auto records = generate_dataset(paper_shaped_truths(), 60, 11);
    auto config = quick_config();
    config.grid = {0, 500, 1000, 1500, 2000};
    config.grid_unit = GridUnit::Currency;
    config.products = {Segment::Householders};
    const auto report = analyze(config, records);
    EXPECT_EQ(report.segments[0].grid, config.grid);
    EXPECT_FALSE(report.friedman);
    EXPECT_TRUE(report.pairwise.empty());
}

TEST(Pipeline, EmittedFilesAreByteIdentical) {
    const auto data = scratch("pipeline_data.csv");
    write_claims_csv(data, generate_dataset(paper_shaped_truths(), 60, 5));
    auto config = quick_config();
    config.input = data;
    config.out = scratch("emit");
    run_pipeline(config);
    std::vector<std::string> names, first;
    for (const auto& entry : fs::directory_iterator(config.out)) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& name : names) first.push_back(slurp(config.out / name));
    run_pipeline(config);

    const std::vector<std::string> expected{"dependence.csv",
                                            "figure_fireallied.csv",
                                            "figure_householders.csv",
                                            "figure_motor.csv",
                                            "figure_overall.csv",
                                            "fits.csv",
                                            "report.json",
                                            "ruin_curves.csv",
                                            "summary.csv",
                                            "tests.csv"};
    EXPECT_EQ(names, expected);
    for (std::size_t i = 0; i < names.size(); ++i) {
        EXPECT_EQ(first[i], slurp(config.out / names[i])) << names[i];
    }

    const auto curves = lines_of(slurp(config.out / "ruin_curves.csv"));
    EXPECT_EQ(curves.front(), "product,assumption,u0,psi_hat,std_error");
    EXPECT_EQ(curves.size(), 1 + 4 * 2 * config.grid.size());

    for (const char* f : {"figure_motor.csv", "figure_overall.csv"}) {
        const auto rows = lines_of(slurp(config.out / f));
        EXPECT_EQ(rows.front(), "u0,psi_dependent,psi_independent");
        EXPECT_EQ(rows.size(), 1 + config.grid.size());
    }

    const auto tests = lines_of(slurp(config.out / "tests.csv"));
    EXPECT_EQ(tests.front(), "test,comparison,statistic,z_value,dof,p_value,n_effective");
    const auto friedman_row = std::find_if(tests.begin(), tests.end(), [](const auto& l) { return l.rfind("friedman,", 0) == 0; });
    ASSERT_NE(friedman_row, tests.end());
    EXPECT_NE(friedman_row->find(",2,"), std::string::npos);
}

TEST(Pipeline, NullDependenceGivesNoCurveDifference) {
    // Uncoupled data with the independence gate: the dependent curve only
    // departs from the independent one when the copula test rejects.
    int not_rejected = 0;
    for (int seed = 0; seed < 100; ++seed) {
        auto truths = independent_truths();
        truths.resize(1);
        const auto records = generate_dataset(truths, 60, 9000 + seed);
        auto config = quick_config();
        config.products = {Segment::Motor};
        config.n_paths = 1000;
        config.dependence_alpha = 0.05;
        config.seed = 100 + seed;
        const auto report = analyze(config, records);
        not_rejected += report.segments[0].dependent_vs_independent->p_value > 0.05;
    }
    EXPECT_GE(not_rejected, 90);
}

TEST(Pipeline, StageTaggedErrors) {
    auto config = quick_config();
    auto records = generate_dataset(paper_shaped_truths(), 10, 1);
    try {
        analyze(config, records);
        FAIL();
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.stage(), "ingest");
        EXPECT_EQ(e.kind(), ErrorKind::Input);
    }

    std::vector<MonthlyRecord> no_claims;
    for (int m = 0; m < 30; ++m) no_claims.push_back({m, Product::Motor, 100.0, 0.0, 0});
    config.products = {Segment::Motor};
    try {
        analyze(config, no_claims);
        FAIL();
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.stage(), "fit");
        EXPECT_EQ(e.kind(), ErrorKind::Numerical);
    }

    config.n_paths = 10;
    try {
        analyze(config, no_claims);
        FAIL();
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.stage(), "config");
        EXPECT_EQ(e.kind(), ErrorKind::Input);
    }

    config = quick_config();
    config.input = "/nonexistent/claims.csv";
    try {
        run_pipeline(config);
        FAIL();
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.stage(), "ingest");
        EXPECT_EQ(e.kind(), ErrorKind::Input);
    }
}

TEST(Pipeline, ImpliedLoadingFloor) {
    std::vector<MonthlyRecord> records;
    for (int m = 0; m < 40; ++m) {
        records.push_back({m, Product::Motor, 50.0, 100.0 + m, 3 + m % 4});
    }
    auto config = quick_config();
    config.products = {Segment::Motor};
    const auto report = analyze(config, records);
    EXPECT_DOUBLE_EQ(report.segments[0].model.loading, 0.01);
    EXPECT_FALSE(report.segments[0].warnings.empty());

    config.loading = LoadingMode{false, 0.3};
    EXPECT_DOUBLE_EQ(analyze(config, records).segments[0].model.loading, 0.3);
}
