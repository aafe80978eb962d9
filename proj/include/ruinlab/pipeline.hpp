#pragma once

#include "ruinlab/claims_ingest.hpp"
#include "ruinlab/dependence.hpp"
#include "ruinlab/dist_fit.hpp"
#include "ruinlab/nonparam_tests.hpp"
#include "ruinlab/risk_process.hpp"
#include "ruinlab/ruin_engine.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ruinlab {

struct LoadingMode {
    bool implied = true;  // mean(premium) / mean(claims_paid) - 1, floored at 0.01
    double fixed = 0.1;

    friend bool operator==(const LoadingMode&, const LoadingMode&) = default;
};

// Unit of the surplus grid: currency, or multiples of the segment's expected
// monthly loss lambda / beta.
enum class GridUnit { Currency, MeanLoss };

struct PipelineConfig {
    std::filesystem::path input;
    std::vector<Segment> products{Segment::Motor, Segment::Householders, Segment::FireAllied, Segment::Overall};
    LoadingMode loading;
    std::vector<double> grid{0, 500, 1000, 1500, 2000, 2500, 3000, 3500};
    GridUnit grid_unit = GridUnit::Currency;
    std::size_t n_paths = 10'000;
    int horizon = 60;
    std::uint64_t seed = 20130101;
    int bootstrap = 1000;
    std::filesystem::path out = "report";
    Monitoring monitoring = Monitoring::PeriodEnd;
    // When set, the fitted copula drives the dependent simulation only if the
    // independence test rejects at this level; otherwise theta = 1.
    std::optional<double> dependence_alpha;
    unsigned workers = 0;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Throws InputError.
void validate(const PipelineConfig& config);

// Flat `key=value` text, one key per line; '#' starts a comment.
std::string serialize(const PipelineConfig& config);
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

// Single-key setters shared by the config parser and the CLI flags.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);
LoadingMode parse_loading(std::string_view text);
std::vector<double> parse_grid(std::string_view text);

struct SegmentReport {
    Segment segment = Segment::Overall;
    std::size_t months = 0;
    SummaryStats premium;
    SummaryStats claims_paid;
    SummaryStats claim_count;
    FrequencyFit frequency;
    std::optional<GofResult> frequency_gof;
    SeverityFit monthly_severity;  // exponential on monthly claims paid
    std::optional<GofResult> severity_gof;
    SeverityFit claim_severity;  // per-claim rate used by the surplus model
    DependenceReport dependence;
    RiskModel model;  // as simulated (dependent curve uses model.copula_theta)
    std::vector<double> grid;  // initial surplus in currency
    std::vector<RuinEstimate> independent;
    std::vector<RuinEstimate> dependent;
    std::optional<TestResult> dependent_vs_independent;
    std::vector<std::string> warnings;
};

struct PairwiseComparison {
    Segment first = Segment::Motor;   // x in x - y
    Segment second = Segment::Motor;  // y
    TestResult result;
};

struct AnalysisReport {
    PipelineConfig config;
    std::vector<SegmentReport> segments;
    std::optional<TestResult> friedman;  // dependent curves across products
    std::vector<PairwiseComparison> pairwise;
    std::vector<std::string> warnings;
};

enum class ErrorKind { Input, Numerical };

class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, ErrorKind kind, const std::string& message);

    const std::string& stage() const noexcept { return stage_; }
    ErrorKind kind() const noexcept { return kind_; }

private:
    std::string stage_;
    ErrorKind kind_;
};

// All stages on in-memory records; deterministic for a fixed config.
AnalysisReport analyze(const PipelineConfig& config, std::span<const MonthlyRecord> records);

// Loads config.input, analyzes, and writes the tables to config.out.
AnalysisReport run_pipeline(const PipelineConfig& config);

// summary.csv, fits.csv, dependence.csv, ruin_curves.csv, tests.csv,
// figure_<segment>.csv and report.json.
void emit_tables(const AnalysisReport& report, const std::filesystem::path& dir);

std::string report_json(const AnalysisReport& report);

} // namespace ruinlab
