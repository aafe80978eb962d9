#include "ruinlab/pipeline.hpp"

#include "ruinlab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ruinlab {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string_view::npos ? text.size() : comma;
        const auto item = trim(text.substr(start, end - start));
        if (!item.empty()) {
            parts.push_back(item);
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return parts;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw InputError(fmt::format("config '{}': cannot parse '{}'", key, text));
    }
    return value;
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += fmt::format("{}", values[i]);
    }
    return out;
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::vector<double> psi_values(const std::vector<RuinEstimate>& curve) {
    std::vector<double> out;
    out.reserve(curve.size());
    for (const auto& e : curve) out.push_back(e.psi_hat);
    return out;
}

// Signed-rank comparison that treats identical curves as "no difference"
// instead of an error.
TestResult compare_curves(std::span<const double> x, std::span<const double> y, std::vector<std::string>& warnings,
                          std::string_view what) {
    if (std::equal(x.begin(), x.end(), y.begin(), y.end())) {
        warnings.push_back(fmt::format("{}: curves identical, signed-rank test reported as p = 1", what));
        TestResult r;
        r.test = "wilcoxon_signed_rank";
        r.z_value = 0.0;
        r.ranks.resize(2);
        r.ranks[0].label = "negative";
        r.ranks[1].label = "positive";
        return r;
    }
    return wilcoxon_signed_rank(x, y);
}

template <class F>
auto run_stage(std::string_view stage, ErrorKind default_kind, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const PipelineError&) {
        throw;
    } catch (const InputError& e) {
        throw PipelineError(std::string(stage), ErrorKind::Input, e.what());
    } catch (const std::exception& e) {
        throw PipelineError(std::string(stage), default_kind, e.what());
    }
}

} // namespace

PipelineError::PipelineError(std::string stage, ErrorKind kind, const std::string& message)
    : std::runtime_error(fmt::format("[{}] {}", stage, message)), stage_(std::move(stage)), kind_(kind) {}

LoadingMode parse_loading(std::string_view text) {
    text = trim(text);
    if (text == "implied") {
        return LoadingMode{true, 0.1};
    }
    if (text.starts_with("fixed:")) {
        const double value = parse_number<double>("loading", text.substr(6));
        if (!(value > 0.0)) {
            throw InputError("config 'loading': fixed loading must be > 0");
        }
        return LoadingMode{false, value};
    }
    throw InputError(fmt::format("config 'loading': expected 'implied' or 'fixed:<x>', got '{}'", text));
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> grid;
    for (auto item : split_list(text)) {
        grid.push_back(parse_number<double>("grid", item));
    }
    return grid;
}

void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "input") {
        c.input = std::string(value);
    } else if (key == "products") {
        c.products.clear();
        for (auto item : split_list(value)) {
            try {
                c.products.push_back(parse_segment(item));
            } catch (const InputError& e) {
                throw InputError(fmt::format("config 'products': {}", e.what()));
            }
        }
    } else if (key == "loading") {
        c.loading = parse_loading(value);
    } else if (key == "grid") {
        c.grid = parse_grid(value);
    } else if (key == "grid_unit") {
        if (value == "currency") {
            c.grid_unit = GridUnit::Currency;
        } else if (value == "mean_loss") {
            c.grid_unit = GridUnit::MeanLoss;
        } else {
            throw InputError(fmt::format("config 'grid_unit': expected currency|mean_loss, got '{}'", value));
        }
    } else if (key == "n_paths") {
        c.n_paths = parse_number<std::size_t>(key, value);
    } else if (key == "horizon") {
        c.horizon = parse_number<int>(key, value);
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "bootstrap") {
        c.bootstrap = parse_number<int>(key, value);
    } else if (key == "out") {
        c.out = std::string(value);
    } else if (key == "monitoring") {
        if (value == "period_end") {
            c.monitoring = Monitoring::PeriodEnd;
        } else if (value == "continuous") {
            c.monitoring = Monitoring::Continuous;
        } else {
            throw InputError(fmt::format("config 'monitoring': expected period_end|continuous, got '{}'", value));
        }
    } else if (key == "dependence_alpha") {
        if (value == "none") {
            c.dependence_alpha.reset();
        } else {
            c.dependence_alpha = parse_number<double>(key, value);
        }
    } else if (key == "workers") {
        c.workers = parse_number<unsigned>(key, value);
    } else {
        throw InputError(fmt::format("config: unknown key '{}'", key));
    }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InputError(fmt::format("config line {}: expected key=value", line_no));
        }
        set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot open config file '{}'", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), std::move(base));
}

std::string serialize(const PipelineConfig& c) {
    std::string products;
    for (std::size_t i = 0; i < c.products.size(); ++i) {
        if (i > 0) products += ',';
        products += to_string(c.products[i]);
    }
    std::string out;
    out += fmt::format("input={}\n", c.input.string());
    out += fmt::format("products={}\n", products);
    out += fmt::format("loading={}\n", c.loading.implied ? std::string("implied") : fmt::format("fixed:{}", c.loading.fixed));
    out += fmt::format("grid={}\n", join_doubles(c.grid));
    out += fmt::format("grid_unit={}\n", c.grid_unit == GridUnit::Currency ? "currency" : "mean_loss");
    out += fmt::format("n_paths={}\n", c.n_paths);
    out += fmt::format("horizon={}\n", c.horizon);
    out += fmt::format("seed={}\n", c.seed);
    out += fmt::format("bootstrap={}\n", c.bootstrap);
    out += fmt::format("out={}\n", c.out.string());
    out += fmt::format("monitoring={}\n", to_string(c.monitoring));
    out += fmt::format("dependence_alpha={}\n", c.dependence_alpha ? fmt::format("{}", *c.dependence_alpha) : "none");
    out += fmt::format("workers={}\n", c.workers);
    return out;
}

void validate(const PipelineConfig& c) {
    if (c.products.empty()) {
        throw InputError("config: no products to analyze");
    }
    for (std::size_t i = 0; i < c.products.size(); ++i) {
        if (std::find(c.products.begin(), c.products.begin() + static_cast<std::ptrdiff_t>(i), c.products[i]) !=
            c.products.begin() + static_cast<std::ptrdiff_t>(i)) {
            throw InputError(fmt::format("config: product '{}' listed twice", to_string(c.products[i])));
        }
    }
    if (c.grid.empty()) {
        throw InputError("config: empty surplus grid");
    }
    if (!std::is_sorted(c.grid.begin(), c.grid.end()) ||
        std::adjacent_find(c.grid.begin(), c.grid.end()) != c.grid.end()) {
        throw InputError("config: surplus grid must be strictly ascending");
    }
    if (!(c.grid.front() >= 0.0)) {
        throw InputError("config: surplus grid must be non-negative");
    }
    if (c.n_paths < 1000) {
        throw InputError("config: n_paths must be >= 1000");
    }
    if (c.horizon < 1) {
        throw InputError("config: horizon must be >= 1");
    }
    if (c.bootstrap < 200) {
        throw InputError("config: bootstrap must be >= 200");
    }
    if (!c.loading.implied && !(c.loading.fixed > 0.0)) {
        throw InputError("config: fixed loading must be > 0");
    }
    if (c.dependence_alpha && !(*c.dependence_alpha > 0.0 && *c.dependence_alpha < 1.0)) {
        throw InputError("config: dependence_alpha must lie in (0, 1)");
    }
}

AnalysisReport analyze(const PipelineConfig& config, std::span<const MonthlyRecord> records) {
    run_stage("config", ErrorKind::Input, [&] { validate(config); });

    AnalysisReport report;
    report.config = config;

    for (std::size_t idx = 0; idx < config.products.size(); ++idx) {
        const Segment segment = config.products[idx];
        const auto label = std::string(to_string(segment));
        SegmentReport seg;
        seg.segment = segment;

        const MonthlySeries series = run_stage("ingest", ErrorKind::Input, [&] {
            auto s = segment_series(records, segment);
            if (s.size() < 20) {
                throw InputError(fmt::format("{}: {} months of data, need at least 20", label, s.size()));
            }
            seg.months = s.size();
            seg.premium = summarize(s.premiums);
            seg.claims_paid = summarize(s.claims_paid);
            seg.claim_count = summarize(s.claim_counts);
            for (const auto* stats : {&seg.premium, &seg.claims_paid, &seg.claim_count}) {
                validate(*stats);
            }
            return s;
        });

        run_stage("fit", ErrorKind::Numerical, [&] {
            seg.frequency = fit_poisson(series.claim_counts);
            try {
                seg.frequency_gof = gof_poisson(series.claim_counts, seg.frequency);
            } catch (const NumericalError& e) {
                seg.warnings.push_back(fmt::format("{}: Poisson goodness of fit skipped: {}", label, e.what()));
            }
            std::vector<double> positive;
            for (double v : series.claims_paid) {
                if (v > 0.0) positive.push_back(v);
            }
            seg.monthly_severity = fit_exponential(positive);
            try {
                seg.severity_gof = gof_exponential(positive, seg.monthly_severity);
            } catch (const NumericalError& e) {
                seg.warnings.push_back(fmt::format("{}: exponential goodness of fit skipped: {}", label, e.what()));
            }
            seg.claim_severity = fit_claim_severity(series.claim_counts, series.claims_paid);
        });

        run_stage("dependence", ErrorKind::Numerical, [&] {
            seg.dependence = measure_dependence(series.claim_counts, series.claims_paid, seg.claim_severity.rate_hat,
                                                config.bootstrap, derive_seed(config.seed, 1000 + idx));
            for (const auto& w : seg.dependence.warnings) {
                seg.warnings.push_back(fmt::format("{}: {}", label, w));
            }
        });

        run_stage("ruin", ErrorKind::Numerical, [&] {
            RiskModel model;
            model.lambda = seg.frequency.lambda_hat;
            model.beta = seg.claim_severity.rate_hat;
            model.horizon = config.horizon;
            model.monitoring = config.monitoring;
            if (config.loading.implied) {
                const double implied = mean_of(series.premiums) / mean_of(series.claims_paid) - 1.0;
                model.loading = implied;
                if (!(implied >= 0.01)) {
                    model.loading = 0.01;
                    seg.warnings.push_back(
                        fmt::format("{}: data-implied loading {:.4f} floored at 0.01", label, implied));
                }
            } else {
                model.loading = config.loading.fixed;
            }
            model.copula_theta = seg.dependence.gumbel_theta;
            if (config.dependence_alpha && !(seg.dependence.independence_p < *config.dependence_alpha)) {
                model.copula_theta = 1.0;
                seg.warnings.push_back(fmt::format(
                    "{}: independence not rejected (p = {:.4f} >= {}), dependent curve uses theta = 1", label,
                    seg.dependence.independence_p, *config.dependence_alpha));
            }
            seg.model = model;

            const double scale = config.grid_unit == GridUnit::MeanLoss ? expected_period_loss(model) : 1.0;
            for (double g : config.grid) {
                seg.grid.push_back(g * scale);
            }
            McOptions mc;
            mc.n_paths = config.n_paths;
            mc.master_seed = derive_seed(config.seed, idx);
            mc.workers = config.workers;
            seg.independent = ruin_curve(model, seg.grid, Assumption::Independent, mc);
            seg.dependent = ruin_curve(model, seg.grid, Assumption::Dependent, mc);
        });

        run_stage("tests", ErrorKind::Numerical, [&] {
            if (seg.grid.size() < 5) {
                seg.warnings.push_back(fmt::format("{}: fewer than 5 grid points, signed-rank test skipped", label));
                return;
            }
            seg.dependent_vs_independent = compare_curves(psi_values(seg.dependent), psi_values(seg.independent),
                                                          seg.warnings, label + " dependent vs independent");
        });

        report.segments.push_back(std::move(seg));
    }

    run_stage("tests", ErrorKind::Numerical, [&] {
        std::vector<const SegmentReport*> products;
        for (const auto& s : report.segments) {
            if (s.segment != Segment::Overall) products.push_back(&s);
        }
        if (products.size() < 2) {
            return;
        }
        const std::size_t b = config.grid.size();
        std::vector<std::vector<double>> blocks(b, std::vector<double>(products.size()));
        std::vector<std::string> labels;
        for (std::size_t j = 0; j < products.size(); ++j) {
            labels.emplace_back(to_string(products[j]->segment));
            for (std::size_t i = 0; i < b; ++i) {
                blocks[i][j] = products[j]->dependent[i].psi_hat;
            }
        }
        if (b >= 2) {
            try {
                report.friedman = friedman(blocks, labels);
            } catch (const std::invalid_argument& e) {
                report.warnings.push_back(fmt::format("Friedman test skipped: {}", e.what()));
            }
        }
        if (b >= 5) {
            for (std::size_t i = 0; i < products.size(); ++i) {
                for (std::size_t j = i + 1; j < products.size(); ++j) {
                    PairwiseComparison cmp;
                    cmp.first = products[j]->segment;
                    cmp.second = products[i]->segment;
                    cmp.result = compare_curves(psi_values(products[j]->dependent), psi_values(products[i]->dependent),
                                                report.warnings,
                                                fmt::format("{} v. {}", to_string(cmp.first), to_string(cmp.second)));
                    report.pairwise.push_back(std::move(cmp));
                }
            }
        }
    });
    return report;
}

AnalysisReport run_pipeline(const PipelineConfig& config) {
    const auto records = run_stage("ingest", ErrorKind::Input, [&] { return load_claims_csv(config.input); });
    auto report = analyze(config, records);
    run_stage("emit", ErrorKind::Input, [&] { emit_tables(report, config.out); });
    return report;
}

} // namespace ruinlab
