#include "ruinlab/claims_ingest.hpp"

#include "ruinlab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

namespace ruinlab {

namespace {

constexpr std::array<std::string_view, 5> kColumns{"period", "product", "premium", "claims_paid",
                                                   "claim_count"};

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

[[noreturn]] void row_error(std::size_t line, std::string_view column, std::string_view what) {
    throw InputError(fmt::format("row {} column '{}': {}", line, column, what));
}

long parse_integer(std::string_view text, std::size_t line, std::string_view column) {
    long value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        row_error(line, column, fmt::format("expected an integer, got '{}'", text));
    }
    return value;
}

double parse_real(std::string_view text, std::size_t line, std::string_view column) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        row_error(line, column, fmt::format("expected a number, got '{}'", text));
    }
    return value;
}

} // namespace

std::string_view to_string(Product p) noexcept {
    switch (p) {
    case Product::Motor: return "Motor";
    case Product::Householders: return "Householders";
    case Product::FireAllied: return "FireAllied";
    }
    return "?";
}

Product parse_product(std::string_view name) {
    for (auto p : kAllProducts) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw InputError(fmt::format("unknown product '{}'", name));
}

std::string_view to_string(Field f) noexcept {
    switch (f) {
    case Field::Premium: return "premium";
    case Field::ClaimsPaid: return "claims_paid";
    case Field::ClaimCount: return "claim_count";
    }
    return "?";
}

std::string_view to_string(Segment s) noexcept {
    switch (s) {
    case Segment::Motor: return "Motor";
    case Segment::Householders: return "Householders";
    case Segment::FireAllied: return "FireAllied";
    case Segment::Overall: return "Overall";
    }
    return "?";
}

Segment parse_segment(std::string_view name) {
    if (name == "Overall") {
        return Segment::Overall;
    }
    return segment_of(parse_product(name));
}

Segment segment_of(Product p) noexcept {
    switch (p) {
    case Product::Motor: return Segment::Motor;
    case Product::Householders: return Segment::Householders;
    case Product::FireAllied: return Segment::FireAllied;
    }
    return Segment::Overall;
}

void validate(const MonthlyRecord& r) {
    if (r.period < 0) {
        throw InputError("period: must be >= 0");
    }
    if (!(r.premium >= 0.0)) {
        throw InputError("premium: must be >= 0");
    }
    if (!(r.claims_paid >= 0.0)) {
        throw InputError("claims_paid: must be >= 0");
    }
    if (r.claim_count < 0) {
        throw InputError("claim_count: must be >= 0");
    }
    if (r.claim_count == 0 && r.claims_paid != 0.0) {
        throw InputError("claims_paid: must be 0 when claim_count is 0");
    }
}

std::vector<MonthlyRecord> parse_claims_csv(std::string_view text) {
    std::vector<MonthlyRecord> records;
    std::set<std::pair<Product, int>> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) {
            line.remove_prefix(3);
        }
        if (!header_seen) {
            if (line != kClaimsCsvHeader) {
                throw InputError(fmt::format("row 1: header must be exactly '{}'", kClaimsCsvHeader));
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }

        const auto fields = split_fields(line);
        if (fields.size() != kColumns.size()) {
            throw InputError(fmt::format("row {}: expected {} columns, got {}", line_no,
                                         kColumns.size(), fields.size()));
        }

        MonthlyRecord r;
        const long period = parse_integer(fields[0], line_no, kColumns[0]);
        if (period < 0 || period > 1'000'000) {
            row_error(line_no, kColumns[0], "must be a month index >= 0");
        }
        r.period = static_cast<int>(period);
        try {
            r.product = parse_product(fields[1]);
        } catch (const InputError& e) {
            row_error(line_no, kColumns[1], e.what());
        }
        r.premium = parse_real(fields[2], line_no, kColumns[2]);
        r.claims_paid = parse_real(fields[3], line_no, kColumns[3]);
        r.claim_count = parse_integer(fields[4], line_no, kColumns[4]);

        if (r.premium < 0) {
            row_error(line_no, kColumns[2], "must be >= 0");
        }
        if (r.claims_paid < 0) {
            row_error(line_no, kColumns[3], "must be >= 0");
        }
        if (r.claim_count < 0) {
            row_error(line_no, kColumns[4], "must be >= 0");
        }
        if (r.claim_count == 0 && r.claims_paid != 0.0) {
            row_error(line_no, kColumns[3], "claims paid with a zero claim count");
        }
        if (!seen.emplace(r.product, r.period).second) {
            throw InputError(fmt::format("row {}: duplicate (product, period) = ({}, {})", line_no,
                                         to_string(r.product), r.period));
        }
        records.push_back(r);
    }
    if (!header_seen) {
        throw InputError("empty claims file: missing header");
    }
    return records;
}

std::vector<MonthlyRecord> load_claims_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot open claims file '{}'", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_claims_csv(buffer.str());
}

void write_claims_csv(const std::filesystem::path& path, std::span<const MonthlyRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError(fmt::format("cannot write claims file '{}'", path.string()));
    }
    out << kClaimsCsvHeader << '\n';
    for (const auto& r : records) {
        out << fmt::format("{},{},{:.2f},{:.2f},{}\n", r.period, to_string(r.product), r.premium,
                           r.claims_paid, r.claim_count);
    }
}

SummaryStats summarize(std::span<const double> values) {
    if (values.size() < 2) {
        throw std::invalid_argument(values.empty()
                                        ? "summarize: empty input"
                                        : "summarize: standard deviation needs at least two values");
    }
    SummaryStats s;
    s.n = values.size();
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.minimum = *lo;
    s.maximum = *hi;

    // Sorted summation keeps the result independent of input order.
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) {
        sum += v;
    }
    s.mean = std::clamp(sum / static_cast<double>(s.n), s.minimum, s.maximum);
    double ss = 0.0;
    for (double v : sorted) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
    return s;
}

SummaryStats summarize(std::span<const MonthlyRecord> records, Field field) {
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) {
        switch (field) {
        case Field::Premium: values.push_back(r.premium); break;
        case Field::ClaimsPaid: values.push_back(r.claims_paid); break;
        case Field::ClaimCount: values.push_back(static_cast<double>(r.claim_count)); break;
        }
    }
    return summarize(values);
}

void validate(const SummaryStats& s) {
    if (!(s.minimum <= s.maximum)) {
        throw InputError("summary: minimum exceeds maximum");
    }
    if (s.mean < s.minimum || s.mean > s.maximum) {
        throw InputError(fmt::format("summary: mean {} outside [{}, {}]", s.mean, s.minimum, s.maximum));
    }
    if (!(s.std_dev >= 0.0)) {
        throw InputError("summary: negative standard deviation");
    }
}

MonthlySeries segment_series(std::span<const MonthlyRecord> records, Segment segment) {
    struct Acc {
        double premium = 0, claims = 0, count = 0;
    };
    std::map<int, Acc> by_period;
    for (const auto& r : records) {
        if (segment != Segment::Overall && segment_of(r.product) != segment) {
            continue;
        }
        auto& a = by_period[r.period];
        a.premium += r.premium;
        a.claims += r.claims_paid;
        a.count += static_cast<double>(r.claim_count);
    }
    MonthlySeries out;
    for (const auto& [period, a] : by_period) {
        out.periods.push_back(period);
        out.premiums.push_back(a.premium);
        out.claims_paid.push_back(a.claims);
        out.claim_counts.push_back(a.count);
    }
    return out;
}

} // namespace ruinlab
