#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ruinlab {

enum class Product { Motor, Householders, FireAllied };

inline constexpr std::array<Product, 3> kAllProducts{Product::Motor, Product::Householders,
                                                     Product::FireAllied};

std::string_view to_string(Product p) noexcept;
// Throws InputError on anything but the exact, case-sensitive names.
Product parse_product(std::string_view name);

// One product-month of the raw dataset.
struct MonthlyRecord {
    int period = 0;  // 0-based month from study start
    Product product = Product::Motor;
    double premium = 0.0;
    double claims_paid = 0.0;
    long claim_count = 0;

    friend bool operator==(const MonthlyRecord&, const MonthlyRecord&) = default;
};

// Checks the per-record invariants; throws InputError naming the offending field.
void validate(const MonthlyRecord& record);

inline constexpr std::string_view kClaimsCsvHeader = "period,product,premium,claims_paid,claim_count";

// Reads `period,product,premium,claims_paid,claim_count` rows. Errors carry
// the 1-based file line and the column name.
std::vector<MonthlyRecord> load_claims_csv(const std::filesystem::path& path);
std::vector<MonthlyRecord> parse_claims_csv(std::string_view text);

void write_claims_csv(const std::filesystem::path& path, std::span<const MonthlyRecord> records);

enum class Field { Premium, ClaimsPaid, ClaimCount };

std::string_view to_string(Field f) noexcept;

struct SummaryStats {
    double minimum = 0.0;
    double maximum = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;  // sample (n - 1)
    std::size_t n = 0;
};

// Throws std::invalid_argument for fewer than two values: a sample standard
// deviation needs n >= 2.
SummaryStats summarize(std::span<const double> values);
SummaryStats summarize(std::span<const MonthlyRecord> records, Field field);

// Rejects summaries whose ordering is impossible (mean outside [min, max],
// negative spread). Throws InputError.
void validate(const SummaryStats& stats);

// Analysis unit: a single product or the company total per month.
enum class Segment { Motor, Householders, FireAllied, Overall };

std::string_view to_string(Segment s) noexcept;
Segment parse_segment(std::string_view name);
Segment segment_of(Product p) noexcept;

// Per-month series for one segment, ordered by period. For Overall the
// products are summed within each period.
struct MonthlySeries {
    std::vector<int> periods;
    std::vector<double> premiums;
    std::vector<double> claims_paid;
    std::vector<double> claim_counts;

    std::size_t size() const noexcept { return periods.size(); }
};

MonthlySeries segment_series(std::span<const MonthlyRecord> records, Segment segment);

} // namespace ruinlab
