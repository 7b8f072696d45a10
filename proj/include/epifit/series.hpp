#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "epifit/error.hpp"

namespace epifit {

/// Calendar date with day-serial arithmetic (proleptic Gregorian).
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    /// Days since 1970-01-01.
    long serial() const;
    static Date from_serial(long days);
    Date plus_days(long n) const { return from_serial(serial() + n); }
    std::string iso() const;

    friend bool operator==(const Date& a, const Date& b) {
        return a.year == b.year && a.month == b.month && a.day == b.day;
    }
    friend bool operator!=(const Date& a, const Date& b) { return !(a == b); }
    friend bool operator<(const Date& a, const Date& b) { return a.serial() < b.serial(); }
};

/// Accepts dd/mm/yyyy (surveillance-feed convention) and yyyy-mm-dd.
Date parse_date(const std::string& text);

struct RawRecord {
    Date date;
    long long new_cases = 0;
    long long new_deaths = 0;
    std::string region_id;
};

/// Column names used when reading a raw daily-count CSV.
struct CsvSchema {
    std::string date_col = "date";
    std::string cases_col = "cases";
    std::string deaths_col = "deaths";
    std::string region_col = "region";
};

/// Reads a raw daily-count CSV. When `region` is nonempty, rows are filtered on
/// the schema's region column (which must then exist). Records come back sorted
/// ascending by date. Schema problems are config errors; malformed rows are
/// data errors naming the offending line.
std::vector<RawRecord> parse_csv(std::istream& in, const CsvSchema& schema, const std::string& region = "");

enum class NegativePolicy { error_out, clamp_zero };

/// Daily counts and running totals; index i holds day i+1, so day 1 is the
/// first record. Counts are stored as doubles for direct use in the numerics
/// but always hold integral values.
struct EpidemicSeries {
    Eigen::ArrayXd cases;       ///< daily new cases c_t
    Eigen::ArrayXd deaths;      ///< daily new deaths d_t
    Eigen::ArrayXd cum_cases;   ///< running totals C_t
    Eigen::ArrayXd cum_deaths;  ///< running totals D_t
    Date origin;                ///< calendar date of day 1

    int days() const { return static_cast<int>(cases.size()); }
    Date date_of_day(int t) const { return origin.plus_days(t - 1); }
};

/// Builds a contiguous daily series from raw records: sorts, fills calendar
/// gaps with zero-count days (a gap longer than 30 days is a data error),
/// applies the negative-count policy, and accumulates totals. Requires at
/// least 3 records, distinct dates, and a positive first case count — the
/// fitting recursion conditions on that first observation.
EpidemicSeries build_series(std::vector<RawRecord> records, NegativePolicy policy = NegativePolicy::error_out);

/// Canonical on-disk form: day_index,date,new_cases,new_deaths,cum_cases,cum_deaths.
void write_series_csv(std::ostream& out, const EpidemicSeries& series);
EpidemicSeries read_series_csv(std::istream& in);

/// True when the header line looks like the canonical series CSV (as opposed
/// to a raw daily-count export).
bool is_series_csv_header(const std::string& header_line);

}  // namespace epifit
