#include "epifit/series.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace epifit {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> len = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return len[static_cast<size_t>(m - 1)];
}

bool valid_date(int y, int m, int d) {
    return y >= 1 && m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

// Howard Hinnant's civil-calendar algorithms.
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

// Minimal CSV field splitter: plain commas, optional double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (quoted) {
            if (ch == '"') {
                quoted = false;
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

long long parse_count(const std::string& text, long line_no, const char* what) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw_data("row " + std::to_string(line_no) + ": unreadable " + what + " value '" + text + "'");
    }
}

}  // namespace

long Date::serial() const { return days_from_civil(year, month, day); }

Date Date::from_serial(long days) {
    Date out;
    civil_from_days(days, out.year, out.month, out.day);
    return out;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date parse_date(const std::string& text) {
    int a = 0, b = 0, c = 0;
    char sep1 = 0, sep2 = 0;
    std::istringstream is(text);
    if ((is >> a >> sep1 >> b >> sep2 >> c) && is.eof() && sep1 == sep2) {
        if (sep1 == '/' && valid_date(c, b, a)) return Date{c, b, a};  // dd/mm/yyyy
        if (sep1 == '-' && valid_date(a, b, c)) return Date{a, b, c};  // yyyy-mm-dd
    }
    throw_data("unreadable date '" + text + "' (expected dd/mm/yyyy or yyyy-mm-dd)");
}

std::vector<RawRecord> parse_csv(std::istream& in, const CsvSchema& schema, const std::string& region) {
    std::string line;
    if (!std::getline(in, line)) throw_data("input CSV is empty");
    const std::vector<std::string> header = split_csv_line(line);

    auto find_col = [&header](const std::string& name) {
        for (size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<long>(i);
        }
        return -1L;
    };
    const long date_ix = find_col(schema.date_col);
    const long cases_ix = find_col(schema.cases_col);
    const long deaths_ix = find_col(schema.deaths_col);
    const long region_ix = find_col(schema.region_col);
    if (date_ix < 0) throw_config("input CSV is missing date column '" + schema.date_col + "'");
    if (cases_ix < 0) throw_config("input CSV is missing cases column '" + schema.cases_col + "'");
    if (deaths_ix < 0) throw_config("input CSV is missing deaths column '" + schema.deaths_col + "'");
    if (!region.empty() && region_ix < 0) {
        throw_config("region filter requested but region column '" + schema.region_col + "' is missing");
    }
    const long need = std::max(std::max(date_ix, cases_ix), std::max(deaths_ix, region_ix));

    std::vector<RawRecord> records;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<long>(fields.size()) <= need) {
            throw_data("row " + std::to_string(line_no) + ": expected at least "
                       + std::to_string(need + 1) + " fields, found " + std::to_string(fields.size()));
        }
        RawRecord rec;
        if (region_ix >= 0) rec.region_id = fields[static_cast<size_t>(region_ix)];
        if (!region.empty() && rec.region_id != region) continue;
        try {
            rec.date = parse_date(fields[static_cast<size_t>(date_ix)]);
        } catch (const Error& e) {
            throw_data("row " + std::to_string(line_no) + ": " + e.what());
        }
        rec.new_cases = parse_count(fields[static_cast<size_t>(cases_ix)], line_no, "cases");
        rec.new_deaths = parse_count(fields[static_cast<size_t>(deaths_ix)], line_no, "deaths");
        records.push_back(std::move(rec));
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const RawRecord& x, const RawRecord& y) { return x.date < y.date; });
    return records;
}

EpidemicSeries build_series(std::vector<RawRecord> records, NegativePolicy policy) {
    if (records.size() < 3) throw_data("need at least 3 daily records to build a series");
    std::stable_sort(records.begin(), records.end(),
                     [](const RawRecord& x, const RawRecord& y) { return x.date < y.date; });
    for (size_t i = 1; i < records.size(); ++i) {
        if (records[i].date == records[i - 1].date) {
            throw_data("duplicate records for date " + records[i].date.iso());
        }
    }

    const long first = records.front().date.serial();
    const long last = records.back().date.serial();
    const long n_days = last - first + 1;

    Eigen::ArrayXd cases = Eigen::ArrayXd::Zero(n_days);
    Eigen::ArrayXd deaths = Eigen::ArrayXd::Zero(n_days);
    long prev_serial = first - 1;
    for (const RawRecord& rec : records) {
        const long s = rec.date.serial();
        if (s - prev_serial > 31) {
            throw_data("gap of " + std::to_string(s - prev_serial - 1) + " missing days before "
                       + rec.date.iso() + " exceeds the 30-day fill limit");
        }
        prev_serial = s;
        long long c = rec.new_cases;
        long long d = rec.new_deaths;
        if (c < 0 || d < 0) {
            if (policy == NegativePolicy::error_out) {
                throw_data("negative count on " + rec.date.iso() + " (cases " + std::to_string(c)
                           + ", deaths " + std::to_string(d) + ")");
            }
            c = std::max(c, 0LL);
            d = std::max(d, 0LL);
        }
        cases[s - first] = static_cast<double>(c);
        deaths[s - first] = static_cast<double>(d);
    }
    if (cases[0] <= 0.0) {
        throw_data("first record must report at least one case; the model conditions on it");
    }

    EpidemicSeries out;
    out.origin = records.front().date;
    out.cases = std::move(cases);
    out.deaths = std::move(deaths);
    out.cum_cases.resize(n_days);
    out.cum_deaths.resize(n_days);
    double cc = 0.0, cd = 0.0;
    for (long i = 0; i < n_days; ++i) {
        cc += out.cases[i];
        cd += out.deaths[i];
        out.cum_cases[i] = cc;
        out.cum_deaths[i] = cd;
    }
    return out;
}

void write_series_csv(std::ostream& out, const EpidemicSeries& series) {
    out << "day_index,date,new_cases,new_deaths,cum_cases,cum_deaths\n";
    char buf[160];
    for (int t = 1; t <= series.days(); ++t) {
        const long i = t - 1;
        std::snprintf(buf, sizeof buf, "%d,%s,%.0f,%.0f,%.0f,%.0f\n", t,
                      series.date_of_day(t).iso().c_str(), series.cases[i], series.deaths[i],
                      series.cum_cases[i], series.cum_deaths[i]);
        out << buf;
    }
}

bool is_series_csv_header(const std::string& header_line) {
    std::string stripped = header_line;
    while (!stripped.empty() && (stripped.back() == '\r' || stripped.back() == '\n')) stripped.pop_back();
    return stripped == "day_index,date,new_cases,new_deaths,cum_cases,cum_deaths";
}

EpidemicSeries read_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw_data("series CSV is empty");
    if (!is_series_csv_header(line)) throw_data("series CSV has unexpected header '" + line + "'");

    std::vector<RawRecord> records;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() < 6) throw_data("row " + std::to_string(line_no) + ": expected 6 fields");
        RawRecord rec;
        rec.date = parse_date(f[1]);
        rec.new_cases = parse_count(f[2], line_no, "cases");
        rec.new_deaths = parse_count(f[3], line_no, "deaths");
        records.push_back(rec);
    }
    return build_series(std::move(records), NegativePolicy::error_out);
}

}  // namespace epifit
