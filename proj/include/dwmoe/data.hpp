#pragma once

// Data layer: raw price series ingestion, weekly aggregation, percent-change
// normalization, supervised sample construction, and the two synthetic
// generators (interleaved crescents for classification, regime-switching
// drift series for forecasting).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dwmoe/dates.hpp"
#include "dwmoe/rng.hpp"

namespace dwmoe {

// Daily (or otherwise dated) positive price/rate observations.
struct RawSeries {
    struct Row {
        Date date;
        std::vector<double> values;
    };

    std::vector<std::string> feature_names;
    std::vector<Row> rows;

    std::size_t feature_count() const { return feature_names.size(); }
};

// Week-over-week fractional changes, one row per week. Changes are stored
// as fractions (0.10 means +10 %).
struct FeatureMatrix {
    struct Week {
        long week_index;
        std::vector<double> changes;
    };

    std::vector<std::string> feature_names;
    std::vector<Week> weeks;

    std::size_t feature_count() const { return feature_names.size(); }
};

// One supervised step: previous week's changes -> next week's target change.
struct Sample {
    std::vector<double> x;
    double t = 0.0;
};

// 2-D classification point for the crescent benchmark.
struct LabeledPoint {
    std::array<double, 2> x{};
    int label = 0;  // 0 or 1
};

// One regime of the synthetic drifting process: the target is a linear
// function of the current week's changes plus Gaussian noise.
struct Regime {
    std::size_t length = 0;  // weeks
    std::vector<double> coeffs;
    double noise_sd = 0.0;
};

struct DriftSpec {
    std::size_t n_weeks = 0;
    std::vector<Regime> regimes;
    std::uint64_t seed = 0;
};

struct DriftSeries {
    FeatureMatrix features;
    std::vector<double> targets;  // targets[w] pairs with features.weeks[w]
};

// CSV problems carry the offending 1-based physical line number.
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& what, int line)
        : std::runtime_error(what + ", line " + std::to_string(line)), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(out);
}

// Full-precision decimal formatting so emitted files re-parse to the same
// double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

// Load a raw price CSV: header "date,<f1>,...,<fF>", ISO dates, positive
// decimal values. Rows are returned sorted by date; duplicate dates are
// rejected. Blank lines are skipped but still count toward line numbers.
inline RawSeries load_csv(std::istream& in) {
    RawSeries series;
    std::string line;
    int line_no = 0;

    if (!std::getline(in, line)) throw CsvError("missing header", 1);
    ++line_no;
    {
        const auto fields = detail::split_csv_line(line);
        if (fields.size() < 2 || detail::trim(fields[0]) != "date")
            throw CsvError("header must be 'date,<features...>'", line_no);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const auto name = detail::trim(fields[i]);
            if (name.empty()) throw CsvError("empty feature name", line_no);
            series.feature_names.emplace_back(name);
        }
    }
    const std::size_t n_features = series.feature_names.size();

    std::vector<int> row_lines;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != n_features + 1) throw CsvError("malformed row", line_no);
        const auto date = parse_date(detail::trim(fields[0]));
        if (!date) throw CsvError("malformed date", line_no);
        RawSeries::Row row;
        row.date = *date;
        row.values.reserve(n_features);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v;
            if (!detail::parse_double(detail::trim(fields[i]), v))
                throw CsvError("malformed value", line_no);
            if (v <= 0.0) throw CsvError("non-positive value", line_no);
            row.values.push_back(v);
        }
        series.rows.push_back(std::move(row));
        row_lines.push_back(line_no);
    }

    // Sort by date, keeping the original line numbers for duplicate reports.
    std::vector<std::size_t> order(series.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return to_serial(series.rows[a].date) < to_serial(series.rows[b].date);
    });
    std::vector<RawSeries::Row> sorted;
    sorted.reserve(series.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && series.rows[order[i]].date == series.rows[order[i - 1]].date)
            throw CsvError("duplicate date", std::max(row_lines[order[i]], row_lines[order[i - 1]]));
        sorted.push_back(std::move(series.rows[order[i]]));
    }
    series.rows = std::move(sorted);
    return series;
}

// Average each ISO-8601 week's rows into one row dated at the week's Monday.
// Days absent from the input simply do not contribute to the mean.
inline RawSeries weekly_average(const RawSeries& series) {
    if (series.rows.empty()) throw std::invalid_argument("weekly_average: empty series");

    struct Bucket {
        std::vector<double> sums;
        std::size_t count = 0;
    };
    std::map<std::int64_t, Bucket> weeks;  // keyed by the week's Monday serial
    const std::size_t f = series.feature_count();
    for (const auto& row : series.rows) {
        auto& b = weeks[iso_week_monday(to_serial(row.date))];
        if (b.sums.empty()) b.sums.assign(f, 0.0);
        for (std::size_t i = 0; i < f; ++i) b.sums[i] += row.values[i];
        ++b.count;
    }

    RawSeries out;
    out.feature_names = series.feature_names;
    out.rows.reserve(weeks.size());
    for (const auto& [monday, bucket] : weeks) {
        RawSeries::Row row;
        row.date = civil_from_days(monday);
        row.values.reserve(f);
        for (double s : bucket.sums) row.values.push_back(s / static_cast<double>(bucket.count));
        out.rows.push_back(std::move(row));
    }
    return out;
}

// Fractional change of each feature from one row to the next:
// change_w[f] = (p_w[f] - p_{w-1}[f]) / p_{w-1}[f].
inline FeatureMatrix to_percent_changes(const RawSeries& series) {
    if (series.rows.size() < 2) throw std::invalid_argument("to_percent_changes: need at least 2 rows");

    FeatureMatrix m;
    m.feature_names = series.feature_names;
    const std::size_t f = series.feature_count();
    m.weeks.reserve(series.rows.size() - 1);
    for (std::size_t w = 1; w < series.rows.size(); ++w) {
        FeatureMatrix::Week week;
        week.week_index = static_cast<long>(w - 1);
        week.changes.reserve(f);
        for (std::size_t i = 0; i < f; ++i) {
            const double prev = series.rows[w - 1].values[i];
            week.changes.push_back((series.rows[w].values[i] - prev) / prev);
        }
        m.weeks.push_back(std::move(week));
    }
    return m;
}

// Pair week j's changes with week j+1's target-feature change.
inline std::vector<Sample> make_samples(const FeatureMatrix& m, std::size_t target_feature) {
    if (target_feature >= m.feature_count())
        throw std::out_of_range("make_samples: target_feature out of range");
    if (m.weeks.size() < 2) throw std::invalid_argument("make_samples: need at least 2 weeks");

    std::vector<Sample> samples;
    samples.reserve(m.weeks.size() - 1);
    for (std::size_t j = 0; j + 1 < m.weeks.size(); ++j)
        samples.push_back(Sample{m.weeks[j].changes, m.weeks[j + 1].changes[target_feature]});
    return samples;
}

// Two interleaving half-circle arcs with isotropic Gaussian noise, n/2
// points per class. Class 0 lies on the upper unit semicircle at the
// origin, class 1 on the lower semicircle centered at (1, 0.5).
inline std::vector<LabeledPoint> gen_crescents(std::size_t n, double noise_sd, std::uint64_t seed) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("gen_crescents: n must be even and >= 2");
    if (noise_sd < 0.0) throw std::invalid_argument("gen_crescents: noise_sd must be >= 0");

    constexpr double kPi = 3.14159265358979323846;
    Xoshiro256pp rng(seed);
    std::vector<LabeledPoint> pts;
    pts.reserve(n);
    for (int label = 0; label <= 1; ++label) {
        for (std::size_t i = 0; i < n / 2; ++i) {
            const double theta = rng.uniform(0.0, kPi);
            LabeledPoint p;
            p.label = label;
            if (label == 0)
                p.x = {std::cos(theta), std::sin(theta)};
            else
                p.x = {1.0 - std::cos(theta), 0.5 - std::sin(theta)};
            p.x[0] += noise_sd * rng.normal();
            p.x[1] += noise_sd * rng.normal();
            pts.push_back(p);
        }
    }
    return pts;
}

namespace detail {

inline const Regime& regime_at(const DriftSpec& spec, std::size_t week) {
    std::size_t end = 0;
    for (const auto& r : spec.regimes) {
        end += r.length;
        if (week < end) return r;
    }
    return spec.regimes.back();
}

}  // namespace detail

// Synthetic regime-switching series. Features evolve as AR(1) changes;
// feature 0 plays the role of the predicted instrument, so its next-week
// change IS the target: targets[w] = clamp(coeffs_regime . x_w + noise).
// That keeps a CSV round trip through make_samples self-consistent.
inline DriftSeries gen_drifting_series(const DriftSpec& spec) {
    if (spec.regimes.empty()) throw std::invalid_argument("gen_drifting_series: no regimes");
    std::size_t total = 0;
    const std::size_t f = spec.regimes.front().coeffs.size();
    if (f == 0) throw std::invalid_argument("gen_drifting_series: empty coeffs");
    for (const auto& r : spec.regimes) {
        total += r.length;
        if (r.coeffs.size() != f) throw std::invalid_argument("gen_drifting_series: coeff size mismatch");
        if (r.noise_sd < 0.0) throw std::invalid_argument("gen_drifting_series: noise_sd must be >= 0");
    }
    if (total != spec.n_weeks) throw std::invalid_argument("gen_drifting_series: regime lengths must sum to n_weeks");

    constexpr double kAr = 0.6;        // AR(1) coefficient for feature changes
    constexpr double kInnovSd = 0.12;  // innovation scale; stationary sd ~0.15
    constexpr double kClamp = 0.2;     // weekly changes live in [-0.2, 0.2]

    Xoshiro256pp rng(spec.seed);
    DriftSeries out;
    out.targets.reserve(spec.n_weeks);
    out.features.weeks.reserve(spec.n_weeks);
    for (std::size_t i = 0; i < f; ++i) out.features.feature_names.push_back("f" + std::to_string(i));

    std::vector<double> x(f);
    for (auto& v : x) v = std::clamp(rng.normal(0.0, kInnovSd), -kClamp, kClamp);

    for (std::size_t w = 0; w < spec.n_weeks; ++w) {
        const Regime& regime = detail::regime_at(spec, w);
        double dot = 0.0;
        for (std::size_t i = 0; i < f; ++i) dot += regime.coeffs[i] * x[i];
        const double target = std::clamp(dot + rng.normal(0.0, regime.noise_sd), -kClamp, kClamp);

        out.features.weeks.push_back(FeatureMatrix::Week{static_cast<long>(w), x});
        out.targets.push_back(target);

        // Advance to next week: feature 0 realizes the target, the rest AR(1).
        x[0] = target;
        for (std::size_t i = 1; i < f; ++i)
            x[i] = std::clamp(kAr * x[i] + rng.normal(0.0, kInnovSd), -kClamp, kClamp);
    }
    return out;
}

// --- change-format CSV (synthetic export / walk-forward input) -------------
//
// Same header layout as the raw format plus a final "target" column; values
// are fractional changes rather than prices, one row per week. Dates are
// synthetic consecutive Mondays when exporting.

inline void write_change_csv(const FeatureMatrix& m, const std::vector<double>& targets,
                             std::ostream& out) {
    if (m.weeks.size() != targets.size())
        throw std::invalid_argument("write_change_csv: weeks/targets length mismatch");
    out << "date";
    for (const auto& name : m.feature_names) out << ',' << name;
    out << ",target\n";
    const std::int64_t start = days_from_civil(2000, 1, 3);  // a Monday
    for (std::size_t w = 0; w < m.weeks.size(); ++w) {
        out << format_date(civil_from_days(start + static_cast<std::int64_t>(w) * 7));
        for (double c : m.weeks[w].changes) out << ',' << detail::format_double(c);
        out << ',' << detail::format_double(targets[w]) << '\n';
    }
}

// Detect the change-format by its trailing "target" header column.
inline bool is_change_csv_header(std::istream& in) {
    const auto pos = in.tellg();
    std::string line;
    if (!std::getline(in, line)) return false;
    in.seekg(pos);
    const auto fields = detail::split_csv_line(line);
    return fields.size() >= 2 && detail::trim(fields.back()) == "target";
}

inline DriftSeries load_change_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw CsvError("missing header", 1);
    ++line_no;

    DriftSeries out;
    {
        const auto fields = detail::split_csv_line(line);
        if (fields.size() < 3 || detail::trim(fields[0]) != "date" ||
            detail::trim(fields.back()) != "target")
            throw CsvError("header must be 'date,<features...>,target'", line_no);
        for (std::size_t i = 1; i + 1 < fields.size(); ++i)
            out.features.feature_names.emplace_back(detail::trim(fields[i]));
    }
    const std::size_t f = out.features.feature_names.size();

    long week = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != f + 2) throw CsvError("malformed row", line_no);
        if (!parse_date(detail::trim(fields[0]))) throw CsvError("malformed date", line_no);
        FeatureMatrix::Week wk;
        wk.week_index = week++;
        wk.changes.reserve(f);
        for (std::size_t i = 1; i <= f; ++i) {
            double v;
            if (!detail::parse_double(detail::trim(fields[i]), v))
                throw CsvError("malformed value", line_no);
            wk.changes.push_back(v);
        }
        double t;
        if (!detail::parse_double(detail::trim(fields.back()), t))
            throw CsvError("malformed value", line_no);
        out.features.weeks.push_back(std::move(wk));
        out.targets.push_back(t);
    }
    return out;
}

inline void write_crescents_csv(const std::vector<LabeledPoint>& pts, std::ostream& out) {
    out << "x1,x2,label\n";
    for (const auto& p : pts)
        out << detail::format_double(p.x[0]) << ',' << detail::format_double(p.x[1]) << ','
            << p.label << '\n';
}

}  // namespace dwmoe
