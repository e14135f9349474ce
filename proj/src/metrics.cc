#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qas/harness.h"

namespace qas {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

void expect_header(std::istream& in, const char* header) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) {
        throw std::runtime_error("unexpected CSV header \"" + line + "\"");
    }
}

}  // namespace

std::vector<SummaryRow> summarize(
    const std::vector<std::vector<MetricRecord>>& per_seed) {
    if (per_seed.empty()) return {};
    const std::size_t episodes = per_seed.front().size();
    for (const auto& s : per_seed) {
        if (s.size() != episodes) {
            throw std::invalid_argument("seed series differ in length");
        }
    }
    const double n = double(per_seed.size());
    std::vector<SummaryRow> rows(episodes);
    for (std::size_t e = 0; e < episodes; ++e) {
        SummaryRow& row = rows[e];
        row.episode = per_seed.front()[e].episode;
        for (const auto& s : per_seed) {
            row.mean_return += s[e].episode_return / n;
            row.mean_fidelity += s[e].final_fidelity / n;
            row.mean_length += s[e].length / n;
        }
        double var_r = 0.0;
        double var_f = 0.0;
        for (const auto& s : per_seed) {
            var_r += std::pow(s[e].episode_return - row.mean_return, 2) / n;
            var_f += std::pow(s[e].final_fidelity - row.mean_fidelity, 2) / n;
        }
        row.std_return = std::sqrt(var_r);
        row.std_fidelity = std::sqrt(var_f);
    }
    return rows;
}

void write_metric_csv(std::ostream& out, const std::vector<MetricRecord>& rows) {
    out << kMetricCsvHeader << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
        out << r.seed << ',' << r.episode << ',' << r.episode_return << ','
            << r.final_fidelity << ',' << r.length << '\n';
    }
}

std::vector<MetricRecord> read_metric_csv(std::istream& in) {
    expect_header(in, kMetricCsvHeader);
    std::vector<MetricRecord> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw std::runtime_error("bad metric row: " + line);
        rows.push_back({std::stoull(f[0]), std::stoi(f[1]), std::stod(f[2]),
                        std::stod(f[3]), std::stoi(f[4])});
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << kSummaryCsvHeader << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
        out << r.episode << ',' << r.mean_return << ',' << r.std_return << ','
            << r.mean_fidelity << ',' << r.std_fidelity << ',' << r.mean_length
            << '\n';
    }
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
    expect_header(in, kSummaryCsvHeader);
    std::vector<SummaryRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw std::runtime_error("bad summary row: " + line);
        rows.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]),
                        std::stod(f[3]), std::stod(f[4]), std::stod(f[5])});
    }
    return rows;
}

double tail_mean(const std::vector<double>& values, std::size_t window) {
    if (values.empty()) throw std::invalid_argument("tail_mean of empty series");
    const std::size_t n = std::min(window, values.size());
    double sum = 0.0;
    for (std::size_t i = values.size() - n; i < values.size(); ++i) sum += values[i];
    return sum / double(n);
}

}  // namespace qas
