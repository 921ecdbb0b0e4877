#include "citecheck/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace citecheck {

using nlohmann::json;

std::int64_t percent_tenths(Rational r) {
    if (!r.defined()) throw std::invalid_argument("undefined rate");
    // round(1000 * num / den), halves up, in exact integer arithmetic.
    return (r.num * 2000 + r.den) / (2 * r.den);
}

std::string render_percent(Rational r) {
    if (!r.defined()) return "n/a";
    std::int64_t t = percent_tenths(r);
    return fmt::format("{}.{}%", t / 10, t % 10);
}

DimensionStats tally(std::span<const EvalResult> evals, Dimension dimension) {
    DimensionStats s;
    for (const EvalResult& e : evals) {
        if (e.dimension != dimension) continue;
        bool limited = e.has_flag(EvalFlag::rate_limited_source);
        if (!e.score) {
            ++s.not_evaluated;
        } else if (*e.score == 1) {
            ++s.passed;
            if (limited) ++s.rate_limited_passed;
        } else {
            ++s.failed;
            if (limited) ++s.rate_limited_failed;
        }
    }
    return s;
}

std::map<std::string, std::int64_t> error_breakdown(std::span<const EvalResult> evals) {
    std::map<std::string, std::int64_t> out;
    for (const EvalResult& e : evals) {
        if (e.dimension != Dimension::link_works || e.score != std::optional<int>(0)) continue;
        std::string key;
        if (!e.fetch_category) {
            key = "not_fetched";
        } else {
            switch (*e.fetch_category) {
                case FetchCategory::ok: key = "empty_content"; break;
                case FetchCategory::blocked: key = "blocked"; break;
                case FetchCategory::timeout: key = "timeout"; break;
                case FetchCategory::unreachable: key = "unreachable"; break;
                case FetchCategory::rate_limited: key = "rate_limited"; break;
                case FetchCategory::http_error: {
                    int st = e.http_status.value_or(0);
                    key = st >= 400 && st < 500 ? "http_error_4xx"
                          : st >= 500 && st < 600 ? "http_error_5xx"
                                                  : "http_error_other";
                    break;
                }
            }
        }
        ++out[key];
    }
    return out;
}

Rational success_rate(std::span<const RunRecord> records) {
    if (records.empty()) throw std::invalid_argument("success rate of an empty batch");
    std::int64_t ok = std::count_if(records.begin(), records.end(), [](const RunRecord& r) { return r.success; });
    return {ok, static_cast<std::int64_t>(records.size())};
}

namespace {

struct Totals {
    std::int64_t n_queries = 0, n_success = 0, n_pairs = 0;
    std::map<Dimension, DimensionStats> dims;
    std::map<std::string, std::int64_t> errors;
};

Totals aggregate(std::span<const RunRecord> records, std::span<const Dimension> dimensions) {
    Totals t;
    for (Dimension d : dimensions) t.dims[d];
    for (const RunRecord& r : records) {
        ++t.n_queries;
        if (r.success) ++t.n_success;
        t.n_pairs += static_cast<std::int64_t>(r.document.pairs().size());
        for (Dimension d : dimensions) {
            DimensionStats s = tally(r.document.evals, d);
            DimensionStats& acc = t.dims[d];
            acc.passed += s.passed;
            acc.failed += s.failed;
            acc.not_evaluated += s.not_evaluated;
            acc.rate_limited_passed += s.rate_limited_passed;
            acc.rate_limited_failed += s.rate_limited_failed;
        }
        for (const auto& [k, v] : error_breakdown(r.document.evals)) t.errors[k] += v;
    }
    return t;
}

json rational_json(Rational r) {
    if (!r.defined()) return nullptr;
    return json{{"num", r.num}, {"den", r.den}, {"rendered", render_percent(r)}};
}

json stats_json(const DimensionStats& s) {
    return json{{"passed", s.passed},
                {"failed", s.failed},
                {"not_evaluated", s.not_evaluated},
                {"rate_limited_passed", s.rate_limited_passed},
                {"rate_limited_failed", s.rate_limited_failed},
                {"pass_rate", rational_json(s.pass_rate())},
                {"pass_rate_all", rational_json(s.pass_rate_all())},
                {"adjusted_pass_rate", rational_json(s.adjusted_pass_rate())}};
}

DimensionStats stats_from(const json& j) {
    DimensionStats s;
    s.passed = j.at("passed").get<std::int64_t>();
    s.failed = j.at("failed").get<std::int64_t>();
    s.not_evaluated = j.at("not_evaluated").get<std::int64_t>();
    s.rate_limited_passed = j.value("rate_limited_passed", std::int64_t{0});
    s.rate_limited_failed = j.value("rate_limited_failed", std::int64_t{0});
    return s;
}

json dims_json(const std::map<Dimension, DimensionStats>& dims) {
    json out = json::object();
    for (const auto& [d, s] : dims) out[std::string(to_string(d))] = stats_json(s);
    return out;
}

std::map<Dimension, DimensionStats> dims_from(const json& j) {
    std::map<Dimension, DimensionStats> out;
    for (const auto& [name, v] : j.items()) {
        auto d = dimension_from_string(name);
        if (!d) throw std::runtime_error("unknown dimension '" + name + "' in report");
        out[*d] = stats_from(v);
    }
    return out;
}

std::string cell(const std::map<Dimension, DimensionStats>& dims, Dimension d) {
    auto it = dims.find(d);
    return it == dims.end() ? "-" : render_percent(it->second.pass_rate());
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_field(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out;
}

__extension__ using Wide = __int128;

}  // namespace

MetricsReport build_report(std::string label, std::span<const RunRecord> records,
                           std::span<const Dimension> dimensions) {
    Totals t = aggregate(records, dimensions);
    MetricsReport m;
    m.label = std::move(label);
    m.n_queries = t.n_queries;
    m.n_success = t.n_success;
    m.n_pairs = t.n_pairs;
    m.dimensions = std::move(t.dims);
    m.error_breakdown = std::move(t.errors);
    return m;
}

MetricsReport build_ablation_report(std::string label, const std::map<int, std::vector<RunRecord>>& by_budget,
                                    std::span<const Dimension> dimensions) {
    std::vector<RunRecord> all;
    for (const auto& [budget, records] : by_budget) all.insert(all.end(), records.begin(), records.end());
    MetricsReport m = build_report(std::move(label), all, dimensions);
    for (const auto& [budget, records] : by_budget) {
        Totals t = aggregate(records, dimensions);
        m.budgets.push_back({budget, t.n_queries, t.n_success, t.n_pairs, std::move(t.dims)});
    }
    std::sort(m.budgets.begin(), m.budgets.end(),
              [](const BudgetRow& a, const BudgetRow& b) { return a.budget < b.budget; });
    return m;
}

std::optional<ReportFormat> report_format_from_string(std::string_view s) noexcept {
    if (s == "json") return ReportFormat::json;
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    if (s == "csv") return ReportFormat::csv;
    return std::nullopt;
}

json to_json_value(const MetricsReport& m) {
    json errors = json::object();
    for (const auto& [k, v] : m.error_breakdown) errors[k] = v;
    json budgets = json::array();
    for (const BudgetRow& b : m.budgets)
        budgets.push_back({{"budget", b.budget},
                           {"n_queries", b.n_queries},
                           {"n_success", b.n_success},
                           {"n_pairs", b.n_pairs},
                           {"success_rate", rational_json({b.n_success, b.n_queries})},
                           {"dimensions", dims_json(b.dimensions)}});
    return json{{"label", m.label},
                {"n_queries", m.n_queries},
                {"n_success", m.n_success},
                {"n_pairs", m.n_pairs},
                {"success_rate", rational_json(m.success_rate())},
                {"dimensions", dims_json(m.dimensions)},
                {"error_breakdown", errors},
                {"budgets", budgets}};
}

MetricsReport report_from_json(const json& j) {
    MetricsReport m;
    m.label = j.at("label").get<std::string>();
    m.n_queries = j.at("n_queries").get<std::int64_t>();
    m.n_success = j.at("n_success").get<std::int64_t>();
    m.n_pairs = j.at("n_pairs").get<std::int64_t>();
    m.dimensions = dims_from(j.at("dimensions"));
    const json errors = j.value("error_breakdown", json::object());
    for (const auto& [k, v] : errors.items()) m.error_breakdown[k] = v.get<std::int64_t>();
    for (const auto& b : j.value("budgets", json::array()))
        m.budgets.push_back({b.at("budget").get<int>(), b.at("n_queries").get<std::int64_t>(),
                             b.at("n_success").get<std::int64_t>(), b.at("n_pairs").get<std::int64_t>(),
                             dims_from(b.at("dimensions"))});
    return m;
}

std::string render_reports(std::span<const MetricsReport> reports, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: {
            json arr = json::array();
            for (const auto& r : reports) arr.push_back(to_json_value(r));
            return arr.dump(2) + "\n";
        }
        case ReportFormat::markdown: {
            std::string out = "| Model | Success | Link Works | Relevant | Fact Check |\n";
            out += "|---|---|---|---|---|\n";
            for (const auto& r : reports)
                out += fmt::format("| {} | {} | {} | {} | {} |\n", md_field(r.label), render_percent(r.success_rate()),
                                   cell(r.dimensions, Dimension::link_works),
                                   cell(r.dimensions, Dimension::relevant_content),
                                   cell(r.dimensions, Dimension::fact_check));
            return out;
        }
        case ReportFormat::csv: {
            std::string out = "label,n_queries,n_success,success_rate,n_pairs";
            for (Dimension d : kAllDimensions)
                for (std::string_view col :
                     {"passed", "failed", "not_evaluated", "pass_rate", "pass_rate_all", "adjusted_pass_rate"})
                    out += fmt::format(",{}_{}", to_string(d), col);
            for (std::string_view k : kErrorKeys) out += fmt::format(",errors_{}", k);
            out += '\n';
            for (const auto& r : reports) {
                out += fmt::format("{},{},{},{},{}", csv_field(r.label), r.n_queries, r.n_success,
                                   render_percent(r.success_rate()), r.n_pairs);
                for (Dimension d : kAllDimensions) {
                    auto it = r.dimensions.find(d);
                    if (it == r.dimensions.end()) {
                        out += ",,,,,,";
                        continue;
                    }
                    const DimensionStats& s = it->second;
                    out += fmt::format(",{},{},{},{},{},{}", s.passed, s.failed, s.not_evaluated,
                                       render_percent(s.pass_rate()), render_percent(s.pass_rate_all()),
                                       render_percent(s.adjusted_pass_rate()));
                }
                for (std::string_view k : kErrorKeys) {
                    auto it = r.error_breakdown.find(std::string(k));
                    out += fmt::format(",{}", it == r.error_breakdown.end() ? 0 : it->second);
                }
                out += '\n';
            }
            return out;
        }
    }
    throw std::invalid_argument("unknown report format");
}

std::string render_report(const MetricsReport& report, ReportFormat format) {
    if (format == ReportFormat::json) return to_json_value(report).dump(2) + "\n";
    return render_reports(std::span<const MetricsReport>(&report, 1), format);
}

std::string render_ablation_markdown(const MetricsReport& m) {
    std::string out = "| Tool Calls | Link Works | Relevant | Fact Check |\n|---|---|---|---|\n";
    for (const BudgetRow& b : m.budgets)
        out += fmt::format("| {} | {} | {} | {} |\n", b.budget, cell(b.dimensions, Dimension::link_works),
                           cell(b.dimensions, Dimension::relevant_content), cell(b.dimensions, Dimension::fact_check));
    return out;
}

std::string render_ablation_csv(const MetricsReport& m) {
    std::string out = "budget,dimension,passed,failed,not_evaluated,rate\n";
    for (const BudgetRow& b : m.budgets)
        for (const auto& [d, s] : b.dimensions)
            out += fmt::format("{},{},{},{},{},{}\n", b.budget, to_string(d), s.passed, s.failed, s.not_evaluated,
                               render_percent(s.pass_rate()));
    return out;
}

void sort_by_relevance(std::vector<MetricsReport>& reports) {
    auto key = [](const MetricsReport& r) -> std::optional<Rational> {
        auto it = r.dimensions.find(Dimension::relevant_content);
        if (it == r.dimensions.end() || !it->second.pass_rate().defined()) return std::nullopt;
        return it->second.pass_rate();
    };
    std::stable_sort(reports.begin(), reports.end(), [&](const MetricsReport& a, const MetricsReport& b) {
        auto ka = key(a), kb = key(b);
        if (ka.has_value() != kb.has_value()) return ka.has_value();
        if (ka) {
            // Cross-multiplication compares exactly; denominators are positive.
            Wide lhs = static_cast<Wide>(ka->num) * kb->den;
            Wide rhs = static_cast<Wide>(kb->num) * ka->den;
            if (lhs != rhs) return lhs > rhs;
        }
        return a.label < b.label;
    });
}

}  // namespace citecheck
