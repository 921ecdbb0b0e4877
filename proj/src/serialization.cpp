#include "citecheck/serialization.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace citecheck {

using nlohmann::json;

namespace {

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_optional(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

template <class E, class Parse>
E parse_enum(const json& j, Parse parse, const char* what) {
    auto s = j.get<std::string>();
    if (auto v = parse(s)) return *v;
    throw std::runtime_error(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

void to_json(json& j, const Span& s) { j = json::array({s.begin, s.end}); }

void from_json(const json& j, Span& s) {
    if (!j.is_array() || j.size() != 2) throw std::runtime_error("span must be a [start, end) pair");
    s.begin = j[0].get<std::size_t>();
    s.end = j[1].get<std::size_t>();
}

void to_json(json& j, const Diagnostic& d) {
    j = json{{"code", d.code}, {"message", d.message}};
    if (d.span) j["span"] = *d.span;
}

void from_json(const json& j, Diagnostic& d) {
    d.code = j.at("code").get<std::string>();
    d.message = j.at("message").get<std::string>();
    d.span = get_optional<Span>(j, "span");
}

// Content lives on the Citation as url_content, so it is not repeated here.
void to_json(json& j, const FetchOutcome& o) {
    j = json{{"category", to_string(o.category)},
             {"attempts", o.attempts},
             {"elapsed_ms", o.elapsed_ms},
             {"final_url", o.final_url},
             {"detail", o.detail}};
    put_optional(j, "http_status", o.http_status);
    json flags = json::array();
    for (ContentFlag f : o.flags) flags.push_back(to_string(f));
    j["flags"] = flags;
}

void from_json(const json& j, FetchOutcome& o) {
    o.category = parse_enum<FetchCategory>(j.at("category"), fetch_category_from_string, "fetch category");
    o.attempts = j.at("attempts").get<int>();
    o.elapsed_ms = j.value("elapsed_ms", std::int64_t{0});
    o.final_url = j.value("final_url", std::string{});
    o.detail = j.value("detail", std::string{});
    o.http_status = get_optional<int>(j, "http_status");
    o.flags.clear();
    for (const auto& f : j.value("flags", json::array()))
        o.flags.insert(parse_enum<ContentFlag>(f, content_flag_from_string, "content flag"));
    o.content.reset();
}

void to_json(json& j, const Citation& c) {
    j = json{{"id", c.id}, {"url", c.url}, {"raw_labels", c.raw_labels}};
    put_optional(j, "url_content", c.url_content);
    put_optional(j, "fetch_outcome", c.fetch_outcome);
}

void from_json(const json& j, Citation& c) {
    c.id = j.at("id").get<int>();
    c.url = j.at("url").get<std::string>();
    c.raw_labels = j.at("raw_labels").get<std::vector<std::string>>();
    c.url_content = get_optional<std::string>(j, "url_content");
    c.fetch_outcome = get_optional<FetchOutcome>(j, "fetch_outcome");
    if (c.fetch_outcome && c.fetch_outcome->category == FetchCategory::ok)
        c.fetch_outcome->content = c.url_content.value_or(std::string{});
}

void to_json(json& j, const Attribution& a) {
    j = json{{"id", a.id},
             {"text_nocite", a.text_nocite},
             {"span", a.span},
             {"citation_ids", a.citation_ids},
             {"passage_id", a.passage_id}};
}

void from_json(const json& j, Attribution& a) {
    a.id = j.at("id").get<int>();
    a.text_nocite = j.at("text_nocite").get<std::string>();
    a.span = j.at("span").get<Span>();
    a.citation_ids = j.at("citation_ids").get<std::vector<int>>();
    a.passage_id = j.at("passage_id").get<int>();
}

void to_json(json& j, const EvalResult& e) {
    j = json{{"attribution_id", e.attribution_id},
             {"citation_id", e.citation_id},
             {"dimension", to_string(e.dimension)},
             {"explanation", e.explanation},
             {"judge_attempts", e.judge_attempts}};
    put_optional(j, "score", e.score);
    json flags = json::array();
    for (EvalFlag f : e.flags) flags.push_back(to_string(f));
    j["flags"] = flags;
    j["fetch_category"] = e.fetch_category ? json(to_string(*e.fetch_category)) : json(nullptr);
    put_optional(j, "http_status", e.http_status);
}

void from_json(const json& j, EvalResult& e) {
    e.attribution_id = j.at("attribution_id").get<int>();
    e.citation_id = j.at("citation_id").get<int>();
    e.dimension = parse_enum<Dimension>(j.at("dimension"), dimension_from_string, "dimension");
    e.explanation = j.value("explanation", std::string{});
    e.judge_attempts = j.value("judge_attempts", 0);
    e.score = get_optional<int>(j, "score");
    e.flags.clear();
    for (const auto& f : j.value("flags", json::array()))
        e.flags.insert(parse_enum<EvalFlag>(f, eval_flag_from_string, "eval flag"));
    e.fetch_category.reset();
    if (auto it = j.find("fetch_category"); it != j.end() && !it->is_null())
        e.fetch_category = parse_enum<FetchCategory>(*it, fetch_category_from_string, "fetch category");
    e.http_status = get_optional<int>(j, "http_status");
}

void to_json(json& j, const AttributionDocument& d) {
    j = json{{"schema", kDocumentSchemaVersion},
             {"citations", d.citations},
             {"attributions", d.attributions},
             {"evals", d.evals},
             {"diagnostics", d.diagnostics},
             {"source",
              {{"origin", d.source.origin},
               {"raw_text", d.source.raw_text},
               {"canonical_text", d.source.canonical_text}}}};
}

void from_json(const json& j, AttributionDocument& d) {
    int schema = j.at("schema").get<int>();
    if (schema != kDocumentSchemaVersion)
        throw std::runtime_error("unsupported document schema " + std::to_string(schema));
    d.citations = j.at("citations").get<std::vector<Citation>>();
    d.attributions = j.at("attributions").get<std::vector<Attribution>>();
    d.evals = j.at("evals").get<std::vector<EvalResult>>();
    d.diagnostics = j.value("diagnostics", json::array()).get<std::vector<Diagnostic>>();
    const json& src = j.at("source");
    d.source.origin = src.value("origin", std::string{});
    d.source.raw_text = src.value("raw_text", std::string{});
    d.source.canonical_text = src.value("canonical_text", std::string{});
}

std::string document_to_json(const AttributionDocument& doc) {
    // Replacement on invalid UTF-8 keeps serialization total for odd inputs.
    return json(doc).dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

AttributionDocument document_from_json(std::string_view text) {
    try {
        return json::parse(text).get<AttributionDocument>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed document JSON: ") + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace citecheck
