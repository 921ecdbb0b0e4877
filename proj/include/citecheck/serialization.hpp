#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "citecheck/types.hpp"

namespace citecheck {

inline constexpr int kDocumentSchemaVersion = 1;

void to_json(nlohmann::json& j, const Span& s);
void from_json(const nlohmann::json& j, Span& s);
void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);
void to_json(nlohmann::json& j, const FetchOutcome& o);
void from_json(const nlohmann::json& j, FetchOutcome& o);
void to_json(nlohmann::json& j, const Citation& c);
void from_json(const nlohmann::json& j, Citation& c);
void to_json(nlohmann::json& j, const Attribution& a);
void from_json(const nlohmann::json& j, Attribution& a);
void to_json(nlohmann::json& j, const EvalResult& e);
void from_json(const nlohmann::json& j, EvalResult& e);
void to_json(nlohmann::json& j, const AttributionDocument& d);
void from_json(const nlohmann::json& j, AttributionDocument& d);

/// Canonical rendering: sorted keys, two-space indent, trailing newline.
/// Equal documents always produce identical bytes.
std::string document_to_json(const AttributionDocument& doc);

/// Throws std::runtime_error on malformed JSON or an unknown schema version.
AttributionDocument document_from_json(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial output.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace citecheck
