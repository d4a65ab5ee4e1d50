#pragma once

#include "foresight/domain.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace foresight {

// Line-delimited JSON files. The first line is a schema tag
// {"schema":"<name>","version":1}; every following non-empty line is one record.
inline constexpr int kSchemaVersion = 1;

namespace schema {
inline constexpr std::string_view questions = "foresight.questions";
inline constexpr std::string_view forecasts = "foresight.forecasts";
inline constexpr std::string_view progress = "foresight.progress";
inline constexpr std::string_view markets = "foresight.markets";
inline constexpr std::string_view flags = "foresight.flags";
inline constexpr std::string_view mock_script = "foresight.mock_script";
inline constexpr std::string_view pairs = "foresight.calibration_pairs";
}  // namespace schema

std::string schema_line(std::string_view name);

// Serialises records one per line after the schema tag.
std::string dump_jsonl(std::string_view schema_name, const std::vector<json>& records);

// Parses a document produced by dump_jsonl. Throws DataError naming the line.
std::vector<json> parse_jsonl(std::string_view text, std::string_view schema_name,
                              const std::string& origin = "<memory>");

std::vector<json> read_jsonl(const std::filesystem::path& path, std::string_view schema_name);
void write_jsonl(const std::filesystem::path& path, std::string_view schema_name,
                 const std::vector<json>& records);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename, so readers never see a torn file.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::vector<ValidatedQuestion> load_questions(const std::filesystem::path& path);
void save_questions(const std::filesystem::path& path, const std::vector<Question>& questions);

}  // namespace foresight
