#include "foresight/jsonl.hpp"

#include "foresight/error.hpp"

#include <fstream>
#include <sstream>

namespace foresight {

std::string schema_line(std::string_view name) {
    return json{{"schema", std::string(name)}, {"version", kSchemaVersion}}.dump();
}

std::string dump_jsonl(std::string_view schema_name, const std::vector<json>& records) {
    std::string out = schema_line(schema_name);
    out += '\n';
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

std::vector<json> parse_jsonl(std::string_view text, std::string_view schema_name, const std::string& origin) {
    std::vector<json> out;
    std::size_t pos = 0;
    int line_no = 0;
    bool saw_schema = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!saw_schema) {
            saw_schema = true;
            if (!j.is_object() || j.value("schema", std::string()) != schema_name) {
                throw DataError(origin + ":" + std::to_string(line_no) + ": expected schema tag \"" +
                                std::string(schema_name) + "\"");
            }
            if (j.value("version", 0) != kSchemaVersion) {
                throw DataError(origin + ": unsupported schema version");
            }
            continue;
        }
        out.push_back(std::move(j));
    }
    if (!saw_schema) throw DataError(origin + ": missing schema tag line");
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::vector<json> read_jsonl(const std::filesystem::path& path, std::string_view schema_name) {
    return parse_jsonl(read_text_file(path), schema_name, path.string());
}

void write_jsonl(const std::filesystem::path& path, std::string_view schema_name, const std::vector<json>& records) {
    write_text_file(path, dump_jsonl(schema_name, records));
}

std::vector<ValidatedQuestion> load_questions(const std::filesystem::path& path) {
    std::vector<ValidatedQuestion> out;
    int n = 0;
    for (const auto& j : read_jsonl(path, schema::questions)) {
        ++n;
        try {
            out.push_back(validate_question(j.get<Question>()));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ": record " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void save_questions(const std::filesystem::path& path, const std::vector<Question>& questions) {
    std::vector<json> records;
    records.reserve(questions.size());
    for (const auto& q : questions) records.emplace_back(q);
    write_jsonl(path, schema::questions, records);
}

}  // namespace foresight
