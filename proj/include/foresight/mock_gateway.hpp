#pragma once

#include "foresight/providers.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace foresight {

// One scripted (request pattern -> response) pair.
//
// Script lines look like
//   {"kind":"generate","scope":"^q1/agent/1$","pattern":"FINAL","response":"FINAL: 0.62"}
//   {"kind":"search","pattern":"base rate","results":[{"snippet":"...","url":"..."}]}
//   {"kind":"generate","scope":"judge","error":"transient"}
// `scope` is matched against the request tag and `pattern` against the prompt
// or query, both as regex searches; absent means match anything. A record is
// consumed by its first match unless "repeat" is true.
struct MockRecord {
    enum class Kind { generate, search };
    enum class Failure { none, transient, fatal };

    Kind kind = Kind::generate;
    std::string scope_src;
    std::string pattern_src;
    std::optional<std::regex> scope;
    std::optional<std::regex> pattern;
    std::string response;
    std::vector<EvidenceItem> results;
    std::vector<std::optional<Date>> result_cutoffs;  // set: overrides the echoed cutoff
    long latency_ms = 0;
    Failure failure = Failure::none;
    bool repeat = false;
    int line = 0;
};

struct MockCall {
    MockRecord::Kind kind;
    std::string tag;
    std::string text;  // prompt or query
};

// Replay state shared by the generation and search facades.
class MockScript {
public:
    static std::shared_ptr<MockScript> parse(std::string_view text, const std::string& origin = "<memory>");
    static std::shared_ptr<MockScript> load(const std::filesystem::path& path);
    // Concatenates several scripts; earlier scripts take precedence.
    static std::shared_ptr<MockScript> combine(const std::vector<std::shared_ptr<MockScript>>& parts);

    GenerationResponse generate(const GenerationRequest& request);
    SearchResult search(const SearchRequest& request);

    std::vector<MockCall> calls() const;
    std::size_t unconsumed() const;

private:
    const MockRecord& match(MockRecord::Kind kind, const std::string& tag, const std::string& text);

    mutable std::mutex mu_;
    std::vector<MockRecord> records_;
    std::vector<bool> consumed_;
    std::vector<MockCall> calls_;
};

class MockGenerationGateway final : public GenerationGateway {
public:
    explicit MockGenerationGateway(std::shared_ptr<MockScript> script) : script_(std::move(script)) {}
    GenerationResponse generate(const GenerationRequest& request) override { return script_->generate(request); }

private:
    std::shared_ptr<MockScript> script_;
};

class MockSearchGateway final : public SearchGateway {
public:
    explicit MockSearchGateway(std::shared_ptr<MockScript> script) : script_(std::move(script)) {}
    SearchResult search(const SearchRequest& request) override { return script_->search(request); }

private:
    std::shared_ptr<MockScript> script_;
};

struct ScriptedGateways {
    std::shared_ptr<MockScript> script;
    std::shared_ptr<MockGenerationGateway> generation;
    std::shared_ptr<MockSearchGateway> search;

    Gateways gateways() const;
};

ScriptedGateways mock_script_load(const std::filesystem::path& path);
ScriptedGateways mock_script_from_text(std::string_view text);

}  // namespace foresight
