#include "foresight/mock_gateway.hpp"

#include "foresight/jsonl.hpp"

#include <set>

namespace foresight {

namespace {

std::regex compile(const std::string& src, const std::string& where) {
    try {
        return std::regex(src, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw DataError(where + ": bad regex \"" + src + "\": " + e.what());
    }
}

MockRecord parse_record(const json& j, const std::string& where, int line) {
    static const std::set<std::string> known{"kind", "scope", "pattern", "response", "results",
                                             "latency_ms", "error", "repeat"};
    if (!j.is_object()) throw DataError(where + ": record is not an object");
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw DataError(where + ": unknown key \"" + k + "\"");
    }
    MockRecord r;
    r.line = line;
    const auto kind = j.value("kind", std::string());
    if (kind == "generate") {
        r.kind = MockRecord::Kind::generate;
    } else if (kind == "search") {
        r.kind = MockRecord::Kind::search;
    } else {
        throw DataError(where + ": kind must be \"generate\" or \"search\"");
    }
    if (j.contains("scope")) {
        r.scope_src = j["scope"].get<std::string>();
        r.scope = compile(r.scope_src, where);
    }
    if (j.contains("pattern")) {
        r.pattern_src = j["pattern"].get<std::string>();
        r.pattern = compile(r.pattern_src, where);
    }
    r.latency_ms = j.value("latency_ms", 0L);
    r.repeat = j.value("repeat", false);
    const auto err = j.value("error", std::string());
    if (err == "transient") {
        r.failure = MockRecord::Failure::transient;
    } else if (err == "fatal") {
        r.failure = MockRecord::Failure::fatal;
    } else if (!err.empty()) {
        throw DataError(where + ": error must be \"transient\" or \"fatal\"");
    }
    if (r.failure == MockRecord::Failure::none) {
        if (r.kind == MockRecord::Kind::generate) {
            if (!j.contains("response") || !j["response"].is_string()) {
                throw DataError(where + ": generate record needs a string \"response\"");
            }
            r.response = j["response"].get<std::string>();
        } else {
            if (!j.contains("results") || !j["results"].is_array()) {
                throw DataError(where + ": search record needs a \"results\" array");
            }
            for (const auto& res : j["results"]) {
                EvidenceItem e;
                e.snippet = res.at("snippet").get<std::string>();
                e.source_url = res.at("url").get<std::string>();
                if (res.contains("published_date") && !res["published_date"].is_null()) {
                    e.published_date = Date::parse(res["published_date"].get<std::string>());
                }
                e.retrieved_at = res.value("retrieved_at", std::string());
                std::optional<Date> cutoff;
                if (res.contains("date_cutoff")) cutoff = Date::parse(res["date_cutoff"].get<std::string>());
                r.results.push_back(std::move(e));
                r.result_cutoffs.push_back(cutoff);
            }
        }
    }
    return r;
}

}  // namespace

std::shared_ptr<MockScript> MockScript::parse(std::string_view text, const std::string& origin) {
    auto script = std::make_shared<MockScript>();
    int n = 0;
    for (const auto& j : parse_jsonl(text, schema::mock_script, origin)) {
        ++n;
        try {
            script->records_.push_back(parse_record(j, origin + " record " + std::to_string(n), n));
        } catch (const json::exception& e) {
            throw DataError(origin + " record " + std::to_string(n) + ": " + e.what());
        }
    }
    script->consumed_.assign(script->records_.size(), false);
    return script;
}

std::shared_ptr<MockScript> MockScript::load(const std::filesystem::path& path) {
    return parse(read_text_file(path), path.string());
}

std::shared_ptr<MockScript> MockScript::combine(const std::vector<std::shared_ptr<MockScript>>& parts) {
    auto script = std::make_shared<MockScript>();
    for (const auto& p : parts) {
        std::lock_guard lock(p->mu_);
        script->records_.insert(script->records_.end(), p->records_.begin(), p->records_.end());
    }
    script->consumed_.assign(script->records_.size(), false);
    return script;
}

const MockRecord& MockScript::match(MockRecord::Kind kind, const std::string& tag, const std::string& text) {
    calls_.push_back({kind, tag, text});
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.kind != kind || (consumed_[i] && !r.repeat)) continue;
        if (r.scope && !std::regex_search(tag, *r.scope)) continue;
        if (r.pattern && !std::regex_search(text, *r.pattern)) continue;
        if (!r.repeat) consumed_[i] = true;
        return r;
    }
    std::string excerpt = text.substr(0, 160);
    throw ScriptMiss(std::string("scripted mock has no ") + (kind == MockRecord::Kind::generate ? "generate" : "search") +
                     " record for tag \"" + tag + "\": " + excerpt);
}

GenerationResponse MockScript::generate(const GenerationRequest& request) {
    std::lock_guard lock(mu_);
    const auto& r = match(MockRecord::Kind::generate, request.tag, request.prompt);
    if (r.failure == MockRecord::Failure::transient) throw GatewayError("scripted transient failure", true);
    if (r.failure == MockRecord::Failure::fatal) throw GatewayError("scripted fatal failure", false);
    GenerationResponse resp;
    resp.text = r.response;
    resp.latency_ms = r.latency_ms;
    resp.prompt_tokens = static_cast<int>(request.prompt.size() / 4);
    resp.completion_tokens = static_cast<int>(r.response.size() / 4);
    return resp;
}

SearchResult MockScript::search(const SearchRequest& request) {
    std::lock_guard lock(mu_);
    const auto& r = match(MockRecord::Kind::search, request.tag, request.query);
    if (r.failure == MockRecord::Failure::transient) throw GatewayError("scripted transient failure", true);
    if (r.failure == MockRecord::Failure::fatal) throw GatewayError("scripted fatal failure", false);
    SearchResult out;
    out.latency_ms = r.latency_ms;
    for (std::size_t i = 0; i < r.results.size() && static_cast<int>(i) < request.max_results; ++i) {
        EvidenceItem e = r.results[i];
        e.date_cutoff = r.result_cutoffs[i].value_or(request.date_cutoff);
        e.query = request.query;
        out.items.push_back(std::move(e));
    }
    return out;
}

std::vector<MockCall> MockScript::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::size_t MockScript::unconsumed() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (!consumed_[i] && !records_[i].repeat) ++n;
    }
    return n;
}

Gateways ScriptedGateways::gateways() const { return Gateways{generation, search, nullptr}; }

namespace {
ScriptedGateways wrap(std::shared_ptr<MockScript> s) {
    return ScriptedGateways{s, std::make_shared<MockGenerationGateway>(s), std::make_shared<MockSearchGateway>(s)};
}
}  // namespace

ScriptedGateways mock_script_load(const std::filesystem::path& path) { return wrap(MockScript::load(path)); }
ScriptedGateways mock_script_from_text(std::string_view text) { return wrap(MockScript::parse(text)); }

}  // namespace foresight
