#include "foresight/http_gateway.hpp"

#include <httplib.h>

#include <chrono>
#include <ctime>

namespace foresight {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

SplitUrl split(const std::string& base) {
    if (base.rfind("http://", 0) != 0) {
        throw ConfigError("gateway base_url must start with http:// (got \"" + base + "\")");
    }
    const auto slash = base.find('/', 7);
    SplitUrl s;
    s.origin = base.substr(0, slash);
    s.prefix = slash == std::string::npos ? "" : base.substr(slash);
    while (!s.prefix.empty() && s.prefix.back() == '/') s.prefix.pop_back();
    return s;
}

json post(const HttpEndpoint& ep, const std::string& route, const json& body, long& latency_ms) {
    const auto url = split(ep.base_url);
    httplib::Client cli(url.origin);
    cli.set_connection_timeout(ep.timeout);
    cli.set_read_timeout(ep.timeout);
    cli.set_write_timeout(ep.timeout);
    httplib::Headers headers;
    if (!ep.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep.api_key);

    const auto start = std::chrono::steady_clock::now();
    auto res = cli.Post(url.prefix + route, headers, body.dump(), "application/json");
    latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    if (!res) {
        throw GatewayError("connection to " + url.origin + " failed: " + httplib::to_string(res.error()), true);
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
        throw GatewayError(route + " returned HTTP " + std::to_string(res->status), true);
    }
    if (res->status != 200) {
        throw GatewayError(route + " returned HTTP " + std::to_string(res->status) + ": " + res->body, false);
    }
    try {
        return json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw GatewayError(route + " returned malformed JSON: " + e.what(), false);
    }
}

std::string utc_now_iso() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

GenerationResponse HttpGenerationGateway::generate(const GenerationRequest& request) {
    json body{{"model", request.model},
              {"system", request.system},
              {"prompt", request.prompt},
              {"temperature", request.temperature},
              {"max_output_tokens", request.max_output_tokens},
              {"seed", request.seed}};
    GenerationResponse out;
    const json j = post(endpoint_, "/generate", body, out.latency_ms);
    if (!j.contains("text") || !j["text"].is_string()) {
        throw GatewayError("/generate response has no \"text\" string", false);
    }
    out.text = j["text"].get<std::string>();
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        out.prompt_tokens = u->value("prompt_tokens", 0);
        out.completion_tokens = u->value("completion_tokens", 0);
    }
    return out;
}

SearchResult HttpSearchGateway::search(const SearchRequest& request) {
    json body{{"query", request.query}, {"date_cutoff", request.date_cutoff.iso()}, {"max_results", request.max_results}};
    SearchResult out;
    const json j = post(endpoint_, "/search", body, out.latency_ms);
    if (!j.contains("results") || !j["results"].is_array()) {
        throw GatewayError("/search response has no \"results\" array", false);
    }
    const auto retrieved = utc_now_iso();
    for (const auto& r : j["results"]) {
        EvidenceItem e;
        e.query = request.query;
        e.snippet = r.value("snippet", std::string());
        e.source_url = r.value("url", std::string());
        if (auto d = r.find("published_date"); d != r.end() && d->is_string()) {
            try {
                e.published_date = Date::parse(d->get<std::string>());
            } catch (const DataError&) {
                // Unparseable dates are kept and treated as undated.
            }
        }
        e.retrieved_at = retrieved;
        e.date_cutoff = request.date_cutoff;
        out.items.push_back(std::move(e));
    }
    return out;
}

}  // namespace foresight
