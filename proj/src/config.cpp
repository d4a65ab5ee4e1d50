#include "foresight/config.hpp"

#include "foresight/error.hpp"
#include "foresight/http_gateway.hpp"
#include "foresight/jsonl.hpp"
#include "foresight/mock_gateway.hpp"

#include <cstdlib>
#include <map>
#include <set>

namespace foresight {

namespace {

constexpr std::string_view kAppSchema = "foresight.config";
constexpr std::string_view kRunSchema = "foresight.run_config";

// Reads one JSON object strictly: every key must be consumed, and every value
// must have the expected type. Errors name the dotted key path.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    std::optional<T> get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return std::nullopt;
        return convert<T>(*it, key);
    }

    template <class T>
    T get_or(const std::string& key, T fallback) {
        auto v = get<T>(key);
        return v ? *v : fallback;
    }

    template <class T>
    T require(const std::string& key) {
        auto v = get<T>(key);
        if (!v) throw ConfigError("missing config key: " + dotted(key));
        return *v;
    }

    std::optional<Section> section(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return std::nullopt;
        return Section(*it, dotted(key));
    }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown config key: " + dotted(it.key()));
        }
    }

    std::string dotted(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    template <class T>
    T convert(const json& v, const std::string& key) const {
        const auto bad = [&](const char* what) { return ConfigError(dotted(key) + ": expected " + what); };
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw bad("a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw bad("an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return v.get<T>();
                if (v.get<long long>() < 0) throw bad("a non-negative integer");
            }
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw bad("a number");
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw bad("a string");
            return v.get<std::string>();
        } else {
            static_assert(std::is_same_v<T, std::vector<std::string>>);
            if (!v.is_array()) throw bad("an array of strings");
            std::vector<std::string> out;
            for (const auto& e : v) {
                if (!e.is_string()) throw bad("an array of strings");
                out.push_back(e.get<std::string>());
            }
            return out;
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
auto enum_value(const std::string& path, const std::string& value, F parse) {
    try {
        return parse(value);
    } catch (const Error&) {
        throw ConfigError(path + ": unknown value \"" + value + "\"");
    }
}

void read_pipeline(Section s, RunConfig& c) {
    c.m_agents = s.get_or("m_agents", c.m_agents);
    c.max_search_stages = s.get_or("max_search_stages", c.max_search_stages);
    if (auto v = s.get<std::string>("search_mode")) {
        c.search_mode = enum_value(s.dotted("search_mode"), *v, search_mode_from_string);
    }
    c.nonagentic_queries = s.get_or("nonagentic_queries", c.nonagentic_queries);
    c.max_results_per_search = s.get_or("max_results_per_search", c.max_results_per_search);
    if (auto v = s.get<std::string>("supervisor")) {
        c.supervisor = enum_value(s.dotted("supervisor"), *v, supervisor_kind_from_string);
    }
    c.supervisor_query_cap = s.get_or("supervisor_query_cap", c.supervisor_query_cap);
    if (auto v = s.get<std::string>("aggregation")) {
        c.aggregation = enum_value(s.dotted("aggregation"), *v, aggregation_method_from_string);
    }
    c.include_market_price = s.get_or("include_market_price", c.include_market_price);
    c.max_in_flight = s.get_or("max_in_flight", c.max_in_flight);
    s.finish();
}

void read_generation(Section s, GenerationSettings& g) {
    g.model = s.get_or("model", g.model);
    g.temperature = s.get_or("temperature", g.temperature);
    g.max_output_tokens = s.get_or("max_output_tokens", g.max_output_tokens);
    s.finish();
}

void read_calibration(Section s, CalibrationMap& m) {
    json doc = json::object();
    const std::string method = s.get_or<std::string>("method", "platt");
    doc["method"] = method;
    doc["alpha"] = s.get_or("alpha", method == "platt" ? kDefaultExtremization : 1.0);
    doc["gamma"] = s.get_or("gamma", 0.0);
    if (const json* k = s.raw("knots")) doc["knots"] = *k;
    if (const json* l = s.raw("linear")) doc["linear"] = *l;
    s.finish();
    try {
        m = doc.get<CalibrationMap>();
    } catch (const Error& e) {
        throw ConfigError(std::string("calibration: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("calibration: ") + e.what());
    }
}

DomainBlocklist read_blocklist_file(const std::filesystem::path& path, const std::string& key) {
    if (!std::filesystem::exists(path)) throw ConfigError(key + ": file not found: " + path.string());
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    Section s(doc, key);
    DomainBlocklist bl;
    bl.blocked_domains = s.get_or("domains", std::vector<std::string>{});
    bl.blocked_urls = s.get_or("urls", std::vector<std::string>{});
    s.finish();
    return bl;
}

// `base_dir` is null for run snapshots, where files have already been expanded.
void read_blocklists(Section s, RunConfig& c, const std::filesystem::path* base_dir) {
    c.builtin_blocklists = s.get_or("builtin", c.builtin_blocklists);
    c.extra_blocklist.blocked_domains = s.get_or("domains", std::vector<std::string>{});
    c.extra_blocklist.blocked_urls = s.get_or("urls", std::vector<std::string>{});
    if (base_dir != nullptr) {
        for (const auto& f : s.get_or("files", std::vector<std::string>{})) {
            c.extra_blocklist.merge(read_blocklist_file(*base_dir / f, s.dotted("files")));
        }
    }
    s.finish();
}

void read_retry(Section s, RetryPolicy& r) {
    r.attempts = s.get_or("attempts", r.attempts);
    r.base_delay = std::chrono::milliseconds(s.get_or<long>("base_delay_ms", r.base_delay.count()));
    r.backoff = s.get_or("backoff", r.backoff);
    s.finish();
    if (r.attempts < 1) throw ConfigError("retry.attempts must be >= 1");
    if (r.base_delay.count() < 0) throw ConfigError("retry.base_delay_ms must be >= 0");
    if (r.backoff < 1.0) throw ConfigError("retry.backoff must be >= 1");
}

// The run-level sections shared by the application config and the snapshot.
void read_run_sections(Section& top, RunConfig& c, const std::filesystem::path* base_dir) {
    c.seed = top.get_or<std::uint64_t>("seed", c.seed);
    if (auto s = top.section("pipeline")) read_pipeline(*s, c);
    if (auto s = top.section("generation")) read_generation(*s, c.generation);
    if (auto s = top.section("calibration")) read_calibration(*s, c.calibration);
    if (auto s = top.section("blocklists")) read_blocklists(*s, c, base_dir);
    if (auto s = top.section("retry")) read_retry(*s, c.retry);
}

void check_schema(Section& top, std::string_view expected) {
    const auto schema = top.require<std::string>("schema");
    if (schema != expected) {
        throw ConfigError("schema: expected \"" + std::string(expected) + "\", found \"" + schema + "\"");
    }
    const auto version = top.require<int>("version");
    if (version != kSchemaVersion) throw ConfigError("version: unsupported version " + std::to_string(version));
}

std::string read_asset(const std::filesystem::path& base_dir, const std::string& rel, const std::string& key) {
    const auto path = base_dir / rel;
    if (!std::filesystem::exists(path)) throw ConfigError(key + ": file not found: " + path.string());
    return read_text_file(path);
}

GatewaySpec read_gateway(Section s) {
    GatewaySpec g;
    const auto type = s.require<std::string>("type");
    if (type == "mock") {
        g.type = GatewaySpec::Type::mock;
    } else if (type == "http") {
        g.type = GatewaySpec::Type::http;
    } else {
        throw ConfigError(s.dotted("type") + ": unknown value \"" + type + "\"");
    }
    g.script = s.get_or<std::string>("script", "");
    g.base_url = s.get_or<std::string>("base_url", "");
    g.api_key_env = s.get_or<std::string>("api_key_env", "");
    g.timeout_s = s.get_or("timeout_s", g.timeout_s);
    g.limits.max_concurrency = s.get_or("max_concurrency", g.limits.max_concurrency);
    g.limits.request_budget = s.get_or("request_budget", g.limits.request_budget);
    s.finish();
    if (g.type == GatewaySpec::Type::mock && g.script.empty()) throw ConfigError("missing config key: " + s.dotted("script"));
    if (g.type == GatewaySpec::Type::http && g.base_url.empty()) {
        throw ConfigError("missing config key: " + s.dotted("base_url"));
    }
    if (g.limits.max_concurrency < 1) throw ConfigError(s.dotted("max_concurrency") + " must be >= 1");
    return g;
}

}  // namespace

json config_to_json(const RunConfig& c) {
    json j;
    j["schema"] = kRunSchema;
    j["version"] = kSchemaVersion;
    j["seed"] = c.seed;
    j["pipeline"] = {{"m_agents", c.m_agents},
                     {"max_search_stages", c.max_search_stages},
                     {"search_mode", to_string(c.search_mode)},
                     {"nonagentic_queries", c.nonagentic_queries},
                     {"max_results_per_search", c.max_results_per_search},
                     {"supervisor", to_string(c.supervisor)},
                     {"supervisor_query_cap", c.supervisor_query_cap},
                     {"aggregation", to_string(c.aggregation)},
                     {"include_market_price", c.include_market_price},
                     {"max_in_flight", c.max_in_flight}};
    j["generation"] = {{"model", c.generation.model},
                       {"temperature", c.generation.temperature},
                       {"max_output_tokens", c.generation.max_output_tokens}};
    j["calibration"] = c.calibration;
    j["blocklists"] = {{"builtin", c.builtin_blocklists},
                       {"domains", c.extra_blocklist.blocked_domains},
                       {"urls", c.extra_blocklist.blocked_urls}};
    j["retry"] = {{"attempts", c.retry.attempts},
                  {"base_delay_ms", c.retry.base_delay.count()},
                  {"backoff", c.retry.backoff}};
    return j;
}

RunConfig config_from_json(const json& j) {
    Section top(j, "");
    check_schema(top, kRunSchema);
    RunConfig c;
    read_run_sections(top, c, nullptr);
    top.finish();
    return c;
}

AppConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    Section top(doc, "");
    check_schema(top, kAppSchema);
    AppConfig cfg;
    cfg.base_dir = base_dir;
    read_run_sections(top, cfg.run, &base_dir);
    cfg.output_dir = top.get_or<std::string>("output_dir", cfg.output_dir);
    if (auto gws = top.section("gateways")) {
        if (auto s = gws->section("generation")) cfg.generation = read_gateway(*s);
        if (auto s = gws->section("search")) cfg.search = read_gateway(*s);
        if (auto s = gws->section("judge")) cfg.judge = read_gateway(*s);
        gws->finish();
    }
    if (auto s = top.section("judge")) {
        cfg.judge_options.model_name = s->get_or("model_name", cfg.judge_options.model_name);
        if (auto t = s->get<std::string>("template")) {
            cfg.judge_options.template_text = read_asset(base_dir, *t, "judge.template");
        }
        s->finish();
    }
    cfg.judge_options.retry = cfg.run.retry;
    if (auto s = top.section("integrity")) {
        cfg.worst_case_threshold = s->get_or("threshold", cfg.worst_case_threshold);
        s->finish();
        if (cfg.worst_case_threshold < 1) throw ConfigError("integrity.threshold must be >= 1");
    }
    if (auto s = top.section("scoring")) {
        cfg.n_resamples = s->get_or("n_resamples", cfg.n_resamples);
        s->finish();
        if (cfg.n_resamples < 1) throw ConfigError("scoring.n_resamples must be >= 1");
    }
    if (auto s = top.section("bench")) {
        cfg.market_filter.min_contracts = s->get_or("min_contracts", cfg.market_filter.min_contracts);
        cfg.market_filter.min_open_days = s->get_or("min_open_days", cfg.market_filter.min_open_days);
        cfg.market_filter.category_allowlist = s->get_or("categories", cfg.market_filter.category_allowlist);
        cfg.live_sample_size = s->get_or("live_sample_size", cfg.live_sample_size);
        if (auto t = s->get<std::string>("reword_template")) cfg.reword_template = read_asset(base_dir, *t, "bench.reword_template");
        s->finish();
    }
    top.finish();
    return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    auto cfg = parse_config(doc, path.parent_path());
    cfg.run.validate(cfg.search.has_value());
    return cfg;
}

Gateways build_gateways(const AppConfig& cfg) {
    std::map<std::string, std::shared_ptr<MockScript>> scripts;
    auto script_for = [&](const GatewaySpec& g) {
        if (!std::filesystem::exists(cfg.base_dir / g.script)) {
            throw ConfigError("gateway script not found: " + (cfg.base_dir / g.script).string());
        }
        const auto path = std::filesystem::weakly_canonical(cfg.base_dir / g.script);
        auto& s = scripts[path.string()];
        if (!s) s = MockScript::load(path);
        return s;
    };
    auto endpoint = [&](const GatewaySpec& g, const std::string& name) {
        HttpEndpoint ep{g.base_url, {}, std::chrono::seconds(g.timeout_s)};
        if (!g.api_key_env.empty()) {
            const char* key = std::getenv(g.api_key_env.c_str());
            if (key == nullptr) {
                throw ConfigError("gateways." + name + ".api_key_env: environment variable " + g.api_key_env + " is not set");
            }
            ep.api_key = key;
        }
        return ep;
    };
    auto generation = [&](const GatewaySpec& g, const std::string& name) -> std::shared_ptr<GenerationGateway> {
        std::shared_ptr<GenerationGateway> inner;
        if (g.type == GatewaySpec::Type::mock) {
            inner = std::make_shared<MockGenerationGateway>(script_for(g));
        } else {
            inner = std::make_shared<HttpGenerationGateway>(endpoint(g, name));
        }
        return std::make_shared<LimitedGenerationGateway>(inner, g.limits);
    };
    Gateways gw;
    if (cfg.generation) gw.generation = generation(*cfg.generation, "generation");
    if (cfg.judge) gw.judge = generation(*cfg.judge, "judge");
    if (cfg.search) {
        std::shared_ptr<SearchGateway> inner;
        if (cfg.search->type == GatewaySpec::Type::mock) {
            inner = std::make_shared<MockSearchGateway>(script_for(*cfg.search));
        } else {
            inner = std::make_shared<HttpSearchGateway>(endpoint(*cfg.search, "search"));
        }
        gw.search = std::make_shared<LimitedSearchGateway>(inner, cfg.search->limits);
    }
    return gw;
}

}  // namespace foresight
