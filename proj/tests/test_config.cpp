#include "foresight/config.hpp"
#include "foresight/jsonl.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>

using namespace foresight;

namespace {

json minimal() { return json{{"schema", "foresight.config"}, {"version", 1}}; }

std::string error_of(const json& doc, const std::filesystem::path& base = {}) {
    try {
        parse_config(doc, base);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("defaults from a minimal document") {
    const auto cfg = parse_config(minimal());
    CHECK(cfg.run.m_agents == 10);
    CHECK(cfg.run.max_search_stages == 8);
    CHECK(cfg.run.supervisor == SupervisorKind::none);
    CHECK(cfg.run.aggregation == AggregationMethod::mean);
    CHECK(cfg.run.calibration.method == CalibrationMethod::platt);
    CHECK(cfg.run.calibration.alpha == doctest::Approx(std::sqrt(3.0)));
    CHECK(cfg.run.calibration.gamma == 0.0);
    CHECK_FALSE(cfg.run.include_market_price);
    CHECK(cfg.worst_case_threshold == 5);
    CHECK(cfg.market_filter.min_contracts == 5000);
    CHECK(cfg.live_sample_size == 250);
    CHECK_FALSE(cfg.generation);
}

TEST_CASE("full document") {
    auto doc = minimal();
    doc["seed"] = 99;
    doc["pipeline"] = {{"m_agents", 4}, {"supervisor", "best_of_k"}, {"aggregation", "median"}, {"include_market_price", true}};
    doc["generation"] = {{"model", "m1"}, {"temperature", 0.2}};
    doc["calibration"] = {{"method", "platt"}, {"alpha", 2.0}, {"gamma", -0.1}};
    doc["blocklists"] = {{"builtin", {"leakage", "markets"}}, {"domains", {"example.com"}}};
    doc["retry"] = {{"attempts", 5}, {"base_delay_ms", 10}, {"backoff", 1.5}};
    doc["integrity"] = {{"threshold", 3}};
    doc["scoring"] = {{"n_resamples", 2000}};
    doc["bench"] = {{"min_contracts", 100}, {"categories", {"sports"}}};
    doc["gateways"] = {{"generation", {{"type", "http"}, {"base_url", "http://127.0.0.1:9"}, {"max_concurrency", 2}}}};
    const auto cfg = parse_config(doc);
    CHECK(cfg.run.seed == 99);
    CHECK(cfg.run.m_agents == 4);
    CHECK(cfg.run.supervisor == SupervisorKind::best_of_k);
    CHECK(cfg.run.aggregation == AggregationMethod::median);
    CHECK(cfg.run.include_market_price);
    CHECK(cfg.run.generation.model == "m1");
    CHECK(cfg.run.calibration == CalibrationMap::platt(2.0, -0.1));
    CHECK(cfg.run.effective_blocklist().blocks("https://sub.example.com/x"));
    CHECK(cfg.run.effective_blocklist().blocks("https://kalshi.com/x"));
    CHECK(cfg.run.retry.attempts == 5);
    CHECK(cfg.worst_case_threshold == 3);
    CHECK(cfg.n_resamples == 2000);
    CHECK(cfg.market_filter.min_contracts == 100);
    CHECK(cfg.market_filter.category_allowlist == std::vector<std::string>{"sports"});
    REQUIRE(cfg.generation);
    CHECK(cfg.generation->type == GatewaySpec::Type::http);
    CHECK(cfg.generation->limits.max_concurrency == 2);
    // The run snapshot round-trips.
    const auto back = config_from_json(config_to_json(cfg.run));
    CHECK(config_to_json(back) == config_to_json(cfg.run));
}

TEST_CASE("errors name the offending key") {
    auto doc = minimal();
    doc["pipeline"] = {{"m_agnets", 3}};
    CHECK(error_of(doc) == "unknown config key: pipeline.m_agnets");

    doc = minimal();
    doc["colour"] = "red";
    CHECK(error_of(doc) == "unknown config key: colour");

    doc = minimal();
    doc["pipeline"] = {{"m_agents", "ten"}};
    CHECK(error_of(doc) == "pipeline.m_agents: expected an integer");

    doc = minimal();
    doc["pipeline"] = {{"supervisor", "oracle"}};
    CHECK(error_of(doc).find("pipeline.supervisor") == 0);

    doc = minimal();
    doc["gateways"] = {{"search", {{"type", "mock"}}}};
    CHECK(error_of(doc) == "missing config key: gateways.search.script");

    doc = minimal();
    doc["gateways"] = {{"search", {{"type", "carrier-pigeon"}}}};
    CHECK(error_of(doc).find("gateways.search.type") == 0);

    doc = minimal();
    doc.erase("schema");
    CHECK(error_of(doc) == "missing config key: schema");

    doc = minimal();
    doc["retry"] = {{"attempts", 0}};
    CHECK(error_of(doc).find("retry.attempts") == 0);

    doc = minimal();
    doc["integrity"] = {{"threshold", 0}};
    CHECK(error_of(doc).find("integrity.threshold") == 0);

    doc = minimal();
    doc["calibration"] = {{"method", "isotonic"}};
    CHECK(error_of(doc).find("calibration") == 0);

    doc = minimal();
    doc["judge"] = {{"template", "no/such/file.txt"}};
    CHECK(error_of(doc).find("judge.template") == 0);
}

TEST_CASE("run snapshot rejects unknown keys and the wrong schema") {
    auto j = config_to_json(RunConfig{});
    j["pipeline"]["extra"] = 1;
    CHECK_THROWS_WITH_AS(config_from_json(j), "unknown config key: pipeline.extra", ConfigError);
    auto k = config_to_json(RunConfig{});
    k["schema"] = "foresight.config";
    CHECK_THROWS_AS(config_from_json(k), ConfigError);
    auto files = config_to_json(RunConfig{});
    files["blocklists"]["files"] = json::array({"x.json"});
    CHECK_THROWS_AS(config_from_json(files), ConfigError);
}

TEST_CASE("load_config validates and resolves assets relative to the file") {
    testing::TempDir tmp;
    write_text_file(tmp / "judge.txt", "{question} {probability:.2f}");
    write_text_file(tmp / "extra.json", R"({"domains": ["leaky.example"], "urls": ["https://x.org/page"]})");
    auto doc = minimal();
    doc["judge"] = {{"template", "judge.txt"}, {"model_name", "judge-model"}};
    doc["blocklists"] = {{"files", {"extra.json"}}};
    doc["gateways"] = {{"generation", {{"type", "mock"}, {"script", "script.jsonl"}}}};
    doc["pipeline"] = {{"search_mode", "none"}};
    write_text_file(tmp / "config.json", doc.dump(2));
    const auto cfg = load_config(tmp / "config.json");
    CHECK(cfg.judge_options.template_text == "{question} {probability:.2f}");
    CHECK(cfg.judge_options.model_name == "judge-model");
    CHECK(cfg.run.effective_blocklist().blocks("https://a.leaky.example/"));
    CHECK(cfg.run.effective_blocklist().blocks("https://x.org/page"));
    // The missing script surfaces when gateways are built.
    CHECK_THROWS_AS(build_gateways(cfg), ConfigError);
    write_text_file(tmp / "script.jsonl", schema_line(schema::mock_script) + "\n");
    const auto gw = build_gateways(cfg);
    CHECK(gw.generation);
    CHECK_FALSE(gw.search);

    // Searching without a search gateway is invalid.
    doc["pipeline"] = {{"search_mode", "agentic"}};
    write_text_file(tmp / "config.json", doc.dump(2));
    CHECK_THROWS_WITH_AS(load_config(tmp / "config.json"), doctest::Contains("gateways.search"), ConfigError);

    write_text_file(tmp / "bad.json", "{ not json");
    CHECK_THROWS_AS(load_config(tmp / "bad.json"), ConfigError);
    CHECK_THROWS_AS(load_config(tmp / "absent.json"), ConfigError);
    doc = minimal();
    doc["blocklists"] = {{"files", {"nowhere.json"}}};
    CHECK(error_of(doc, tmp.path()).find("blocklists.files") == 0);
}

TEST_CASE("shipped blocklist files load through the config") {
    auto doc = minimal();
    doc["blocklists"] = {{"builtin", json::array()}, {"files", {"blocklists/leakage.json", "blocklists/market.json"}}};
    doc["pipeline"] = {{"include_market_price", true}};
    const auto cfg = parse_config(doc, std::filesystem::path(FORESIGHT_SOURCE_DIR) / "assets");
    const auto bl = cfg.run.effective_blocklist();
    CHECK(bl.blocks("https://en.wikipedia.org/wiki/Viswanathan_Anand"));
    CHECK(bl.blocks("https://www.predictit.org/markets"));
}

TEST_CASE("mock gateways sharing a script share replay state") {
    testing::TempDir tmp;
    write_text_file(tmp / "script.jsonl", schema_line(schema::mock_script) + "\n" +
                                              R"({"kind":"generate","response":"once"})" + "\n" +
                                              R"({"kind":"search","results":[]})" + "\n");
    auto doc = minimal();
    doc["gateways"] = {{"generation", {{"type", "mock"}, {"script", "script.jsonl"}}},
                       {"judge", {{"type", "mock"}, {"script", "./script.jsonl"}, {"request_budget", 5}}},
                       {"search", {{"type", "mock"}, {"script", "script.jsonl"}}}};
    write_text_file(tmp / "config.json", doc.dump());
    const auto gw = build_gateways(load_config(tmp / "config.json"));
    CHECK(gw.generation->generate({}).text == "once");
    CHECK_THROWS_AS(gw.judge->generate({}), ScriptMiss);
    CHECK(gw.search->search({}).items.empty());
}

TEST_CASE("http credentials come from the environment") {
    auto doc = minimal();
    doc["gateways"] = {{"generation", {{"type", "http"}, {"base_url", "http://127.0.0.1:1"}, {"api_key_env", "FORESIGHT_TEST_UNSET_KEY"}}}};
    ::unsetenv("FORESIGHT_TEST_UNSET_KEY");
    const auto cfg = parse_config(doc);
    CHECK_THROWS_WITH_AS(build_gateways(cfg), doctest::Contains("FORESIGHT_TEST_UNSET_KEY"), ConfigError);
    ::setenv("FORESIGHT_TEST_UNSET_KEY", "k", 1);
    CHECK(build_gateways(cfg).generation);
    ::unsetenv("FORESIGHT_TEST_UNSET_KEY");
}
