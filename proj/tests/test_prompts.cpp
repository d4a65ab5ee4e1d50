#include "foresight/jsonl.hpp"
#include "foresight/prompts.hpp"
#include "foresight/providers.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace foresight;
using namespace foresight::prompts;

namespace {
std::string asset(const std::string& rel) { return std::string(FORESIGHT_SOURCE_DIR) + "/assets/" + rel; }
}  // namespace

TEST_CASE("fill_template substitutes and formats") {
    CHECK(fill_template("a {x} b {y:.2f} c", {{"x", std::string("X")}, {"y", 0.456}}) == "a X b 0.46 c");
    CHECK(fill_template("{p:.4f}", {{"p", 0.98}}) == "0.9800");
    CHECK(fill_template("{n}", {{"n", 0.5}}) == "0.5");
    CHECK(fill_template("{x}{x}", {{"x", std::string("ab")}}) == "abab");
    // Non-placeholder braces pass through, as in a JSON example block.
    CHECK(fill_template("{\n  \"k\": [1, 2]\n} {}", {}) == "{\n  \"k\": [1, 2]\n} {}");
    CHECK_THROWS_AS(fill_template("{missing}", {}), DataError);
    CHECK_THROWS_AS(fill_template("{x:.2f}", {{"x", std::string("text")}}), DataError);
}

TEST_CASE("judge template fills every placeholder") {
    const auto out = fill_template(judge_template(), {{"question", std::string("Will it rain?")},
                                                      {"news_end_date", std::string("2024-07-01")},
                                                      {"resolution_date", std::string("2024-07-31")},
                                                      {"resolution", std::string("YES")},
                                                      {"model_name", std::string("model-x")},
                                                      {"probability", 0.97},
                                                      {"model_output", std::string("trace")}});
    CHECK(out.find("QUESTION: Will it rain?") != std::string::npos);
    CHECK(out.find("0.9700 (very confident)") != std::string::npos);
    CHECK(out.find("cutoff is 2024-07-01, whereas the resolution date is 2024-07-31") != std::string::npos);
    CHECK(out.find("\"has_foreknowledge\": boolean") != std::string::npos);
    CHECK(out.find("{question}") == std::string::npos);
    const auto reword = fill_template(reword_template(), {{"title", std::string("T")}, {"rules", std::string("R")}});
    CHECK(reword.find("Title: T\nRules: R\n") != std::string::npos);
}

TEST_CASE("shipped prompt assets match the built-in templates") {
    CHECK(read_text_file(asset("prompts/judge_prompt.txt")) == judge_template());
    CHECK(read_text_file(asset("prompts/reword_prompt.txt")) == reword_template());
    CHECK(load_template("", judge_template()) == judge_template());
    CHECK(load_template(asset("prompts/reword_prompt.txt"), "other") == reword_template());
}

TEST_CASE("shipped blocklist assets match the built-in lists") {
    const auto leak = json::parse(read_text_file(asset("blocklists/leakage.json")));
    CHECK(leak.at("urls").get<std::vector<std::string>>() == leakage_blocklist().blocked_urls);
    const auto market = json::parse(read_text_file(asset("blocklists/market.json")));
    CHECK(market.at("domains").get<std::vector<std::string>>() == market_blocklist().blocked_domains);
}

TEST_CASE("agent action parsing") {
    auto a = parse_agent_action("Thinking...\nSEARCH: fed rate decision july 2024\n");
    CHECK(a.kind == AgentAction::Kind::search);
    CHECK(a.query == "fed rate decision july 2024");
    a = parse_agent_action("SEARCH: more\nFINAL: 0.35");
    CHECK(a.kind == AgentAction::Kind::final_answer);
    CHECK(a.probability == doctest::Approx(0.35));
    a = parse_agent_action("final: 1");
    CHECK(a.kind == AgentAction::Kind::final_answer);
    CHECK(a.probability == 1.0);
    CHECK(parse_agent_action("FINAL: 1.2").kind == AgentAction::Kind::invalid);
    CHECK(parse_agent_action("FINAL: 40%").kind == AgentAction::Kind::invalid);
    CHECK(parse_agent_action("SEARCH:   ").kind == AgentAction::Kind::invalid);
    CHECK(parse_agent_action("The FINAL: 0.3 answer").kind == AgentAction::Kind::invalid);
    CHECK(parse_final_line("FINAL: 0.2\nFINAL: 0.7") == 0.7);
    CHECK_FALSE(parse_final_line("nothing").has_value());
}

TEST_CASE("revision and disagreement parsing") {
    auto r = parse_revision("Some reasoning\nREVISED: 0.62\nCONFIDENCE: High\n");
    REQUIRE(r);
    CHECK(r->revised == doctest::Approx(0.62));
    CHECK(r->confidence == Confidence::high);
    CHECK_FALSE(parse_revision("REVISED: 0.62"));
    CHECK_FALSE(parse_revision("REVISED: 2\nCONFIDENCE: low"));
    CHECK_FALSE(parse_revision("REVISED: 0.5\nCONFIDENCE: certain"));

    const auto d = parse_disagreement("They disagree on the base rate.\nQUERY: a\nQUERY: b\nQUERY: c\n", 2);
    CHECK(d.summary == "They disagree on the base rate.");
    CHECK(d.queries == std::vector<std::string>{"a", "b"});
    CHECK(parse_disagreement("QUERY: a", 0).queries.empty());
}

TEST_CASE("agent prompt shows the market price only when enabled") {
    auto q = testing::question("q1", 1.0, 0.73);
    std::vector<EvidenceItem> ev{EvidenceItem{"rates", "Fed holds", "https://news.org/a", Date(2024, 6, 12), "", Date(2024, 7, 1), 2}};
    AgentContext ctx{&q, false, &ev, 2};
    const auto hidden = agent_prompt(ctx);
    CHECK(hidden.find("0.7300") == std::string::npos);
    CHECK(hidden.find("MARKET") == std::string::npos);
    CHECK(hidden.find("https://news.org/a") != std::string::npos);
    CHECK(hidden.find("published: 2024-06-12") != std::string::npos);
    CHECK(hidden.find("up to 2 more searches") != std::string::npos);
    ctx.include_market_price = true;
    ctx.searches_remaining = 0;
    const auto shown = agent_prompt(ctx);
    CHECK(shown.find("CURRENT PREDICTION MARKET PRICE: 0.7300") != std::string::npos);
    CHECK(shown.find("No searches remain") != std::string::npos);
}

TEST_CASE("supervisor prompts list every forecast") {
    auto q = testing::question("q1");
    std::vector<ForecastRecord> recs(3);
    const double ps[] = {0.2, 0.5, 0.8};
    for (int i = 0; i < 3; ++i) {
        recs[i].question_id = "q1";
        recs[i].agent_index = i + 1;
        recs[i].probability = Probability(ps[i]);
        recs[i].trace.steps = {"step of agent " + std::to_string(i + 1)};
    }
    SupervisorInput in{&q, &recs, Probability(0.5), 3};
    for (const auto& p : {supervisor_disagreement_prompt(in), best_of_k_prompt(in), nonagentic_supervisor_prompt(in)}) {
        CHECK(p.find("Forecaster 1: 0.2000") != std::string::npos);
        CHECK(p.find("Forecaster 3: 0.8000") != std::string::npos);
        CHECK(p.find("step of agent 2") != std::string::npos);
    }
    CHECK(supervisor_disagreement_prompt(in).find("up to 3 search queries") != std::string::npos);
    const auto rev = supervisor_revision_prompt(in, "summary text", {});
    CHECK(rev.find("summary text") != std::string::npos);
    CHECK(rev.find("(none)") != std::string::npos);
    CHECK(rev.find("step of agent") == std::string::npos);
}
