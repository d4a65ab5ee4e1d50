#include "foresight/date.hpp"
#include "foresight/domain.hpp"
#include "foresight/error.hpp"
#include "foresight/jsonl.hpp"
#include "foresight/probability.hpp"
#include "foresight/rng.hpp"
#include "foresight/stats.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

using namespace foresight;

TEST_CASE("probability rejects values outside the unit interval") {
    CHECK_THROWS_AS(Probability(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(Probability(1.0000001), std::invalid_argument);
    CHECK_THROWS_AS(Probability(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK(Probability(0.0).value() == 0.0);
    CHECK(Probability(1.0).value() == 1.0);
    CHECK(Probability(0.3).complement().value() == doctest::Approx(0.7));
    CHECK(Probability().value() == 0.5);
}

TEST_CASE("clamping keeps log-odds finite") {
    CHECK(clamp_probability(0.0).value() == kDefaultClampEpsilon);
    CHECK(clamp_probability(1.0).value() == 1.0 - kDefaultClampEpsilon);
    CHECK(clamp_probability(0.4).value() == 0.4);
    CHECK(std::isfinite(logit(clamp_probability(1.0))));
    CHECK_THROWS_AS(clamp_probability(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("logit and sigmoid are inverse") {
    for (double p : {0.001, 0.2, 0.5, 0.77, 0.999}) CHECK(sigmoid(logit(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("quantization rounds to six decimals") {
    CHECK(quantize_probability(0.6686944499898309) == 0.668694);
    CHECK(quantize_probability(0.1234565) == doctest::Approx(0.123457).epsilon(1e-12));
    CHECK(quantize_probability(quantize_probability(0.3333333333)) == quantize_probability(0.3333333333));
}

TEST_CASE("dates parse, print and count days") {
    const Date d = Date::parse("2024-07-01");
    CHECK(d.iso() == "2024-07-01");
    CHECK(days_between(d, Date(2024, 12, 31)) == 183);
    CHECK(d.plus_days(31).iso() == "2024-08-01");
    CHECK(Date(2024, 3, 1).minus_days(1).iso() == "2024-02-29");
    CHECK(Date::parse("2024-07-01T23:30:00-02:00").iso() == "2024-07-02");
    CHECK(Date::parse("2024-07-01T00:30:00+01:00").iso() == "2024-06-30");
    CHECK(Date::parse("2024-07-01T12:00:00Z").iso() == "2024-07-01");
    CHECK(Date::parse("2024-07-01T12:00:00.123Z").iso() == "2024-07-01");
    CHECK_THROWS_AS(Date::parse("2024-13-01"), DataError);
    CHECK_THROWS_AS(Date::parse("2024/07/01"), DataError);
    CHECK_THROWS_AS(Date::parse("2024-07-01T12:00:00PST"), DataError);
    CHECK(Date(2024, 1, 1) < Date(2024, 1, 2));
}

TEST_CASE("question validation") {
    CHECK_NOTHROW(validate_question(testing::question("q1")));
    auto q = testing::question("q1");
    q.knowledge_cutoff = Date(2025, 1, 2);
    CHECK_THROWS_AS(validate_question(q), DataError);
    q = testing::question("");
    CHECK_THROWS_AS(validate_question(q), DataError);
    q = testing::question("q2");
    q.text = "   ";
    CHECK_THROWS_AS(validate_question(q), DataError);
    q = testing::question("q3", 0.5);
    CHECK_THROWS_AS(validate_question(q), DataError);
    CHECK(testing::question("q4", 0.0).outcome_bit() == 0);
    CHECK_THROWS_AS(testing::question("q5", std::nullopt).outcome_bit(), DataError);
    // Cutoff on the resolution date itself is allowed.
    q = testing::question("q6");
    q.knowledge_cutoff = q.resolution_date;
    CHECK_NOTHROW(validate_question(q));
}

TEST_CASE("forecast records must keep evidence attached to reasoning") {
    ForecastRecord r;
    r.question_id = "q1";
    r.agent_index = 1;
    r.probability = Probability(0.4);
    EvidenceItem e;
    e.snippet = "s";
    e.source_url = "https://example.com/a";
    r.evidence.push_back(e);
    CHECK_THROWS_AS(check_forecast_record(r), DataError);
    r.trace.steps = {"I read https://example.com/a", "FINAL: 0.4"};
    CHECK_NOTHROW(check_forecast_record(r));
    r.trace.cited_passages.push_back({"other", "https://example.com/missing"});
    CHECK_THROWS_AS(check_forecast_record(r), DataError);
    r.trace.cited_passages.clear();
    r.evidence.push_back(e);
    r.evidence[0].stage_index = 2;
    r.evidence[1].stage_index = 1;
    CHECK_THROWS_AS(check_forecast_record(r), DataError);
    r.agent_index = 0;
    CHECK_THROWS_AS(check_forecast_record(r), DataError);
}

TEST_CASE("domain types round-trip through JSON") {
    auto q = testing::question("q1", 1.0, 0.42);
    q.category = "economics";
    q.source = QuestionSource::market;
    CHECK(json(q).get<Question>() == q);

    FinalForecast f;
    f.question_id = "q1";
    ForecastRecord r;
    r.question_id = "q1";
    r.agent_index = 3;
    r.probability = Probability(0.25);
    r.trace.steps = {"see https://a.example/x", "FINAL: 0.25"};
    r.trace.cited_passages = {{"snippet", "https://a.example/x"}};
    EvidenceItem e;
    e.query = "q";
    e.snippet = "snippet";
    e.source_url = "https://a.example/x";
    e.published_date = Date(2024, 6, 1);
    e.date_cutoff = Date(2024, 7, 1);
    e.retrieved_at = "2024-07-01T00:00:00Z";
    r.evidence = {e};
    f.individual = {r};
    f.failed_agents = 1;
    f.aggregate_raw = Probability(0.25);
    f.supervisor = SupervisorOutput{"summary", {"a query"}, Probability(0.3), Confidence::medium};
    f.merged = Probability(0.25);
    f.final_probability = Probability(0.2);
    f.calibration = CalibrationMap::platt(1.7320508075688772, 0.1);
    f.audit.items = 1;
    f.latency_ms = 17;
    CHECK(json(f).get<FinalForecast>() == f);

    CalibrationMap iso;
    iso.method = CalibrationMethod::isotonic;
    iso.knots = {{0.1, 0.0}, {0.5, 0.5}, {0.9, 1.0}};
    CHECK(json(iso).get<CalibrationMap>() == iso);
    CalibrationMap lin;
    lin.method = CalibrationMethod::linear;
    lin.linear_coeffs = std::make_pair(0.1, 0.8);
    CHECK(json(lin).get<CalibrationMap>() == lin);
}

TEST_CASE("persisted probabilities carry six decimals") {
    FinalForecast f;
    f.question_id = "q";
    f.final_probability = Probability(0.6686944499898309);
    const auto back = json(f).get<FinalForecast>();
    CHECK(back.final_probability->value() == 0.668694);
    CHECK(quantized(f) == back);
}

TEST_CASE("line-delimited files carry a schema tag") {
    const std::vector<json> rows{json{{"a", 1}}, json{{"a", 2}}};
    const auto text = dump_jsonl(schema::questions, rows);
    CHECK(text.rfind("{\"schema\":\"foresight.questions\",\"version\":1}\n", 0) == 0);
    CHECK(parse_jsonl(text, schema::questions) == rows);
    CHECK_THROWS_AS(parse_jsonl(text, schema::forecasts), DataError);
    CHECK_THROWS_AS(parse_jsonl("{\"a\":1}\n", schema::questions), DataError);
    CHECK_THROWS_AS(parse_jsonl("", schema::questions), DataError);
    CHECK_THROWS_WITH_AS(parse_jsonl(text + "{oops\n", schema::questions, "f.jsonl"),
                         doctest::Contains("f.jsonl:4"), DataError);
    CHECK_THROWS_AS(parse_jsonl("{\"schema\":\"foresight.questions\",\"version\":2}\n", schema::questions), DataError);
}

TEST_CASE("question files round-trip and validate on load") {
    testing::TempDir dir;
    const std::vector<Question> qs{testing::question("a"), testing::question("b", 0.0, 0.3)};
    save_questions(dir / "q.jsonl", qs);
    const auto loaded = load_questions(dir / "q.jsonl");
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[1].get() == qs[1]);
    write_text_file(dir / "bad.jsonl", dump_jsonl(schema::questions, {json(testing::question("x", 0.5))}));
    CHECK_THROWS_AS(load_questions(dir / "bad.jsonl"), DataError);
    CHECK_THROWS_AS(read_text_file(dir / "missing"), DataError);
}

TEST_CASE("rng reproduces the standard engine and is seed-stable") {
    // The 10000th output of a default-constructed mt19937_64 is fixed by the standard.
    Rng rng(5489u);
    for (int i = 0; i < 9999; ++i) rng.next();
    CHECK(rng.next() == 9981545732273789042ULL);

    Rng a(7), b(7), c(8);
    std::vector<std::uint64_t> xa, xb, xc;
    for (int i = 0; i < 16; ++i) {
        xa.push_back(a.next());
        xb.push_back(b.next());
        xc.push_back(c.next());
    }
    CHECK(xa == xb);
    CHECK(xa != xc);
    CHECK(derive_seed(1, std::uint64_t{0}) != derive_seed(1, std::uint64_t{1}));
    CHECK(derive_seed(1, "q1/agent/1") == derive_seed(1, "q1/agent/1"));
    CHECK(derive_seed(1, "q1/agent/1") != derive_seed(1, "q1/agent/2"));
}

TEST_CASE("rng distributions stay in range and are roughly uniform") {
    Rng rng(123);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto k = rng.uniform_index(7);
        REQUIRE(k < 7);
        ++counts[k];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sq / n - 1.0) < 0.03);
    CHECK_THROWS_AS(rng.uniform_index(0), std::invalid_argument);
}

TEST_CASE("descriptive statistics") {
    const std::vector<double> odd{3, 1, 2};
    const std::vector<double> even{4, 1, 3, 2};
    CHECK(stats::mean(odd) == 2.0);
    CHECK(stats::median(odd) == 2.0);
    CHECK(stats::median(even) == 2.5);
    // Values from the linear-interpolation definition: h = q (n - 1).
    CHECK(stats::percentile(even, 0.25) == doctest::Approx(1.75));
    CHECK(stats::percentile(even, 0.0) == 1.0);
    CHECK(stats::percentile(even, 1.0) == 4.0);
    CHECK(stats::percentile(std::vector<double>{5.0}, 0.975) == 5.0);
    CHECK_THROWS_AS(stats::mean(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(stats::percentile(odd, 1.5), std::invalid_argument);
}
