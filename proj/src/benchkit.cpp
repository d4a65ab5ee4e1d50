#include "foresight/benchkit.hpp"

#include "foresight/error.hpp"
#include "foresight/prompts.hpp"
#include "foresight/rng.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

namespace foresight {

void check_market(const MarketRecord& m) {
    if (m.market_id.empty()) throw DataError("market has an empty market_id");
    if (!(m.open_time < m.close_time)) throw DataError("market " + m.market_id + ": open_time must precede close_time");
    if (m.total_contracts < 0) throw DataError("market " + m.market_id + ": total_contracts is negative");
    if (m.outcome && *m.outcome != 0 && *m.outcome != 1) throw DataError("market " + m.market_id + ": outcome must be 0 or 1");
    for (std::size_t i = 1; i < m.price_history.size(); ++i) {
        if (m.price_history[i].date < m.price_history[i - 1].date) {
            throw DataError("market " + m.market_id + ": price_history is not in date order");
        }
    }
}

void to_json(json& j, const MarketRecord& m) {
    json history = json::array();
    for (const auto& p : m.price_history) history.push_back({{"date", p.date}, {"price", p.price}});
    j = json{{"market_id", m.market_id},
             {"title", m.title},
             {"rules", m.rules},
             {"open_time", m.open_time},
             {"close_time", m.close_time},
             {"total_contracts", m.total_contracts},
             {"price_history", history},
             {"category", m.category}};
    if (m.resolution_time) j["resolution_time"] = *m.resolution_time;
    if (m.outcome) j["outcome"] = *m.outcome;
}

void from_json(const json& j, MarketRecord& m) {
    m.market_id = j.at("market_id").get<std::string>();
    m.title = j.at("title").get<std::string>();
    m.rules = j.value("rules", std::string{});
    m.open_time = j.at("open_time").get<Date>();
    m.close_time = j.at("close_time").get<Date>();
    m.resolution_time.reset();
    if (j.contains("resolution_time") && !j["resolution_time"].is_null()) m.resolution_time = j["resolution_time"].get<Date>();
    m.total_contracts = j.at("total_contracts").get<long>();
    m.price_history.clear();
    for (const auto& p : j.value("price_history", json::array())) {
        m.price_history.push_back({p.at("date").get<Date>(), p.at("price").get<Probability>()});
    }
    m.category = j.value("category", std::string{});
    m.outcome.reset();
    if (j.contains("outcome") && !j["outcome"].is_null()) m.outcome = j["outcome"].get<int>();
    check_market(m);
}

namespace {

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool category_allowed(const std::string& category, const std::vector<std::string>& allow) {
    if (allow.empty()) return true;
    const std::string c = lower(category);
    std::size_t start = 0;
    while (start <= c.size()) {
        auto end = c.find('/', start);
        if (end == std::string::npos) end = c.size();
        std::string token = c.substr(start, end - start);
        token.erase(0, token.find_first_not_of(' '));
        token.erase(token.find_last_not_of(' ') + 1);
        for (const auto& a : allow) {
            if (token == lower(a)) return true;
        }
        start = end + 1;
    }
    return false;
}

bool passes(const MarketRecord& m, const MarketFilter& f) {
    return m.total_contracts >= f.min_contracts && days_between(m.open_time, m.close_time) >= f.min_open_days &&
           category_allowed(m.category, f.category_allowlist);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

std::vector<MarketRecord> filter_markets(const std::vector<MarketRecord>& records, const MarketFilter& filter) {
    std::vector<MarketRecord> out;
    for (const auto& m : records) {
        if (passes(m, filter)) out.push_back(m);
    }
    return out;
}

std::optional<std::vector<int>> cutoff_schedule_for_span(long diff) {
    if (diff > 91) return std::vector<int>{1, 7, 30, 60, 90};
    if (diff > 30) return std::vector<int>{1, 7, 14, 21, static_cast<int>(diff)};
    if (diff > 7) return std::vector<int>{1, 3, 5, 7, static_cast<int>(diff)};
    return std::nullopt;
}

std::optional<std::vector<int>> cutoff_schedule(Date open_time, Date close_time) {
    if (!(open_time < close_time)) throw std::invalid_argument("cutoff_schedule: close_time must follow open_time");
    return cutoff_schedule_for_span(days_between(open_time, close_time));
}

std::optional<Probability> price_at(const std::vector<PricePoint>& history, Date date) {
    auto it = std::upper_bound(history.begin(), history.end(), date,
                               [](Date d, const PricePoint& p) { return d < p.date; });
    if (it == history.begin()) return std::nullopt;
    return std::prev(it)->price;
}

std::vector<Question> generate_questions(const MarketRecord& market, const std::string& reworded_text) {
    check_market(market);
    const auto schedule = cutoff_schedule(market.open_time, market.close_time);
    if (!schedule) return {};
    const Date anchor = market.resolution_time && *market.resolution_time <= market.close_time
                            ? *market.resolution_time
                            : market.close_time;
    std::vector<Question> out;
    for (int days : *schedule) {
        Question q;
        q.id = market.market_id + "-d" + std::to_string(days);
        q.text = reworded_text;
        q.knowledge_cutoff = anchor.minus_days(days);
        q.resolution_date = market.close_time;
        if (market.outcome) q.outcome = static_cast<double>(*market.outcome);
        q.market_price = price_at(market.price_history, q.knowledge_cutoff);
        q.source = QuestionSource::market;
        q.category = market.category;
        out.push_back(validate_question(std::move(q)).get());
    }
    return out;
}

bool is_clean_question(const std::string& text) {
    const std::string t = trim(text);
    if (t.size() < 2 || t.back() != '?') return false;
    if (t.find('\n') != std::string::npos || t.find('\r') != std::string::npos) return false;
    if (t.find('?') != t.size() - 1) return false;
    // A sentence break: ". " or "! " after a lower-case letter or digit, then a capital.
    for (std::size_t i = 1; i + 2 < t.size(); ++i) {
        if ((t[i] == '.' || t[i] == '!') && t[i + 1] == ' ' &&
            (std::islower(static_cast<unsigned char>(t[i - 1])) || std::isdigit(static_cast<unsigned char>(t[i - 1]))) &&
            std::isupper(static_cast<unsigned char>(t[i + 2]))) {
            return false;
        }
    }
    return true;
}

RewordResult reword_question(const std::string& title, const std::string& rules, GenerationGateway& gateway,
                             const RetryPolicy& retry, const std::string& tmpl, const std::string& tag) {
    if (trim(title).empty() || trim(rules).empty()) throw std::invalid_argument("reword_question: title and rules are required");
    std::string prompt = prompts::fill_template(tmpl.empty() ? prompts::reword_template() : std::string_view(tmpl),
                                                {{"title", title}, {"rules", rules}});
    RewordResult out;
    const std::string base = tag.empty() ? "reword" : tag;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        GenerationRequest req;
        req.prompt = prompt;
        req.temperature = 0.0;
        req.tag = base + "/" + std::to_string(attempt);
        req.seed = derive_seed(0, req.tag);
        std::string reply;
        try {
            reply = with_retry(retry, [&] { return gateway.generate(req); }).text;
        } catch (const GatewayError& e) {
            if (e.aborts()) throw;
            out.drop_reason = std::string("gateway failure: ") + e.what();
            return out;
        }
        if (is_clean_question(reply)) {
            out.question = trim(reply);
            return out;
        }
        out.drop_reason = "malformed reworded question: " + trim(reply).substr(0, 120);
        prompt += "\n\nYour previous output was not a single yes or no question. Output exactly one sentence ending "
                  "with a question mark.";
    }
    return out;
}

LiveSnapshot snapshot_live(const std::vector<MarketRecord>& open_markets, Date snapshot_date, std::size_t sample_size,
                           std::uint64_t seed, const MarketFilter& filter) {
    std::vector<const MarketRecord*> pool;
    for (const auto& m : open_markets) {
        if (passes(m, filter) && snapshot_date <= m.close_time && m.open_time <= snapshot_date) pool.push_back(&m);
    }
    LiveSnapshot snap;
    snap.date = snapshot_date;
    const std::size_t take = std::min(sample_size, pool.size());
    snap.shortfall = sample_size - take;
    Rng rng(seed);
    for (std::size_t i = 0; i < take; ++i) {
        std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
    }
    pool.resize(take);
    std::sort(pool.begin(), pool.end(), [](const MarketRecord* a, const MarketRecord* b) { return a->market_id < b->market_id; });
    for (const auto* m : pool) {
        Question q;
        q.id = m->market_id + "-live-" + snapshot_date.iso();
        q.text = m->title;
        q.knowledge_cutoff = snapshot_date;
        q.resolution_date = m->close_time;
        q.market_price = price_at(m->price_history, snapshot_date);
        q.source = QuestionSource::live;
        q.category = m->category;
        snap.questions.push_back(validate_question(std::move(q)).get());
    }
    return snap;
}

std::string snapshot_filename(Date d) { return "live-" + d.iso() + ".jsonl"; }

}  // namespace foresight
