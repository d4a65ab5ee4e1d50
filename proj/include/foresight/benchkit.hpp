#pragma once

#include "foresight/domain.hpp"
#include "foresight/providers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace foresight {

inline constexpr long kMinContracts = 5000;
inline constexpr long kMinOpenDays = 7;
inline constexpr std::size_t kDefaultLiveSampleSize = 250;

struct PricePoint {
    Date date;
    Probability price;
    friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

struct MarketRecord {
    std::string market_id;
    std::string title;
    std::string rules;
    Date open_time;
    Date close_time;
    std::optional<Date> resolution_time;
    long total_contracts = 0;
    std::vector<PricePoint> price_history;  // ascending dates
    std::string category;
    std::optional<int> outcome;

    friend bool operator==(const MarketRecord&, const MarketRecord&) = default;
};

void check_market(const MarketRecord& m);
void to_json(json& j, const MarketRecord& m);
void from_json(const json& j, MarketRecord& m);

struct MarketFilter {
    long min_contracts = kMinContracts;
    long min_open_days = kMinOpenDays;
    // Matched against the '/'-separated, lower-cased tokens of the category.
    // Empty: no category restriction.
    std::vector<std::string> category_allowlist{"politics", "policy", "economics", "markets",
                                                "ai", "technology"};
};

// Keeps liquid, long-enough markets in allowed categories. Boundaries are
// inclusive on the keep side: 5000 contracts and 7 days open both pass.
std::vector<MarketRecord> filter_markets(const std::vector<MarketRecord>& records,
                                         const MarketFilter& filter = {});

// Days-before-anchor offsets; nullopt when the market was open 7 days or less.
std::optional<std::vector<int>> cutoff_schedule(Date open_time, Date close_time);
std::optional<std::vector<int>> cutoff_schedule_for_span(long diff_days);

// Last recorded price on or before `date`.
std::optional<Probability> price_at(const std::vector<PricePoint>& history, Date date);

// One question per schedule entry. Cutoffs count back from the realised
// resolution date when it is known and not after the posted close, else from
// the close; forecasters only ever see the posted close as resolution date.
std::vector<Question> generate_questions(const MarketRecord& market, const std::string& reworded_text);

struct RewordResult {
    std::optional<std::string> question;
    std::string drop_reason;
};

// A single-line yes/no question ending in '?'.
bool is_clean_question(const std::string& text);

RewordResult reword_question(const std::string& title, const std::string& rules,
                             GenerationGateway& gateway, const RetryPolicy& retry = {},
                             const std::string& tmpl = {}, const std::string& tag = {});

struct LiveSnapshot {
    Date date;
    std::vector<Question> questions;
    std::size_t shortfall = 0;  // requested minus available, when short
};

// Uniform sample without replacement from the markets passing filter_markets.
LiveSnapshot snapshot_live(const std::vector<MarketRecord>& open_markets, Date snapshot_date,
                           std::size_t sample_size, std::uint64_t seed, const MarketFilter& filter = {});

std::string snapshot_filename(Date d);

}  // namespace foresight
