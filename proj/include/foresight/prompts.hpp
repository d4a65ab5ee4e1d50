#pragma once

#include "foresight/domain.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace foresight::prompts {

// Template placeholders are {name} or {name:.Nf}. A placeholder whose name is
// absent from the value map is an error; braces that do not form a
// placeholder are copied through untouched.
using TemplateValue = std::variant<std::string, double>;
std::string fill_template(std::string_view tmpl, const std::map<std::string, TemplateValue>& values);

// Foreknowledge judge template. Placeholders: question, news_end_date,
// resolution_date, resolution, model_name, probability, model_output.
std::string_view judge_template();
// Market-title rewording template. Placeholders: title, rules.
std::string_view reword_template();

// Loads an asset override if `path` is non-empty, else returns the built-in.
std::string load_template(const std::string& path, std::string_view builtin);

struct AgentContext {
    const Question* question = nullptr;
    bool include_market_price = false;
    const std::vector<EvidenceItem>* evidence = nullptr;
    int searches_remaining = 0;
};

std::string agent_system();
std::string agent_prompt(const AgentContext& ctx);
std::string final_answer_reprompt();

std::string query_generation_prompt(const Question& q, int k);

struct SupervisorInput {
    const Question* question = nullptr;
    const std::vector<ForecastRecord>* records = nullptr;
    Probability simple_mean;
    int query_cap = 0;
};

std::string supervisor_disagreement_prompt(const SupervisorInput& in);
std::string supervisor_revision_prompt(const SupervisorInput& in, const std::string& summary,
                                       const std::vector<EvidenceItem>& findings);
std::string best_of_k_prompt(const SupervisorInput& in);
std::string nonagentic_supervisor_prompt(const SupervisorInput& in);

// Parsed agent reply.
struct AgentAction {
    enum class Kind { search, final_answer, invalid };
    Kind kind = Kind::invalid;
    std::string query;
    double probability = 0.0;
};

// A "FINAL: <p>" line with p in [0,1] wins over any "SEARCH: <query>" line.
AgentAction parse_agent_action(const std::string& text);
std::optional<double> parse_final_line(const std::string& text);

struct RevisionReply {
    double revised = 0.0;
    Confidence confidence = Confidence::low;
};
std::optional<RevisionReply> parse_revision(const std::string& text);

struct DisagreementReply {
    std::string summary;
    std::vector<std::string> queries;
};
DisagreementReply parse_disagreement(const std::string& text, int cap);

}  // namespace foresight::prompts
