#include "foresight/prompts.hpp"

#include "foresight/error.hpp"
#include "foresight/jsonl.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <regex>
#include <sstream>

namespace foresight::prompts {

namespace {

constexpr std::string_view kJudgeTemplate = R"(You are analyzing a forecast question where a language model made a very confident prediction that turned out to be correct. Your task is to determine if there's evidence that the model may have used FOREKNOWLEDGE of the outcome rather than making a genuine prediction.

QUESTION: {question}

MODEL'S KNOWLEDGE CUTOFF: {news_end_date}

RESOLUTION DATE: {resolution_date}

CORRECT ANSWER: {resolution}

MODEL: {model_name}

MODEL'S PROBABILITY ASSIGNMENT: {probability:.4f} (very confident)

MODEL'S REASONING AND DATA: {model_output}

Please analyze the model's reasoning to determine if there's evidence of foreknowledge. Look for:

1. CLEAR EVIDENCE of outcome knowledge: Does the reasoning explicitly reference the actual outcome, result, or resolution that occurred?
2. Past-tense language about future events: Does the model speak about events after the knowledge cutoff date as if they already happened? Recall that the model's knowledge cutoff is {news_end_date}, whereas the resolution date is {resolution_date}.
3. Explicit outcome statements: Does the model state facts about what actually occurred rather than what might occur?
4. Access to post-event information: Does the reasoning reference news or information that could only be available after the event resolved?

IMPORTANT: We are NOT penalizing correct predictions or good forecasting. We are only looking for cases where the model clearly had access to information about the actual outcome.

Recall that you have access to a search tool through which you can retrieve up to date information. Please feel free to use this search tool to investigate whether particular statements made by the model indicate knowledge of events after the knowledge cutoff date.

Return your analysis in this JSON format:
{
  "has_foreknowledge": boolean (true if clear evidence of foreknowledge exists),
  "confidence_level": "high" | "medium" | "low" (how confident you are in the foreknowledge assessment),
  "evidence_quotes": ["exact quote 1 showing foreknowledge", "exact quote 2", ...],
  "evidence_explanation": "detailed explanation of why the evidence suggests foreknowledge",
  "legitimate_reasoning": boolean (true if the reasoning could be legitimate forecasting without foreknowledge),
  "key_indicators": ["indicator 1", "indicator 2", ...] (specific signs of foreknowledge),
  "overall_assessment": "brief summary of whether this appears to be genuine forecasting or potential cheating"
}

Be very careful to distinguish between:
- Strong forecasting based on available information (NOT foreknowledge)
- Clear evidence of knowing the actual outcome (IS foreknowledge)
)";

constexpr std::string_view kRewordTemplate = R"(The following information is from a prediction market where the title is templatized and may be missing information.
The rules contain more information that should be enough to fully resolve the market.

Title: {title}
Rules: {rules}

Please output a single yes or no question that encompasses the title and rules.
When possible, keep the phrasing as close to the title as possible, but ensure the question is a natural sentence.
ONLY output the question, do not output anything else.
)";

std::string fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
}

// Parses a whole string as a probability in [0, 1].
std::optional<double> parse_unit(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    if (!(v >= 0.0 && v <= 1.0)) return std::nullopt;
    return v;
}

// Value after "KEY:" at the start of a line (case-insensitive key).
std::optional<std::string> keyed(const std::string& line, std::string_view key) {
    const std::string t = trim(line);
    if (t.size() < key.size() + 1) return std::nullopt;
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(t[i])) != key[i]) return std::nullopt;
    }
    if (t[key.size()] != ':') return std::nullopt;
    return trim(t.substr(key.size() + 1));
}

void render_evidence(std::ostringstream& out, const std::vector<EvidenceItem>& evidence) {
    for (std::size_t i = 0; i < evidence.size(); ++i) {
        const auto& e = evidence[i];
        out << "[" << i + 1 << "] (round " << e.stage_index << ", query: " << e.query << ")\n";
        out << "    source: " << e.source_url;
        out << "  published: " << (e.published_date ? e.published_date->iso() : std::string("undated")) << "\n";
        out << "    " << e.snippet << "\n";
    }
}

void render_records(std::ostringstream& out, const std::vector<ForecastRecord>& records, bool with_reasoning) {
    for (const auto& r : records) {
        out << "Forecaster " << r.agent_index << ": " << fixed(r.probability.value(), 4) << "\n";
        if (!with_reasoning) continue;
        for (const auto& step : r.trace.steps) out << "  | " << step << "\n";
        for (const auto& c : r.trace.cited_passages) {
            out << "  cited " << c.source_url << ": " << c.text << "\n";
        }
    }
}

}  // namespace

std::string fill_template(std::string_view tmpl, const std::map<std::string, TemplateValue>& values) {
    static const std::regex placeholder(R"(\{([A-Za-z_][A-Za-z0-9_]*)(?::\.([0-9])f)?\})");
    std::string out;
    std::string src(tmpl);
    auto begin = std::sregex_iterator(src.begin(), src.end(), placeholder);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        out.append(src, last, static_cast<std::size_t>(m.position()) - last);
        last = static_cast<std::size_t>(m.position() + m.length());
        const std::string name = m[1].str();
        auto v = values.find(name);
        if (v == values.end()) throw DataError("template placeholder {" + name + "} has no value");
        if (m[2].matched) {
            const int places = std::stoi(m[2].str());
            if (const double* d = std::get_if<double>(&v->second)) {
                out += fixed(*d, places);
            } else {
                throw DataError("template placeholder {" + name + "} needs a number");
            }
        } else if (const double* d = std::get_if<double>(&v->second)) {
            std::ostringstream ss;
            ss << *d;
            out += ss.str();
        } else {
            out += std::get<std::string>(v->second);
        }
    }
    out.append(src, last, std::string::npos);
    return out;
}

std::string_view judge_template() { return kJudgeTemplate; }
std::string_view reword_template() { return kRewordTemplate; }

std::string load_template(const std::string& path, std::string_view builtin) {
    if (path.empty()) return std::string(builtin);
    return read_text_file(path);
}

std::string agent_system() {
    return "You are an expert forecaster. You research a binary question with a web search tool, weigh the "
           "evidence, and give a calibrated probability that the question resolves YES.";
}

std::string agent_prompt(const AgentContext& ctx) {
    const Question& q = *ctx.question;
    std::ostringstream out;
    out << "QUESTION: " << q.text << "\n";
    out << "TODAY'S DATE (information cutoff): " << q.knowledge_cutoff.iso() << "\n";
    out << "RESOLUTION DATE: " << q.resolution_date.iso() << "\n";
    if (ctx.include_market_price && q.market_price) {
        out << "CURRENT PREDICTION MARKET PRICE: " << fixed(q.market_price->value(), 4) << "\n";
    }
    out << "\nEVIDENCE GATHERED SO FAR:\n";
    if (ctx.evidence == nullptr || ctx.evidence->empty()) {
        out << "(none)\n";
    } else {
        render_evidence(out, *ctx.evidence);
    }
    out << "\n";
    if (ctx.searches_remaining > 0) {
        out << "You may run up to " << ctx.searches_remaining << " more searches. Reply with exactly one line:\n"
            << "SEARCH: <query>   to look something up, or\n"
            << "FINAL: <probability between 0 and 1>   to give your forecast.\n"
            << "When answering, cite the sources you relied on by URL in your reasoning.\n";
    } else {
        out << "No searches remain. Give your reasoning, citing sources by URL, and finish with the line\n"
            << "FINAL: <probability between 0 and 1>\n";
    }
    return out.str();
}

std::string final_answer_reprompt() {
    return "Your previous reply could not be parsed. Reply with a single line of the form\nFINAL: <probability "
           "between 0 and 1>\n";
}

std::string query_generation_prompt(const Question& q, int k) {
    std::ostringstream out;
    out << "QUESTION: " << q.text << "\n";
    out << "TODAY'S DATE: " << q.knowledge_cutoff.iso() << "\n\n";
    out << "Write " << k << " web search queries that would help forecast this question. "
        << "Output one query per line and nothing else.\n";
    return out.str();
}

std::string supervisor_disagreement_prompt(const SupervisorInput& in) {
    std::ostringstream out;
    out << "QUESTION: " << in.question->text << "\n";
    out << "TODAY'S DATE: " << in.question->knowledge_cutoff.iso() << "\n\n";
    out << "Independent forecasters produced the following forecasts and reasoning:\n";
    render_records(out, *in.records, true);
    out << "\nSimple mean: " << fixed(in.simple_mean.value(), 4) << "\n\n";
    out << "Identify where the forecasters disagree or where their reasoning is ambiguous (for example a "
           "disputed base rate or an unverified factual claim). Summarise the disagreements.";
    if (in.query_cap > 0) {
        out << " Then list up to " << in.query_cap
            << " search queries that would resolve them, one per line, each prefixed with QUERY:";
    }
    out << "\n";
    return out.str();
}

std::string supervisor_revision_prompt(const SupervisorInput& in, const std::string& summary,
                                       const std::vector<EvidenceItem>& findings) {
    std::ostringstream out;
    out << "QUESTION: " << in.question->text << "\n";
    out << "TODAY'S DATE: " << in.question->knowledge_cutoff.iso() << "\n\n";
    out << "Forecasts:\n";
    render_records(out, *in.records, false);
    out << "Simple mean: " << fixed(in.simple_mean.value(), 4) << "\n\n";
    out << "DISAGREEMENTS:\n" << summary << "\n\n";
    out << "RESEARCH RESULTS:\n";
    if (findings.empty()) {
        out << "(none)\n";
    } else {
        render_evidence(out, findings);
    }
    out << "\nGive an updated forecast and your confidence that it moves the simple mean in the correct "
           "direction. Reply with the two lines\nREVISED: <probability between 0 and 1>\nCONFIDENCE: "
           "<high|medium|low>\n";
    return out.str();
}

std::string best_of_k_prompt(const SupervisorInput& in) {
    std::ostringstream out;
    out << "QUESTION: " << in.question->text << "\n";
    out << "TODAY'S DATE: " << in.question->knowledge_cutoff.iso() << "\n\n";
    render_records(out, *in.records, true);
    out << "\nReason about which forecast is best supported. You must output exactly one of the forecasts "
           "above, unchanged, as\nFINAL: <probability>\n";
    return out.str();
}

std::string nonagentic_supervisor_prompt(const SupervisorInput& in) {
    std::ostringstream out;
    out << "QUESTION: " << in.question->text << "\n";
    out << "TODAY'S DATE: " << in.question->knowledge_cutoff.iso() << "\n\n";
    render_records(out, *in.records, true);
    out << "\nUse these forecasts and their reasoning as inputs to reason toward a single, better forecast. "
           "Finish with\nFINAL: <probability between 0 and 1>\n";
    return out.str();
}

std::optional<double> parse_final_line(const std::string& text) {
    std::optional<double> found;
    for (const auto& l : lines(text)) {
        if (auto v = keyed(l, "FINAL")) {
            if (auto p = parse_unit(*v)) found = p;
        }
    }
    return found;
}

AgentAction parse_agent_action(const std::string& text) {
    AgentAction a;
    if (auto p = parse_final_line(text)) {
        a.kind = AgentAction::Kind::final_answer;
        a.probability = *p;
        return a;
    }
    for (const auto& l : lines(text)) {
        if (auto v = keyed(l, "SEARCH"); v && !v->empty()) {
            a.kind = AgentAction::Kind::search;
            a.query = *v;
            return a;
        }
    }
    return a;
}

std::optional<RevisionReply> parse_revision(const std::string& text) {
    std::optional<double> revised;
    std::optional<Confidence> conf;
    for (const auto& l : lines(text)) {
        if (auto v = keyed(l, "REVISED")) {
            if (auto p = parse_unit(*v)) revised = p;
        } else if (auto c = keyed(l, "CONFIDENCE")) {
            try {
                conf = confidence_from_string(*c);
            } catch (const DataError&) {
            }
        }
    }
    if (!revised || !conf) return std::nullopt;
    return RevisionReply{*revised, *conf};
}

DisagreementReply parse_disagreement(const std::string& text, int cap) {
    DisagreementReply r;
    std::string summary;
    for (const auto& l : lines(text)) {
        if (auto q = keyed(l, "QUERY")) {
            if (!q->empty() && static_cast<int>(r.queries.size()) < cap) r.queries.push_back(*q);
        } else {
            summary += l;
            summary += '\n';
        }
    }
    r.summary = trim(summary);
    return r;
}

}  // namespace foresight::prompts
