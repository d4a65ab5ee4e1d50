#pragma once

#include "foresight/benchkit.hpp"
#include "foresight/integrity.hpp"
#include "foresight/pipeline.hpp"
#include "foresight/providers.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace foresight {

struct GatewaySpec {
    enum class Type { mock, http };
    Type type = Type::mock;
    std::string script;       // mock: script path (relative to the config file)
    std::string base_url;     // http
    std::string api_key_env;  // http: environment variable holding the credential
    int timeout_s = 60;
    GatewayLimits limits;
};

struct AppConfig {
    RunConfig run;
    std::string output_dir = "run";
    std::optional<GatewaySpec> generation;
    std::optional<GatewaySpec> search;
    std::optional<GatewaySpec> judge;
    JudgeOptions judge_options;
    int worst_case_threshold = kDefaultWorstCaseThreshold;
    int n_resamples = 10000;
    MarketFilter market_filter;
    std::size_t live_sample_size = kDefaultLiveSampleSize;
    std::string reword_template;
    std::filesystem::path base_dir;  // directory of the config file
};

// Parses the configuration document. Unknown keys and mistyped values raise
// ConfigError naming the dotted key path.
AppConfig parse_config(const json& doc, const std::filesystem::path& base_dir = {});
AppConfig load_config(const std::filesystem::path& path);

// Builds the gateways named in the config. Missing sections are left null.
// Scripted mocks referring to the same file share one replay state.
Gateways build_gateways(const AppConfig& cfg);

}  // namespace foresight
