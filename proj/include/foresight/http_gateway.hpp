#pragma once

#include "foresight/providers.hpp"

#include <chrono>
#include <string>

namespace foresight {

// Generic JSON-over-HTTP backends.
//
// Generation: POST <base>/generate with
//   {"model","system","prompt","temperature","max_output_tokens","seed"}
// and expects {"text": "...", "usage": {"prompt_tokens", "completion_tokens"}}.
//
// Search: POST <base>/search with {"query","date_cutoff","max_results"} and
// expects {"results": [{"snippet","url","published_date"?}]}.
//
// 408, 429 and 5xx responses and connection failures are transient.
struct HttpEndpoint {
    std::string base_url;  // http://host:port[/prefix]
    std::string api_key;   // sent as a bearer token when non-empty
    std::chrono::seconds timeout{60};
};

class HttpGenerationGateway final : public GenerationGateway {
public:
    explicit HttpGenerationGateway(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    GenerationResponse generate(const GenerationRequest& request) override;

private:
    HttpEndpoint endpoint_;
};

class HttpSearchGateway final : public SearchGateway {
public:
    explicit HttpSearchGateway(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    SearchResult search(const SearchRequest& request) override;

private:
    HttpEndpoint endpoint_;
};

}  // namespace foresight
