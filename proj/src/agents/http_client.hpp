#pragma once

#include <string>
#include <string_view>

#include "gridsigma/agents.hpp"

namespace gridsigma::agents::detail {

/// POST {base_url}/v1/chat/completions with a single user message; returns
/// choices[0].message.content. Throws DomainError on transport failure
/// (after retries), non-2xx status, malformed body or empty content.
std::string chat_completion(const EndpointConfig& endpoint, std::string_view content);

}  // namespace gridsigma::agents::detail
