#pragma once

#include <string>
#include <string_view>

#include "hallucount/providers/provider.hpp"

namespace hallucount::providers {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Replay key for a completion: hash over prompt, max_output_length,
/// temperature and seed.
std::string request_digest(const CompletionRequest& request);

/// Replay key for a single embedded string.
std::string embedding_digest(std::string_view text);

}  // namespace hallucount::providers
