#include "hallucount/providers/digest.hpp"

#include <array>
#include <memory>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"

namespace hallucount::providers {

void CompletionRequest::validate() const {
  if (text::is_blank(prompt)) throw Error(ErrorCode::kInvalidArgument, "empty prompt");
  if (max_output_length == 0) throw Error(ErrorCode::kInvalidArgument, "max_output_length must be > 0");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
}

void check_embed_inputs(std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::kEmptyInput, "embed_batch called with no texts");
  for (const auto& t : texts) {
    if (t.empty()) throw Error(ErrorCode::kEmptyInput, "embed_batch called with an empty string");
  }
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error(ErrorCode::kProviderFailure, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string request_digest(const CompletionRequest& request) {
  nlohmann::json canon = {
      {"kind", "completion"},
      {"prompt", request.prompt},
      {"max_output_length", request.max_output_length},
      {"temperature", request.temperature},
      {"seed", request.seed ? nlohmann::json(*request.seed) : nlohmann::json(nullptr)},
  };
  return sha256_hex(canon.dump());
}

std::string embedding_digest(std::string_view text) {
  nlohmann::json canon = {{"kind", "embedding"}, {"text", std::string(text)}};
  return sha256_hex(canon.dump());
}

}  // namespace hallucount::providers
