#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "livesurvey/endpoint.hpp"

namespace livesurvey {

struct ParsedUrl {
  std::string scheme_host_port;  // "http://host:port"
  std::string path_prefix;       // "/v1" or ""
};

ParsedUrl parse_base_url(const std::string& url);

/// Builds the chat-completion request body {model, messages, temperature,
/// max_tokens}.
nlohmann::json chat_request_body(const GenerationEndpoint& endpoint,
                                 const GenerationRequest& request);

/// Extracts choices[0].message.content (or choices[0].text).
std::string chat_response_text(const nlohmann::json& response);

/// Builds {model, input}.
nlohmann::json embedding_request_body(const EmbeddingEndpoint& endpoint,
                                      std::span<const std::string> texts);

/// Accepts {"data": [{"embedding": [...]}, ...]} or {"embeddings": [[...]]}.
std::vector<std::vector<double>> embedding_response_vectors(
    const nlohmann::json& response, std::size_t expected_count,
    std::size_t dimension);

/// Chat-completion client. A fresh connection per call keeps instances safe
/// to share between threads.
class HttpGenerator final : public TextGenerator {
 public:
  explicit HttpGenerator(GenerationEndpoint endpoint);
  std::string generate(const GenerationRequest& request) override;
  int max_retries() const override { return endpoint_.max_retries; }

 private:
  GenerationEndpoint endpoint_;
  ParsedUrl url_;
  std::string api_key_;
};

class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(EmbeddingEndpoint endpoint);
  std::vector<std::vector<double>> embed(
      std::span<const std::string> texts) override;
  std::size_t dimension() const override { return endpoint_.dimension; }
  std::string model_id() const override { return endpoint_.model_id; }

 private:
  EmbeddingEndpoint endpoint_;
  ParsedUrl url_;
  std::string api_key_;
};

}  // namespace livesurvey
