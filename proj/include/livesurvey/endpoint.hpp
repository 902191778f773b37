#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace livesurvey {

/// Settings for an OpenAI-compatible chat-completion endpoint.
struct GenerationEndpoint {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model_id;
  double temperature = 0.0;
  int max_output_tokens = 2048;
  std::chrono::milliseconds timeout{120000};
  // Format retries granted to each agent call (attempts = 1 + max_retries).
  int max_retries = 1;
  // Retries for transport failures and 429/5xx responses.
  int transport_retries = 2;
  std::string api_key_env;  // name of the env var holding the bearer token

  void validate() const;
};

/// Settings for an embedding endpoint (mean-pooled sentence vectors).
struct EmbeddingEndpoint {
  std::string base_url;
  std::string model_id = "bert-base-uncased";
  std::size_t dimension = 768;
  std::chrono::milliseconds timeout{120000};
  int transport_retries = 2;
  std::size_t batch_size = 32;
  std::string api_key_env;

  void validate() const;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

/// One agent call. `role` and `paper_id` never reach the wire; they key
/// scripted responses and the call log.
struct GenerationRequest {
  std::string role;
  std::string paper_id;
  int attempt = 0;
  std::vector<ChatMessage> messages;
};

class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual std::string generate(const GenerationRequest& request) = 0;
  /// Format retries each agent call may spend.
  virtual int max_retries() const = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// One vector of exactly dimension() components per input, in order.
  virtual std::vector<std::vector<double>> embed(
      std::span<const std::string> texts) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string model_id() const = 0;
};

}  // namespace livesurvey
