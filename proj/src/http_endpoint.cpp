#include "livesurvey/http_endpoint.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "livesurvey/error.hpp"

namespace livesurvey {
namespace {

std::string read_api_key(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* value = std::getenv(env_name.c_str());
  if (!value) {
    throw Error(ErrorKind::kConfig,
                "credential environment variable " + env_name + " is not set");
  }
  return value;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

nlohmann::json post_json(const ParsedUrl& url, const std::string& path,
                         const nlohmann::json& body, const std::string& api_key,
                         std::chrono::milliseconds timeout, int retries) {
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
    }
    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key);
    }
    auto result = client.Post(url.path_prefix + path, headers, payload,
                              "application/json");
    if (!result) {
      last_error = "request failed: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 200) {
      auto parsed = nlohmann::json::parse(result->body, nullptr, false);
      if (parsed.is_discarded()) {
        throw Error(ErrorKind::kTransport, "endpoint returned invalid JSON");
      }
      return parsed;
    }
    last_error = "HTTP " + std::to_string(result->status);
    if (!retryable_status(result->status)) break;
  }
  throw Error(ErrorKind::kTransport,
              url.scheme_host_port + url.path_prefix + path + ": " + last_error);
}

}  // namespace

void GenerationEndpoint::validate() const {
  if (base_url.empty()) throw Error(ErrorKind::kConfig, "generation base_url is empty");
  if (model_id.empty()) throw Error(ErrorKind::kConfig, "generation model is empty");
  if (temperature < 0.0 || temperature > 1.0) {
    throw Error(ErrorKind::kConfig, "generation temperature must be in [0, 1]");
  }
  if (max_output_tokens <= 0) {
    throw Error(ErrorKind::kConfig, "max_output_tokens must be positive");
  }
  if (max_retries < 0 || max_retries > 5 || transport_retries < 0 ||
      transport_retries > 5) {
    throw Error(ErrorKind::kConfig, "retry counts must lie in [0, 5]");
  }
}

void EmbeddingEndpoint::validate() const {
  if (base_url.empty()) throw Error(ErrorKind::kConfig, "embedding base_url is empty");
  if (dimension == 0) throw Error(ErrorKind::kConfig, "embedding dimension must be positive");
  if (batch_size == 0) throw Error(ErrorKind::kConfig, "embedding batch_size must be positive");
}

ParsedUrl parse_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::kConfig, "base_url '" + url + "' has no scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
      out.path_prefix.pop_back();
    }
  }
  return out;
}

nlohmann::json chat_request_body(const GenerationEndpoint& endpoint,
                                 const GenerationRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return {{"model", endpoint.model_id},
          {"messages", std::move(messages)},
          {"temperature", endpoint.temperature},
          {"max_tokens", endpoint.max_output_tokens}};
}

std::string chat_response_text(const nlohmann::json& response) {
  auto choices = response.find("choices");
  if (choices == response.end() || !choices->is_array() || choices->empty()) {
    throw Error(ErrorKind::kTransport, "chat response has no choices");
  }
  const auto& first = (*choices)[0];
  if (auto msg = first.find("message"); msg != first.end()) {
    if (auto content = msg->find("content");
        content != msg->end() && content->is_string()) {
      return content->get<std::string>();
    }
  }
  if (auto text = first.find("text"); text != first.end() && text->is_string()) {
    return text->get<std::string>();
  }
  throw Error(ErrorKind::kTransport, "chat response has no text content");
}

nlohmann::json embedding_request_body(const EmbeddingEndpoint& endpoint,
                                      std::span<const std::string> texts) {
  return {{"model", endpoint.model_id},
          {"input", std::vector<std::string>(texts.begin(), texts.end())}};
}

std::vector<std::vector<double>> embedding_response_vectors(
    const nlohmann::json& response, std::size_t expected_count,
    std::size_t dimension) {
  std::vector<std::vector<double>> out;
  if (auto data = response.find("data"); data != response.end() && data->is_array()) {
    std::vector<std::pair<std::size_t, std::vector<double>>> indexed;
    for (std::size_t i = 0; i < data->size(); ++i) {
      const auto& item = (*data)[i];
      indexed.emplace_back(item.value("index", i),
                           item.at("embedding").get<std::vector<double>>());
    }
    std::sort(indexed.begin(), indexed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [_, v] : indexed) out.push_back(std::move(v));
  } else if (auto embs = response.find("embeddings");
             embs != response.end() && embs->is_array()) {
    out = embs->get<std::vector<std::vector<double>>>();
  } else {
    throw Error(ErrorKind::kTransport, "embedding response has no vectors");
  }
  if (out.size() != expected_count) {
    throw Error(ErrorKind::kTransport,
                "embedding response has " + std::to_string(out.size()) +
                    " vectors for " + std::to_string(expected_count) + " inputs");
  }
  for (const auto& v : out) {
    if (v.size() != dimension) {
      throw Error(ErrorKind::kTransport,
                  "embedding has " + std::to_string(v.size()) +
                      " components, expected " + std::to_string(dimension));
    }
  }
  return out;
}

HttpGenerator::HttpGenerator(GenerationEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      url_(parse_base_url(endpoint_.base_url)),
      api_key_(read_api_key(endpoint_.api_key_env)) {
  endpoint_.validate();
}

std::string HttpGenerator::generate(const GenerationRequest& request) {
  auto response = post_json(url_, "/chat/completions",
                            chat_request_body(endpoint_, request), api_key_,
                            endpoint_.timeout, endpoint_.transport_retries);
  return chat_response_text(response);
}

HttpEmbedder::HttpEmbedder(EmbeddingEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      url_(parse_base_url(endpoint_.base_url)),
      api_key_(read_api_key(endpoint_.api_key_env)) {
  endpoint_.validate();
}

std::vector<std::vector<double>> HttpEmbedder::embed(
    std::span<const std::string> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size();
       start += endpoint_.batch_size) {
    auto batch = texts.subspan(
        start, std::min(endpoint_.batch_size, texts.size() - start));
    auto response = post_json(url_, "/embeddings",
                              embedding_request_body(endpoint_, batch), api_key_,
                              endpoint_.timeout, endpoint_.transport_retries);
    for (auto& v : embedding_response_vectors(response, batch.size(),
                                              endpoint_.dimension)) {
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace livesurvey
