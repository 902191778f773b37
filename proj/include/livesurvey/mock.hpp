#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "livesurvey/endpoint.hpp"

namespace livesurvey {

/// Paper id that matches any paper in a scripted lookup. Only used when no
/// exact entry exists.
inline constexpr std::string_view kAnyPaper = "*";

/// Offline generator driven by canned responses keyed by
/// (agent role, paper id, attempt). A missing key is an error, never a
/// silent default.
class ScriptedGenerator final : public TextGenerator {
 public:
  explicit ScriptedGenerator(int max_retries = 1) : max_retries_(max_retries) {}

  void add(std::string role, std::string paper_id, int attempt,
           std::string response);
  /// Shorthand for attempt 0.
  void add(std::string role, std::string paper_id, std::string response) {
    add(std::move(role), std::move(paper_id), 0, std::move(response));
  }

  std::string generate(const GenerationRequest& request) override;
  int max_retries() const override { return max_retries_; }

  /// Requests seen so far, in call order.
  std::vector<GenerationRequest> calls() const;

  /// Loads {"max_retries": n, "responses": [{role, paper, attempt,
  /// response | response_file | response_json}]}. Relative response files
  /// resolve against base_dir.
  static std::unique_ptr<ScriptedGenerator> from_json(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir);

 private:
  using Key = std::tuple<std::string, std::string, int>;
  int max_retries_;
  std::map<Key, std::string> script_;
  mutable std::mutex mutex_;
  std::vector<GenerationRequest> calls_;
};

/// Deterministic bag-of-tokens embedding: each lowercased token maps to a
/// seeded pseudo-random vector; a text embeds as the normalized sum. Texts
/// without tokens map to the unit vector e0.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::uint64_t seed = 0, std::size_t dimension = 64);

  std::vector<std::vector<double>> embed(
      std::span<const std::string> texts) override;
  std::size_t dimension() const override { return dimension_; }
  std::string model_id() const override;

  std::vector<double> embed_one(const std::string& text) const;

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
};

}  // namespace livesurvey
