#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "livesurvey/corpus.hpp"
#include "livesurvey/endpoint.hpp"
#include "livesurvey/metrics.hpp"
#include "livesurvey/report.hpp"
#include "livesurvey/update.hpp"

namespace livesurvey {

struct HashEmbeddingConfig {
  std::uint64_t seed = 0;
  std::size_t dimension = 64;
};

/// Everything a command needs. Relative paths are resolved against the
/// directory of the config file.
struct RunConfig {
  std::filesystem::path base_dir;
  std::filesystem::path survey;
  std::filesystem::path outline;
  std::optional<SurveyScope> scope;
  std::filesystem::path feed;
  CandidateFilter filter;
  std::optional<std::vector<std::string>> allowed_sections;
  std::optional<std::vector<std::string>> allowed_tables;

  std::optional<GenerationEndpoint> generation;
  std::optional<std::filesystem::path> generation_mock;
  std::optional<EmbeddingEndpoint> embedding;
  std::optional<HashEmbeddingConfig> embedding_mock;

  MetricSettings metrics;
  std::vector<std::filesystem::path> instances;
  std::vector<std::string> methods{"framework", "one_step", "oracle"};
  std::string epoch_id = "epoch-1";
  std::optional<std::string> fixed_clock;
  std::filesystem::path output_dir = "out";

  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Replaces ${NAME} in every string value. Unknown variables throw
/// Error(kConfig).
nlohmann::json interpolate_env(const nlohmann::json& j, const EnvLookup& env);

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                           const EnvLookup& env = process_env);
RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

GenerationEndpoint generation_from_json(const nlohmann::json& j);
EmbeddingEndpoint embedding_from_json(const nlohmann::json& j);

/// Builds the configured generator (scripted or HTTP).
std::unique_ptr<TextGenerator> make_generator(const RunConfig& config);
/// Builds the configured embedder, or nullptr when none is configured.
std::unique_ptr<Embedder> make_embedder(const RunConfig& config);
/// The fixed clock when one is configured, otherwise the wall clock.
Clock make_clock(const RunConfig& config);

struct BenchmarkRun {
  ReportHeader header;
  std::vector<StepEvaluation> evaluations;
};

/// Runs every configured instance with each method. An empty `methods`
/// falls back to the configured list.
BenchmarkRun run_benchmark(const RunConfig& config, const std::vector<std::string>& methods = {});

}  // namespace livesurvey
