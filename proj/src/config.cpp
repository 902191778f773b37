#include "livesurvey/config.hpp"

#include <cstdlib>

#include "livesurvey/benchmark.hpp"
#include "livesurvey/document.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/http_endpoint.hpp"
#include "livesurvey/mock.hpp"

namespace livesurvey {
namespace {

std::string interpolate_string(const std::string& s, const EnvLookup& env) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = s.find("${", pos);
    if (open == std::string::npos) break;
    auto close = s.find('}', open + 2);
    if (close == std::string::npos) {
      throw Error(ErrorKind::kConfig, "unterminated ${ in config value '" + s + "'");
    }
    const std::string name = s.substr(open + 2, close - open - 2);
    auto value = env(name);
    if (!value) {
      throw Error(ErrorKind::kConfig, "environment variable '" + name + "' is not set");
    }
    out.append(s, pos, open - pos);
    out += *value;
    pos = close + 1;
  }
  out.append(s, pos);
  return out;
}

std::vector<std::string> string_array(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw Error(ErrorKind::kConfig, std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& item : v) out.push_back(item.is_string() ? item.get<std::string>() : item.dump());
  return out;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

nlohmann::json interpolate_env(const nlohmann::json& j, const EnvLookup& env) {
  if (j.is_string()) return interpolate_string(j.get<std::string>(), env);
  if (j.is_array() || j.is_object()) {
    nlohmann::json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = interpolate_env(*it, env);
    return out;
  }
  return j;
}

GenerationEndpoint generation_from_json(const nlohmann::json& j) {
  GenerationEndpoint e;
  e.base_url = j.value("base_url", std::string());
  e.model_id = j.value("model_id", std::string());
  e.temperature = j.value("temperature", e.temperature);
  e.max_output_tokens = j.value("max_output_tokens", e.max_output_tokens);
  e.timeout = std::chrono::milliseconds(j.value("timeout_ms", e.timeout.count()));
  e.max_retries = j.value("max_retries", e.max_retries);
  e.transport_retries = j.value("transport_retries", e.transport_retries);
  e.api_key_env = j.value("api_key_env", std::string());
  e.validate();
  return e;
}

EmbeddingEndpoint embedding_from_json(const nlohmann::json& j) {
  EmbeddingEndpoint e;
  e.base_url = j.value("base_url", std::string());
  e.model_id = j.value("model_id", e.model_id);
  e.dimension = j.value("dimension", e.dimension);
  e.timeout = std::chrono::milliseconds(j.value("timeout_ms", e.timeout.count()));
  e.transport_retries = j.value("transport_retries", e.transport_retries);
  e.batch_size = j.value("batch_size", e.batch_size);
  e.api_key_env = j.value("api_key_env", std::string());
  e.validate();
  return e;
}

void RunConfig::validate() const {
  if (generation && generation_mock) {
    throw Error(ErrorKind::kConfig, "set either 'generation' or 'generation_mock', not both");
  }
  if (embedding && embedding_mock) {
    throw Error(ErrorKind::kConfig, "set either 'embedding' or 'embedding_mock', not both");
  }
  if (scope && scope->core_criterion.empty()) {
    throw Error(ErrorKind::kConfig, "scope.core_criterion must not be empty");
  }
  filter.validate();
  metrics.validate();
  for (const auto& m : methods) {
    if (m != "framework" && m != "one_step" && m != "oracle") {
      throw Error(ErrorKind::kConfig, "unknown method '" + m + "'");
    }
  }
}

RunConfig config_from_json(const nlohmann::json& raw, const std::filesystem::path& base_dir,
                           const EnvLookup& env) {
  if (!raw.is_object()) throw Error(ErrorKind::kConfig, "config must be a JSON object");
  const nlohmann::json j = interpolate_env(raw, env);
  RunConfig c;
  c.base_dir = base_dir;
  auto path = [&](const std::string& p) { return std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base_dir / p; };
  try {
    if (j.contains("survey")) c.survey = path(j.at("survey").get<std::string>());
    if (j.contains("outline")) c.outline = path(j.at("outline").get<std::string>());
    if (j.contains("feed")) c.feed = path(j.at("feed").get<std::string>());
    if (auto s = j.find("scope"); s != j.end()) {
      c.scope = s->is_string() ? scope_from_json(nlohmann::json::parse(read_file(path(s->get<std::string>()))))
                               : scope_from_json(*s);
    }
    if (j.contains("filter")) c.filter = filter_from_json(j.at("filter"));
    if (j.contains("allowed_sections")) c.allowed_sections = string_array(j, "allowed_sections");
    if (j.contains("allowed_tables")) c.allowed_tables = string_array(j, "allowed_tables");
    if (j.contains("generation")) c.generation = generation_from_json(j.at("generation"));
    if (j.contains("generation_mock")) c.generation_mock = path(j.at("generation_mock").get<std::string>());
    if (j.contains("embedding")) c.embedding = embedding_from_json(j.at("embedding"));
    if (auto m = j.find("embedding_mock"); m != j.end()) {
      HashEmbeddingConfig h;
      h.seed = m->value("seed", h.seed);
      h.dimension = m->value("dimension", h.dimension);
      c.embedding_mock = h;
    }
    if (auto m = j.find("metrics"); m != j.end()) {
      c.metrics.rouge_beta = m->value("rouge_beta", c.metrics.rouge_beta);
      c.metrics.bleu_smoothing = m->value("bleu_smoothing", c.metrics.bleu_smoothing);
      c.metrics.coherence_k = m->value("coherence_k", c.metrics.coherence_k);
      c.metrics.fidelity_tau = m->value("fidelity_tau", c.metrics.fidelity_tau);
    }
    if (auto b = j.find("benchmark"); b != j.end()) {
      for (const auto& inst : b->value("instances", nlohmann::json::array())) {
        c.instances.push_back(path(inst.get<std::string>()));
      }
    }
    if (j.contains("methods")) c.methods = string_array(j, "methods");
    c.epoch_id = j.value("epoch_id", c.epoch_id);
    if (j.contains("fixed_clock")) c.fixed_clock = j.at("fixed_clock").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = path(j.at("output_dir").get<std::string>());
    else c.output_dir = base_dir / "out";
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    throw Error(ErrorKind::kConfig, e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  return config_from_json(j, path.parent_path(), env);
}

std::unique_ptr<TextGenerator> make_generator(const RunConfig& config) {
  if (config.generation_mock) {
    const auto& p = *config.generation_mock;
    return ScriptedGenerator::from_json(nlohmann::json::parse(read_file(p)), p.parent_path());
  }
  if (config.generation) return std::make_unique<HttpGenerator>(*config.generation);
  throw Error(ErrorKind::kConfig, "no generation endpoint configured");
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& config) {
  if (config.embedding_mock) {
    return std::make_unique<HashEmbedder>(config.embedding_mock->seed,
                                          config.embedding_mock->dimension);
  }
  if (config.embedding) return std::make_unique<HttpEmbedder>(*config.embedding);
  return nullptr;
}

Clock make_clock(const RunConfig& config) {
  if (config.fixed_clock) {
    return [t = *config.fixed_clock] { return t; };
  }
  return utc_now;
}

BenchmarkRun run_benchmark(const RunConfig& config, const std::vector<std::string>& methods) {
  if (config.instances.empty()) {
    throw Error(ErrorKind::kConfig, "benchmark.instances lists no instance files");
  }
  std::vector<Method> order;
  for (const auto& m : methods.empty() ? config.methods : methods) {
    order.push_back(method_from_string(m));
  }
  auto generator = make_generator(config);
  auto embedder = make_embedder(config);
  const Clock clock = make_clock(config);
  BenchmarkRun run{{config.metrics, embedder ? embedder->model_id() : ""}, {}};
  for (const auto& path : config.instances) {
    const BenchmarkInstance instance = load_instance(path);
    for (Method method : order) {
      std::vector<StepResult> steps;
      switch (method) {
        case Method::kFramework: steps = run_framework_stream(instance, *generator, clock); break;
        case Method::kOneStep: steps = run_one_step_baseline(instance, *generator); break;
        case Method::kOracle: steps = run_oracle_baseline(instance, *generator); break;
      }
      for (const auto& step : steps) {
        run.evaluations.push_back(
            evaluate_step(instance.name, step, config.metrics, embedder.get()));
      }
    }
  }
  return run;
}

}  // namespace livesurvey
