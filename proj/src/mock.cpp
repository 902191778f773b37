#include "livesurvey/mock.hpp"

#include <cctype>
#include <cmath>

#include "livesurvey/document.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/outline.hpp"
#include "livesurvey/text.hpp"

namespace livesurvey {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void ScriptedGenerator::add(std::string role, std::string paper_id,
                            int attempt, std::string response) {
  std::lock_guard lock(mutex_);
  script_[{std::move(role), std::move(paper_id), attempt}] =
      std::move(response);
}

std::string ScriptedGenerator::generate(const GenerationRequest& request) {
  std::lock_guard lock(mutex_);
  calls_.push_back(request);
  auto it = script_.find({request.role, request.paper_id, request.attempt});
  if (it == script_.end()) {
    it = script_.find(
        {request.role, std::string(kAnyPaper), request.attempt});
  }
  if (it == script_.end()) {
    throw Error(ErrorKind::kScriptGap,
                "no scripted response for role '" + request.role +
                    "', paper '" + request.paper_id + "', attempt " +
                    std::to_string(request.attempt));
  }
  return it->second;
}

std::vector<GenerationRequest> ScriptedGenerator::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::unique_ptr<ScriptedGenerator> ScriptedGenerator::from_json(
    const nlohmann::json& j, const std::filesystem::path& base_dir) {
  auto gen = std::make_unique<ScriptedGenerator>(j.value("max_retries", 1));
  auto responses = j.find("responses");
  if (responses == j.end() || !responses->is_array()) {
    throw Error(ErrorKind::kConfig, "scenario needs a 'responses' array");
  }
  for (const auto& r : *responses) {
    std::string text;
    if (auto it = r.find("response"); it != r.end()) {
      text = it->get<std::string>();
    } else if (auto file = r.find("response_file"); file != r.end()) {
      text = read_file(base_dir / file->get<std::string>());
    } else if (auto js = r.find("response_json"); js != r.end()) {
      text = js->dump(2);
    } else {
      throw Error(ErrorKind::kConfig, "scenario response entry has no text");
    }
    gen->add(r.at("role").get<std::string>(),
            r.value("paper", std::string(kAnyPaper)), r.value("attempt", 0),
            std::move(text));
  }
  return gen;
}

HashEmbedder::HashEmbedder(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension_ == 0) {
    throw Error(ErrorKind::kConfig, "hash embedding dimension must be positive");
  }
}

std::string HashEmbedder::model_id() const {
  return "hash-bow-seed" + std::to_string(seed_) + "-d" +
         std::to_string(dimension_);
}

std::vector<double> HashEmbedder::embed_one(const std::string& text) const {
  std::vector<double> v(dimension_, 0.0);
  const auto tokens = tokenize(text);
  if (tokens.empty()) {
    v[0] = 1.0;
    return v;
  }
  for (const auto& token : tokens) {
    std::string lower = token;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const std::uint64_t base = fnv1a64(lower) ^ splitmix64(seed_);
    for (std::size_t i = 0; i < dimension_; ++i) {
      std::uint64_t r = splitmix64(base + i);
      // Top 53 bits to a double in [-1, 1).
      v[i] += static_cast<double>(r >> 11) * 0x1.0p-52 - 1.0;
    }
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v.assign(dimension_, 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

std::vector<std::vector<double>> HashEmbedder::embed(
    std::span<const std::string> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

}  // namespace livesurvey
