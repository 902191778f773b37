#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "livesurvey/agents.hpp"
#include "livesurvey/benchmark.hpp"
#include "livesurvey/config.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/report.hpp"
#include "livesurvey/update.hpp"

namespace fs = std::filesystem;
using namespace livesurvey;

namespace {

enum Exit : int {
  kOk = 0,
  kConfigExit = 2,
  kParseExit = 3,
  kAgentExit = 4,
  kEvaluationExit = 5,
  kPreconditionExit = 6,
  kIoExit = 7,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kConfigExit;
    case ErrorKind::kParse:
    case ErrorKind::kIntegrity: return kParseExit;
    case ErrorKind::kAgent:
    case ErrorKind::kSchema:
    case ErrorKind::kCitation:
    case ErrorKind::kScriptGap:
    case ErrorKind::kTransport: return kAgentExit;
    case ErrorKind::kEvaluation: return kEvaluationExit;
    case ErrorKind::kPrecondition: return kPreconditionExit;
    case ErrorKind::kIo: return kIoExit;
  }
  return kAgentExit;
}

fs::path out_dir(const RunConfig& config, const std::string& flag) {
  return flag.empty() ? config.output_dir : fs::path(flag);
}

int cmd_outline(const RunConfig& config, bool force) {
  if (!config.scope) throw Error(ErrorKind::kConfig, "the outline command needs a 'scope'");
  if (config.outline.empty()) throw Error(ErrorKind::kConfig, "config has no 'outline' path");
  if (fs::exists(config.outline) && !force) {
    const StructuredOutline existing = load_outline(config.outline);
    if (existing.approved) {
      throw Error(ErrorKind::kPrecondition,
                  "refusing to overwrite the approved outline " + config.outline.string() +
                      " (use --force to start over)");
    }
  }
  const SurveyDocument doc = load_document(config.survey);
  std::vector<std::string> sections, tables;
  if (config.allowed_sections) {
    sections = *config.allowed_sections;
  } else {
    for (const auto& s : doc.sections) {
      if (!s.non_maintained) sections.push_back(s.id);
    }
  }
  if (config.allowed_tables) {
    tables = *config.allowed_tables;
  } else {
    for (const auto& t : doc.tables) {
      if (!t.non_maintained) tables.push_back(t.id);
    }
  }
  auto generator = make_generator(config);
  AgentContext ctx{*generator, config.scope->title};
  const StructuredOutline outline = run_outline_agent(ctx, doc, sections, tables, *config.scope);
  write_file(config.outline, serialize_outline(outline));
  std::cout << "wrote unapproved outline with " << outline.section_entries.size()
            << " sections and " << outline.table_entries.size() << " tables to "
            << config.outline.string() << "\n";
  return kOk;
}

int cmd_review(const RunConfig& config, bool yes, bool reject) {
  StructuredOutline outline = load_outline(config.outline);
  std::cout << serialize_outline(outline);
  if (outline.approved) {
    std::cout << "outline is already approved\n";
    return kOk;
  }
  bool approve = yes;
  if (!yes && !reject) {
    std::cout << "Approve this outline and freeze it for the maintenance epoch? [y/N] "
              << std::flush;
    std::string answer;
    std::getline(std::cin, answer);
    approve = answer == "y" || answer == "Y" || answer == "yes";
  }
  if (!approve) {
    std::cout << "outline left unapproved\n";
    return kOk;
  }
  write_file(config.outline, serialize_outline(approve_outline(std::move(outline))));
  std::cout << "outline approved\n";
  return kOk;
}

int cmd_update(const RunConfig& config, const fs::path& out) {
  SurveyState state(load_document(config.survey), load_outline(config.outline), config.epoch_id);
  if (!state.outline().approved) {
    throw Error(ErrorKind::kPrecondition,
                "outline is not approved; run 'review' before updating");
  }
  const auto papers = ingest_feed(config.feed, config.filter);
  auto generator = make_generator(config);
  const UpdateContext ctx{*generator, make_clock(config)};
  const fs::path audit = out / "audit.ndjson";
  fs::create_directories(out);
  write_file(audit, "");
  std::size_t updated = 0, abstained = 0, failed = 0;
  for (const auto& paper : papers) {
    UpdateResult result = apply_update(state, paper, ctx);
    append_audit(audit, result.record);
    switch (result.record.decision) {
      case UpdateDecision::kUpdated: ++updated; break;
      case UpdateDecision::kAbstained: ++abstained; break;
      case UpdateDecision::kFailed:
        ++failed;
        std::cerr << "paper " << paper.id << " failed: " << result.record.error << "\n";
        break;
    }
    state = std::move(result.state);
  }
  publish(state, out / "survey.json");
  std::cout << papers.size() << " candidate(s): " << updated << " updated, " << abstained
            << " abstained, " << failed << " failed\n";
  return failed > 0 ? kAgentExit : kOk;
}

int cmd_benchmark(const RunConfig& config, const std::vector<std::string>& methods,
                  const fs::path& out) {
  const BenchmarkRun run = run_benchmark(config, methods);
  write_report(out, run.header, run.evaluations);
  std::cout << summary_text(run.header, summarize(run.evaluations));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maintain a survey document with agentic incremental updates"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_flag;
  bool force = false;
  bool yes = false;
  bool reject = false;
  std::vector<std::string> methods;

  auto* outline = app.add_subcommand("outline", "Extract an unapproved structured outline");
  auto* review = app.add_subcommand("review", "Review and approve the outline");
  auto* update = app.add_subcommand("update", "Apply feed papers to the survey");
  auto* bench = app.add_subcommand("benchmark", "Run the retrospective benchmark");
  for (auto* sub : {outline, review, update, bench}) {
    sub->add_option("--config", config_path, "Run configuration file")->required();
  }
  outline->add_flag("--force", force, "Overwrite an approved outline");
  review->add_flag("--yes", yes, "Approve without prompting");
  review->add_flag("--reject", reject, "Reject without prompting");
  update->add_option("--out", out_flag, "Output directory");
  bench->add_option("--out", out_flag, "Output directory");
  bench->add_option("--methods", methods, "Methods to run (framework, one_step, oracle)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigExit;
  }

  try {
    const RunConfig config = load_config(config_path);
    if (outline->parsed()) return cmd_outline(config, force);
    if (review->parsed()) return cmd_review(config, yes, reject);
    if (update->parsed()) return cmd_update(config, out_dir(config, out_flag));
    return cmd_benchmark(config, methods, out_dir(config, out_flag));
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseExit;
  }
}
