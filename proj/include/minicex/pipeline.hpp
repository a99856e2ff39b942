#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minicex/gateway.hpp"
#include "minicex/orchestrator.hpp"
#include "minicex/report.hpp"

namespace minicex {

namespace fs = std::filesystem;

/// Run configuration. Relative paths in the manifest file resolve against the
/// manifest's directory.
struct RunManifest {
  fs::path scale;
  fs::path prompts;
  std::int64_t seed = 0;
  fs::path output_dir;
  int parallelism = 1;
  ConsultationLimits limits;
  fs::path self_reports;  // one self-report per line
  std::optional<AgentConfig> patient;
  std::vector<AgentConfig> doctors;
  std::optional<AgentConfig> judge;
  fs::path cache_dir;  // default: <output_dir>/cache
  fs::path metrics_judgments;
  fs::path annotations;
  fs::path responses;
  std::string doctor_system_prompt{kDefaultDoctorPrompt};
};

/// Throws ParseError / ValidationError.
RunManifest parse_manifest(std::string_view document, const fs::path& base_dir = {});
RunManifest load_manifest(const fs::path& path);
AgentConfig parse_agent_config(const std::string& json_text, const fs::path& base_dir = {});

enum class Stage { kSimulate, kJudge, kMetrics, kScore, kPsych, kReport, kValidateScale };
Stage parse_stage(std::string_view s);
std::string_view to_string(Stage s);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitStageFailure = 2;

/// Stage failure with a human-readable cause.
class StageError : public Error {
 public:
  using Error::Error;
};

/// File-name-safe form of a model name.
std::string artifact_name(std::string_view model);

fs::path transcripts_path(const RunManifest& m, std::string_view model);
fs::path judgments_path(const RunManifest& m, std::string_view model);

/// Runs one stage, writing artifacts under m.output_dir. Throws on failure.
void run_stage(const RunManifest& m, Stage stage, TableFormat format, std::ostream& log);

/// run_stage with errors mapped to exit codes; the cause goes to `log`.
int run_pipeline(const RunManifest& m, Stage stage, TableFormat format, std::ostream& log);

}  // namespace minicex
