// minicex: staged evaluation pipeline.
//
//   minicex <stage> --manifest run.json [--seed N] [--out DIR] [--format md|csv]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "minicex/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"LLM Mini-CEX evaluation pipeline"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string manifest_path;
  std::optional<std::int64_t> seed;
  std::string out_dir;
  std::string format = "md";
  app.add_option("--manifest", manifest_path, "run manifest (JSON)")->required();
  app.add_option("--seed", seed, "override the manifest seed");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_option("--format", format, "table format")->check(CLI::IsMember({"md", "csv"}));

  const char* stages[][2] = {{"simulate", "run doctor-patient consultations"},
                             {"judge", "judge transcripts item by item"},
                             {"metrics", "judge agreement with expert annotations"},
                             {"score", "per-model primary item scores"},
                             {"psych", "reliability and validity of the scale"},
                             {"report", "combined report"},
                             {"validate-scale", "check the scale and its prompts"}};
  for (const auto& s : stages) app.add_subcommand(s[0], s[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return minicex::kExitUsage;
  }

  minicex::RunManifest manifest;
  try {
    manifest = minicex::load_manifest(manifest_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return minicex::kExitUsage;
  }
  if (seed) manifest.seed = *seed;
  if (!out_dir.empty()) manifest.output_dir = out_dir;

  const auto stage = minicex::parse_stage(app.get_subcommands().front()->get_name());
  return minicex::run_pipeline(manifest, stage, minicex::parse_table_format(format), std::cerr);
}
