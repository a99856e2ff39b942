#include "minicex/pipeline.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "minicex/corpus.hpp"
#include "minicex/judge.hpp"
#include "minicex/metrics.hpp"
#include "minicex/psychometrics.hpp"
#include "minicex/rubric.hpp"
#include "minicex/text.hpp"

namespace minicex {

using json = nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return (path.is_absolute() || base.empty() ? path : base / path).lexically_normal();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

AgentConfig agent_from_json(const json& j, const fs::path& base, Role default_role) {
  if (!j.is_object()) throw ValidationError("agent config must be an object");
  AgentConfig c;
  c.endpoint = j.at("endpoint").get<std::string>();
  c.model_name = get_or<std::string>(j, "model", "");
  c.temperature = get_or(j, "temperature", 0.0);
  c.max_tokens = get_or(j, "max_tokens", c.max_tokens);
  c.max_in_flight = get_or(j, "max_in_flight", c.max_in_flight);
  c.api_key_env = get_or(j, "api_key_env", c.api_key_env);
  c.request_timeout = std::chrono::milliseconds(get_or<std::int64_t>(j, "request_timeout_ms", c.request_timeout.count()));
  c.self_role = j.contains("role") ? parse_role(j.at("role").get<std::string>()) : default_role;
  c.script = resolve(base, get_or<std::string>(j, "script", "")).string();
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    c.retry.max_attempts = get_or(r, "max_attempts", c.retry.max_attempts);
    c.retry.initial_backoff =
        std::chrono::milliseconds(get_or<std::int64_t>(r, "initial_backoff_ms", c.retry.initial_backoff.count()));
    c.retry.backoff_multiplier = get_or(r, "multiplier", c.retry.backoff_multiplier);
  }
  c.validate();
  return c;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void require_file(const fs::path& path, std::string_view what) {
  if (path.empty()) throw StageError(std::string(what) + " is not set in the manifest");
  if (!fs::is_regular_file(path)) throw StageError("missing " + std::string(what) + ": '" + path.string() + "'");
}

std::vector<std::string> read_self_reports(const fs::path& path) {
  require_file(path, "self-report file");
  std::vector<std::string> out;
  std::istringstream in(read_text(path));
  for (std::string line; std::getline(in, line);) {
    auto t = text::trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  if (out.empty()) throw StageError("no self-reports in '" + path.string() + "'");
  return out;
}

RubricScale stage_scale(const RunManifest& m) {
  require_file(m.scale, "scale file");
  return load_scale_file(m.scale.string());
}

std::vector<std::shared_ptr<const Agent>> doctor_agents(const RunManifest& m) {
  if (m.doctors.empty()) throw StageError("no doctor agents in the manifest");
  std::vector<std::shared_ptr<const Agent>> out;
  for (const auto& d : m.doctors) out.push_back(make_agent(d));
  return out;
}

void write_provenance(const RunManifest& m, Stage stage, const std::vector<fs::path>& outputs) {
  json j;
  j["stage"] = std::string(to_string(stage));
  j["seed"] = m.seed;
  j["outputs"] = json::array();
  for (const auto& p : outputs) j["outputs"].push_back(fs::relative(p, m.output_dir).generic_string());
  write_text(m.output_dir / "provenance" / (std::string(to_string(stage)) + ".json"), j.dump(2) + "\n");
}

std::vector<JudgmentVector> read_judgments(const fs::path& path) {
  require_file(path, "judgment file");
  std::vector<JudgmentVector> out;
  for (const auto& a : read_annotations(path.string())) out.push_back(JudgmentVector::from_annotation(a));
  return out;
}

std::map<int, std::string> primary_names(const RubricScale& scale) {
  std::map<int, std::string> out;
  for (const auto& p : scale.primaries()) out[p.id] = p.name;
  return out;
}

void simulate(const RunManifest& m, std::ostream& log, std::vector<fs::path>& outputs) {
  const auto reports = read_self_reports(m.self_reports);
  if (!m.patient) throw StageError("no patient agent in the manifest");
  const auto patient = make_agent(*m.patient);
  std::size_t failures = 0;
  for (const auto& doctor : doctor_agents(m)) {
    const auto result = run_batch(reports, patient, doctor, m.limits, m.parallelism, m.seed, m.doctor_system_prompt);
    const auto path = transcripts_path(m, doctor->name());
    fs::create_directories(path.parent_path());
    write_corpus(path.string(), result.transcripts());
    outputs.push_back(path);
    for (const auto& e : result.errors) {
      log << "simulate: " << doctor->name() << " self-report " << e.index + 1 << ": " << e.message << "\n";
    }
    failures += result.errors.size();
    log << "simulate: " << doctor->name() << ": " << result.transcripts().size() << "/" << reports.size()
        << " dialogues -> " << path.string() << "\n";
  }
  if (failures) throw StageError(std::to_string(failures) + " consultation(s) failed");
}

void judge(const RunManifest& m, std::ostream& log, std::vector<fs::path>& outputs) {
  const auto scale = stage_scale(m);
  if (!m.judge) throw StageError("no judge agent in the manifest");
  if (!fs::is_directory(m.prompts)) throw StageError("missing prompt directory: '" + m.prompts.string() + "'");
  const auto prompts = load_prompt_set(m.prompts);
  const auto agent = make_agent(*m.judge);
  JudgeCache cache(m.cache_dir.empty() ? m.output_dir / "cache" : m.cache_dir);
  std::size_t incomplete = 0;
  for (const auto& d : m.doctors) {
    const auto name = make_agent(d)->name();
    const auto in = transcripts_path(m, name);
    require_file(in, "transcript file");
    const auto corpus = read_corpus(in.string());
    JudgeStats stats;
    const auto vectors = judge_corpus(*agent, scale, prompts, corpus, &cache, m.parallelism, &stats);
    std::vector<AnnotationRecord> records;
    for (const auto& v : vectors) {
      records.push_back(v.to_annotation());
      for (const auto& f : v.failures) {
        log << "judge: " << v.dialogue_id << " item " << f.item_id << ": " << f.message << "\n";
        ++incomplete;
      }
    }
    const auto out = judgments_path(m, name);
    fs::create_directories(out.parent_path());
    write_annotations(out.string(), records);
    outputs.push_back(out);
    log << "judge: " << name << ": " << vectors.size() << " dialogues, " << stats.agent_calls << " agent calls, "
        << stats.cache_hits << " cache hits -> " << out.string() << "\n";
  }
  if (incomplete) throw StageError(std::to_string(incomplete) + " item judgment(s) failed");
}

EvaluationReport metrics_report(const RunManifest& m, const RubricScale& scale) {
  require_file(m.metrics_judgments, "metrics judgment file");
  require_file(m.annotations, "annotation file");
  EvaluationReport r;
  r.primary_names = primary_names(scale);
  r.seed = m.seed;
  r.items = per_item_metrics(read_judgments(m.metrics_judgments), read_annotations(m.annotations.string()), scale);
  return r;
}

EvaluationReport score_report(const RunManifest& m, const RubricScale& scale) {
  const auto reports = read_self_reports(m.self_reports);
  std::map<std::string, std::vector<JudgmentVector>> per_model;
  for (const auto& d : m.doctors) {
    const auto name = make_agent(d)->name();
    per_model[name] = read_judgments(judgments_path(m, name));
  }
  if (per_model.empty()) throw StageError("no doctor agents in the manifest");
  EvaluationReport r;
  r.primary_names = primary_names(scale);
  r.seed = m.seed;
  r.scores = score_models(per_model, scale, static_cast<std::int64_t>(reports.size()));
  return r;
}

PsychometricReport psych_report(const RunManifest& m, const RubricScale& scale) {
  require_file(m.responses, "response table");
  auto r = psychometric_report(read_responses(m.responses.string()), scale);
  r.seed = m.seed;
  return r;
}

fs::path table_path(const RunManifest& m, std::string_view stem, TableFormat f) {
  return m.output_dir / (std::string(stem) + "." + std::string(extension(f)));
}

}  // namespace

AgentConfig parse_agent_config(const std::string& json_text, const fs::path& base_dir) {
  try {
    return agent_from_json(json::parse(json_text), base_dir, Role::kDoctor);
  } catch (const json::exception& e) {
    throw ParseError(std::string("agent config: ") + e.what());
  }
}

RunManifest parse_manifest(std::string_view document, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("manifest must be a JSON object");
  RunManifest m;
  try {
    const auto path = [&](const char* key) { return resolve(base_dir, get_or<std::string>(j, key, "")); };
    m.scale = path("scale");
    m.prompts = path("prompts");
    m.seed = get_or<std::int64_t>(j, "seed", 0);
    m.output_dir = path("output_dir");
    m.parallelism = get_or(j, "parallelism", 1);
    if (j.contains("limits")) {
      const auto& l = j.at("limits");
      m.limits.max_utterances = get_or<std::size_t>(l, "max_utterances", m.limits.max_utterances);
      m.limits.per_reply_timeout = std::chrono::milliseconds(get_or<std::int64_t>(l, "per_reply_timeout_ms", 0));
    }
    m.self_reports = path("self_reports");
    if (j.contains("patient")) m.patient = agent_from_json(j.at("patient"), base_dir, Role::kPatient);
    if (j.contains("doctors")) {
      for (const auto& d : j.at("doctors")) m.doctors.push_back(agent_from_json(d, base_dir, Role::kDoctor));
    }
    if (j.contains("judge")) m.judge = agent_from_json(j.at("judge"), base_dir, Role::kDoctor);
    m.cache_dir = path("cache_dir");
    m.metrics_judgments = path("metrics_judgments");
    m.annotations = path("annotations");
    m.responses = path("responses");
    m.doctor_system_prompt = get_or<std::string>(j, "doctor_system_prompt", m.doctor_system_prompt);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (m.output_dir.empty()) m.output_dir = base_dir.empty() ? fs::path("out") : base_dir / "out";
  if (m.parallelism < 1) throw ValidationError("manifest: parallelism must be positive");
  m.limits.validate();
  return m;
}

RunManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_text(path), path.parent_path());
}

Stage parse_stage(std::string_view s) {
  static const std::map<std::string_view, Stage> kStages{
      {"simulate", Stage::kSimulate}, {"judge", Stage::kJudge},   {"metrics", Stage::kMetrics},
      {"score", Stage::kScore},       {"psych", Stage::kPsych},   {"report", Stage::kReport},
      {"validate-scale", Stage::kValidateScale}};
  auto it = kStages.find(s);
  if (it == kStages.end()) throw ValidationError("unknown stage '" + std::string(s) + "'");
  return it->second;
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kSimulate: return "simulate";
    case Stage::kJudge: return "judge";
    case Stage::kMetrics: return "metrics";
    case Stage::kScore: return "score";
    case Stage::kPsych: return "psych";
    case Stage::kReport: return "report";
    case Stage::kValidateScale: return "validate-scale";
  }
  return "?";
}

std::string artifact_name(std::string_view model) {
  std::string out;
  for (char c : model) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

fs::path transcripts_path(const RunManifest& m, std::string_view model) {
  return m.output_dir / "transcripts" / (artifact_name(model) + ".jsonl");
}

fs::path judgments_path(const RunManifest& m, std::string_view model) {
  return m.output_dir / "judgments" / (artifact_name(model) + ".jsonl");
}

void run_stage(const RunManifest& m, Stage stage, TableFormat format, std::ostream& log) {
  std::vector<fs::path> outputs;
  switch (stage) {
    case Stage::kSimulate:
      simulate(m, log, outputs);
      break;
    case Stage::kJudge:
      judge(m, log, outputs);
      break;
    case Stage::kMetrics: {
      const auto path = table_path(m, "metrics", format);
      write_text(path, render_item_metrics(metrics_report(m, stage_scale(m)), format));
      outputs.push_back(path);
      break;
    }
    case Stage::kScore: {
      const auto path = table_path(m, "scores", format);
      write_text(path, render_scores(score_report(m, stage_scale(m)), format));
      outputs.push_back(path);
      break;
    }
    case Stage::kPsych: {
      const auto path = table_path(m, "psych", format);
      write_text(path, render_tables(psych_report(m, stage_scale(m)), format));
      outputs.push_back(path);
      break;
    }
    case Stage::kReport: {
      const auto scale = stage_scale(m);
      EvaluationReport r = score_report(m, scale);
      if (!m.metrics_judgments.empty() || !m.annotations.empty()) r.items = metrics_report(m, scale).items;
      std::string text = render_tables(r, format);
      if (!m.responses.empty()) {
        auto psych = psych_report(m, scale);
        psych.seed.reset();
        text += "\n" + render_tables(psych, format);
      }
      const auto path = table_path(m, "report", format);
      write_text(path, text);
      outputs.push_back(path);
      break;
    }
    case Stage::kValidateScale: {
      const auto scale = stage_scale(m);
      if (!m.prompts.empty()) {
        if (!fs::is_directory(m.prompts)) throw StageError("missing prompt directory: '" + m.prompts.string() + "'");
        const auto prompts = load_prompt_set(m.prompts);
        for (const auto& id : scale.scoreable_ids()) prompts.at(id);
      }
      log << "scale " << scale.version() << ": " << scale.primaries().size() << " primary items, "
          << scale.item_count() << " secondary items, " << scale.scoreable_ids().size() << " scoreable\n";
      return;
    }
  }
  for (const auto& p : outputs) log << to_string(stage) << ": wrote " << p.string() << "\n";
  write_provenance(m, stage, outputs);
}

int run_pipeline(const RunManifest& m, Stage stage, TableFormat format, std::ostream& log) {
  try {
    run_stage(m, stage, format, log);
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << to_string(stage) << ": " << e.what() << "\n";
    return kExitStageFailure;
  }
}

}  // namespace minicex
