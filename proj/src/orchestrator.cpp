#include "minicex/orchestrator.hpp"

#include <cstdio>
#include <future>
#include <thread>

#include "minicex/text.hpp"

namespace minicex {

void ConsultationLimits::validate() const {
  if (max_utterances < 2) throw ValidationError("max_utterances must be at least 2");
  if (per_reply_timeout.count() < 0) throw ValidationError("per_reply_timeout must be non-negative");
}

namespace {

std::vector<ChatMessage> history(const DialogueTranscript& t, const std::string& system_prompt) {
  std::vector<ChatMessage> out;
  out.reserve(t.utterances.size() + 1);
  if (!system_prompt.empty()) out.push_back({MessageRole::kSystem, system_prompt});
  for (const auto& u : t.utterances) out.push_back({message_role(u.role), u.text});
  return out;
}

/// Calls the agent, honoring the deadline. A timed-out call keeps running
/// on a detached thread that owns a reference to the agent.
std::string call_agent(const std::shared_ptr<const Agent>& agent, std::vector<ChatMessage> messages,
                       std::chrono::milliseconds timeout) {
  if (timeout.count() == 0) return agent->complete(messages);
  auto promise = std::make_shared<std::promise<std::string>>();
  auto future = promise->get_future();
  std::thread([agent, promise, messages = std::move(messages)] {
    try {
      promise->set_value(agent->complete(messages));
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();
  if (future.wait_for(timeout) != std::future_status::ready) {
    throw AgentError(agent->name() + ": no reply within " + std::to_string(timeout.count()) + " ms");
  }
  return future.get();
}

void append(DialogueTranscript& t, Role role, std::string text) {
  t.utterances.push_back({role, std::move(text), t.utterances.size()});
}

}  // namespace

DialogueTranscript run_consultation(const std::shared_ptr<const Agent>& patient,
                                    const std::shared_ptr<const Agent>& doctor, const std::string& self_report,
                                    const ConsultationLimits& limits, const ConsultationOptions& options) {
  limits.validate();
  if (text::trim(self_report).empty()) throw ValidationError("empty self-report");
  if (self_report.find(kEndSignal) != std::string::npos) {
    throw ValidationError("self-report contains the reserved end signal");
  }

  DialogueTranscript t;
  t.id = options.dialogue_id;
  t.self_report = self_report;
  t.meta.model = doctor->name();
  t.meta.temperature = doctor->temperature();
  t.meta.seed = options.seed;
  append(t, Role::kPatient, self_report);

  const auto fail = [&](const std::string& who, const std::exception& e) -> ConsultationError {
    return ConsultationError("dialogue '" + t.id + "': " + who + " failed after " +
                                 std::to_string(t.utterances.size()) + " utterances: " + e.what(),
                             t);
  };

  while (true) {
    if (t.utterances.size() >= limits.max_utterances) {
      t.meta.truncated = true;
      break;
    }
    std::string reply;
    try {
      reply = call_agent(doctor, history(t, options.doctor_system_prompt), limits.per_reply_timeout);
      if (reply.find(kEndSignal) != std::string::npos) throw AgentError("doctor emitted the reserved end signal");
      if (text::trim(reply).empty()) throw AgentError("empty reply");
    } catch (const std::exception& e) {
      throw fail("doctor", e);
    }
    append(t, Role::kDoctor, std::move(reply));

    if (t.utterances.size() >= limits.max_utterances) {
      t.meta.truncated = true;
      break;
    }
    try {
      reply = call_agent(patient, history(t, {}), limits.per_reply_timeout);
    } catch (const std::exception& e) {
      throw fail("patient", e);
    }
    if (const auto end = reply.find(kEndSignal); end != std::string::npos) {
      // Text preceding the end symbol is the patient's closing line.
      const auto closing = text::trim(std::string_view(reply).substr(0, end));
      if (!closing.empty()) append(t, Role::kPatient, std::string(closing));
      break;
    }
    if (text::trim(reply).empty()) {
      AgentError e("empty reply");
      throw fail("patient", e);
    }
    append(t, Role::kPatient, std::move(reply));
  }
  return t;
}

Corpus BatchResult::transcripts() const {
  Corpus out;
  for (const auto& s : slots) {
    if (s) out.push_back(*s);
  }
  return out;
}

std::string batch_dialogue_id(const std::string& model, std::int64_t seed, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return model + "-s" + std::to_string(seed) + "-" + buf;
}

BatchResult run_batch(const std::vector<std::string>& self_reports, const std::shared_ptr<const Agent>& patient,
                      const std::shared_ptr<const Agent>& doctor, const ConsultationLimits& limits,
                      int parallelism, std::int64_t seed, const std::string& doctor_system_prompt) {
  if (parallelism < 1) throw ValidationError("parallelism must be at least 1");
  limits.validate();

  const auto n = static_cast<std::int64_t>(self_reports.size());
  std::vector<std::optional<DialogueTranscript>> slots(self_reports.size());
  std::vector<std::optional<BatchError>> failures(self_reports.size());
  const std::string model = doctor->name();

#pragma omp parallel for schedule(dynamic, 1) num_threads(parallelism)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    ConsultationOptions options{batch_dialogue_id(model, seed, idx), doctor_system_prompt, seed};
    try {
      slots[idx] = run_consultation(patient, doctor, self_reports[idx], limits, options);
    } catch (const ConsultationError& e) {
      failures[idx] = BatchError{idx, self_reports[idx], e.what(), e.partial()};
    } catch (const std::exception& e) {
      failures[idx] = BatchError{idx, self_reports[idx], e.what(), std::nullopt};
    }
  }

  BatchResult result;
  result.slots = std::move(slots);
  for (auto& f : failures) {
    if (f) result.errors.push_back(std::move(*f));
  }
  return result;
}

}  // namespace minicex
