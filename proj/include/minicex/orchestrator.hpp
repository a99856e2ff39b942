#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "minicex/corpus.hpp"
#include "minicex/gateway.hpp"

namespace minicex {

struct ConsultationLimits {
  std::size_t max_utterances = 40;
  /// Zero disables the per-reply deadline.
  std::chrono::milliseconds per_reply_timeout{0};

  void validate() const;
};

/// Agent failure mid-dialogue. Carries what had been said so far.
class ConsultationError : public Error {
 public:
  ConsultationError(const std::string& what, DialogueTranscript partial)
      : Error(what), partial_(std::move(partial)) {}
  const DialogueTranscript& partial() const noexcept { return partial_; }

 private:
  DialogueTranscript partial_;
};

struct ConsultationOptions {
  std::string dialogue_id = "dialogue";
  /// Prepended as a system message to every doctor request when non-empty.
  std::string doctor_system_prompt;
  std::optional<std::int64_t> seed;
};

inline constexpr std::string_view kDefaultDoctorPrompt =
    "You are a physician consulting with a patient. Ask about the patient's condition, then give a "
    "diagnosis and treatment advice.";

/// Runs one patient/doctor consultation. The patient opens with the
/// self-report, the doctor sees the whole running transcript each turn, and
/// the loop ends when the patient emits kEndSignal (not stored) or when
/// max_utterances is reached (meta.truncated = true).
DialogueTranscript run_consultation(const std::shared_ptr<const Agent>& patient,
                                    const std::shared_ptr<const Agent>& doctor, const std::string& self_report,
                                    const ConsultationLimits& limits, const ConsultationOptions& options = {});

struct BatchError {
  std::size_t index;
  std::string self_report;
  std::string message;
  std::optional<DialogueTranscript> partial;
};

struct BatchResult {
  /// One slot per input self-report; empty where the dialogue failed.
  std::vector<std::optional<DialogueTranscript>> slots;
  std::vector<BatchError> errors;

  Corpus transcripts() const;
};

/// Dialogue id for the i-th self-report of a batch.
std::string batch_dialogue_id(const std::string& model, std::int64_t seed, std::size_t index);

/// Runs every consultation, up to `parallelism` at a time. Output order
/// follows input order; failures are recorded without aborting the batch.
BatchResult run_batch(const std::vector<std::string>& self_reports, const std::shared_ptr<const Agent>& patient,
                      const std::shared_ptr<const Agent>& doctor, const ConsultationLimits& limits,
                      int parallelism, std::int64_t seed, const std::string& doctor_system_prompt = {});

}  // namespace minicex
