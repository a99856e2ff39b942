#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minicex/corpus.hpp"
#include "minicex/error.hpp"

namespace minicex {

/// Reserved end-of-consultation sentinel. Never stored in a transcript.
inline constexpr std::string_view kEndSignal = "<END_OF_CONSULTATION>";

enum class MessageRole { kSystem, kPatient, kDoctor, kUser };

std::string_view to_string(MessageRole role);
MessageRole message_role(Role role);

struct ChatMessage {
  MessageRole role = MessageRole::kUser;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

/// Raised when an agent cannot produce a reply.
class AgentError : public Error {
 public:
  AgentError(const std::string& what, int attempts = 1) : Error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  double backoff_multiplier = 2.0;
};

struct AgentConfig {
  std::string endpoint;  // http(s) base URL, "scripted", "scripted-patient", "toy" or "mock-judge"
  std::string model_name;
  double temperature = 0.0;
  int max_tokens = 512;
  RetryPolicy retry;
  int max_in_flight = 4;
  Role self_role = Role::kDoctor;  // which transcript role maps to "assistant"
  std::string script;              // data file for the local endpoints
  std::string api_key_env = "MINICEX_API_KEY";
  std::chrono::milliseconds request_timeout{60000};

  /// Throws ValidationError on temperature < 0, max_attempts < 1, etc.
  void validate() const;
};

/// A chat participant. Implementations are safe for concurrent use.
class Agent {
 public:
  virtual ~Agent() = default;

  /// One reply to the conversation so far.
  virtual std::string complete(std::span<const ChatMessage> messages) const = 0;

  virtual std::string name() const = 0;
  virtual double temperature() const { return 0.0; }
};

/// Convenience wrapper mirroring the gateway's single entry point.
inline std::string complete(const Agent& agent, std::span<const ChatMessage> messages) {
  return agent.complete(messages);
}

/// Total HTTP attempts issued by every HttpChatAgent in this process.
std::uint64_t network_request_count();

/// Replies from a canned list. The reply index is the number of earlier
/// messages in the conversation sent by this agent's role, so the agent is
/// stateless and deterministic under concurrency. Running out of replies is
/// an AgentError.
class ScriptedAgent : public Agent {
 public:
  ScriptedAgent(std::string name, std::vector<std::string> replies, MessageRole self_role = MessageRole::kDoctor);

  std::string complete(std::span<const ChatMessage> messages) const override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
  std::vector<std::string> replies_;
  MessageRole self_role_;
};

/// Reads {"model": ..., "replies": [...]}; a non-empty `name` overrides "model".
std::shared_ptr<ScriptedAgent> load_scripted_agent(const std::string& path, MessageRole self_role,
                                                   const std::string& name = {});

// ---------------------------------------------------------------------------
// Toy next-token model with greedy decoding.

/// Bounded-context conditional distributions over a fixed vocabulary. The
/// distribution for a sequence is the one stored for its longest suffix that
/// has an entry; the empty context acts as the fallback.
class ToyLanguageModel {
 public:
  using Context = std::vector<std::string>;

  ToyLanguageModel(std::vector<std::string> vocabulary, std::string end_symbol,
                   std::map<Context, std::map<std::string, double>> transitions);

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::string& end_symbol() const { return end_symbol_; }
  bool contains(std::string_view token) const;
  std::size_t index_of(std::string_view token) const;

  /// p(x | sequence) for every x, in vocabulary order.
  const std::vector<double>& next_distribution(std::span<const std::string> sequence) const;

 private:
  std::vector<std::string> vocabulary_;
  std::string end_symbol_;
  std::map<Context, std::vector<double>> table_;
  std::size_t max_context_ = 0;
};

ToyLanguageModel load_toy_model(std::string_view document);
ToyLanguageModel load_toy_model_file(const std::string& path);

/// Appends argmax tokens until the end symbol is emitted or `max_len` new
/// tokens exist. Ties go to the lowest vocabulary index.
std::vector<std::string> greedy_decode(const ToyLanguageModel& model, std::vector<std::string> prefix,
                                       std::size_t max_len);

/// Toy model as an agent: the prompt is the in-vocabulary whitespace tokens
/// of the last message; the reply is the generated continuation without the
/// end symbol, or kEndSignal when nothing but the end symbol was produced.
class ToyAgent : public Agent {
 public:
  ToyAgent(std::string name, std::shared_ptr<const ToyLanguageModel> model, std::size_t max_tokens);

  std::string complete(std::span<const ChatMessage> messages) const override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
  std::shared_ptr<const ToyLanguageModel> model_;
  std::size_t max_tokens_;
};

// ---------------------------------------------------------------------------
// Scripted patient.

struct Fact {
  std::vector<std::string> keywords;  // matched case-insensitively as substrings
  std::string sentence;

  bool operator==(const Fact&) const = default;
};

struct FactTable {
  std::vector<Fact> facts;
  std::string fallback = "I'm not sure, I haven't noticed anything like that.";
};

/// Pure reply rule for the scripted patient. A fact counts as disclosed
/// once a patient message in `history` equals its sentence.
///  - every fact disclosed         -> kEndSignal
///  - last doctor message matches an undisclosed fact's keyword -> that fact
///  - otherwise                    -> the fallback
std::string scripted_patient_reply(std::string_view self_report, std::span<const ChatMessage> history,
                                   const FactTable& script);

/// Fact tables keyed by self-report.
struct FactLibrary {
  std::map<std::string, FactTable> cases;
  std::string fallback = FactTable{}.fallback;
};

FactTable load_fact_table(std::string_view document);
FactLibrary load_fact_library(std::string_view document);
FactLibrary load_fact_library_file(const std::string& path);

/// Looks up the fact table by the opening self-report (the first patient
/// message). Unknown self-reports get an empty table and end immediately.
class ScriptedPatientAgent : public Agent {
 public:
  ScriptedPatientAgent(std::string name, FactLibrary library);

  std::string complete(std::span<const ChatMessage> messages) const override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
  FactLibrary library_;
};

// ---------------------------------------------------------------------------
// Table-driven judge stand-in.

struct JudgeRule {
  std::vector<std::string> all_of;  // substrings that must all occur in the prompt
  std::string reply;
};

/// First rule whose substrings all occur in the last message wins.
class MockJudgeAgent : public Agent {
 public:
  MockJudgeAgent(std::string name, std::vector<JudgeRule> rules, std::string default_reply);

  std::string complete(std::span<const ChatMessage> messages) const override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
  std::vector<JudgeRule> rules_;
  std::string default_reply_;
};

std::shared_ptr<MockJudgeAgent> load_mock_judge_file(const std::string& path);

// ---------------------------------------------------------------------------
// Remote chat-completion endpoint.

/// POSTs {model, messages, temperature, max_tokens} to
/// <base>/chat/completions and returns choices[0].message.content. The bearer
/// credential comes from the environment variable named in the config.
/// Transport errors and 408/429/5xx replies are retried with exponential
/// backoff; concurrent requests are capped at max_in_flight.
class HttpChatAgent : public Agent {
 public:
  explicit HttpChatAgent(AgentConfig config);
  ~HttpChatAgent() override;

  std::string complete(std::span<const ChatMessage> messages) const override;
  std::string name() const override { return config_.model_name; }
  double temperature() const override { return config_.temperature; }

  /// Request body for `messages`, as sent on the wire.
  std::string request_body(std::span<const ChatMessage> messages) const;

 private:
  AgentConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

/// Builds the agent named by `config.endpoint`.
std::shared_ptr<const Agent> make_agent(const AgentConfig& config);

}  // namespace minicex
