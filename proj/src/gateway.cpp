#include "minicex/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "minicex/text.hpp"

namespace minicex {

using json = nlohmann::json;

namespace {

std::atomic<std::uint64_t> g_network_requests{0};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_doc(std::string_view document, const char* what) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

const ChatMessage* last_message(std::span<const ChatMessage> messages) {
  return messages.empty() ? nullptr : &messages.back();
}

}  // namespace

std::string_view to_string(MessageRole role) {
  switch (role) {
    case MessageRole::kSystem: return "system";
    case MessageRole::kPatient: return "patient";
    case MessageRole::kDoctor: return "doctor";
    case MessageRole::kUser: return "user";
  }
  return "user";
}

MessageRole message_role(Role role) { return role == Role::kPatient ? MessageRole::kPatient : MessageRole::kDoctor; }

void AgentConfig::validate() const {
  if (temperature < 0) throw ValidationError("agent temperature must be >= 0");
  if (retry.max_attempts < 1) throw ValidationError("retry max_attempts must be >= 1");
  if (retry.backoff_multiplier < 1.0) throw ValidationError("retry backoff multiplier must be >= 1");
  if (max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
  if (max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
  if (endpoint.empty()) throw ValidationError("agent endpoint is empty");
}

std::uint64_t network_request_count() { return g_network_requests.load(); }

// ---------------------------------------------------------------------------

ScriptedAgent::ScriptedAgent(std::string name, std::vector<std::string> replies, MessageRole self_role)
    : name_(std::move(name)), replies_(std::move(replies)), self_role_(self_role) {}

std::string ScriptedAgent::complete(std::span<const ChatMessage> messages) const {
  const auto turn = static_cast<std::size_t>(
      std::count_if(messages.begin(), messages.end(), [&](const ChatMessage& m) { return m.role == self_role_; }));
  if (turn >= replies_.size()) {
    throw AgentError("scripted agent '" + name_ + "' has no reply for turn " + std::to_string(turn + 1));
  }
  return replies_[turn];
}

std::shared_ptr<ScriptedAgent> load_scripted_agent(const std::string& path, MessageRole self_role,
                                                   const std::string& name) {
  const auto doc = parse_doc(read_file(path), path.c_str());
  try {
    return std::make_shared<ScriptedAgent>(name.empty() ? doc.value("model", std::string("scripted")) : name,
                                           doc.at("replies").get<std::vector<std::string>>(), self_role);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

ToyLanguageModel::ToyLanguageModel(std::vector<std::string> vocabulary, std::string end_symbol,
                                   std::map<Context, std::map<std::string, double>> transitions)
    : vocabulary_(std::move(vocabulary)), end_symbol_(std::move(end_symbol)) {
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (std::find(vocabulary_.begin() + static_cast<std::ptrdiff_t>(i) + 1, vocabulary_.end(), vocabulary_[i]) !=
        vocabulary_.end()) {
      throw ValidationError("duplicate vocabulary token '" + vocabulary_[i] + "'");
    }
  }
  if (!contains(end_symbol_)) throw ValidationError("end symbol '" + end_symbol_ + "' not in vocabulary");
  for (auto& [context, probs] : transitions) {
    for (const auto& tok : context) {
      if (!contains(tok)) throw ValidationError("context token '" + tok + "' not in vocabulary");
    }
    std::vector<double> dist(vocabulary_.size(), 0.0);
    double sum = 0.0;
    for (const auto& [tok, p] : probs) {
      if (!contains(tok)) throw ValidationError("token '" + tok + "' not in vocabulary");
      if (!(p >= 0.0)) throw ValidationError("negative probability for '" + tok + "'");
      dist[index_of(tok)] = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("distribution for a context sums to " + std::to_string(sum) + ", not 1");
    }
    max_context_ = std::max(max_context_, context.size());
    table_.emplace(context, std::move(dist));
  }
}

bool ToyLanguageModel::contains(std::string_view token) const {
  return std::find(vocabulary_.begin(), vocabulary_.end(), token) != vocabulary_.end();
}

std::size_t ToyLanguageModel::index_of(std::string_view token) const {
  auto it = std::find(vocabulary_.begin(), vocabulary_.end(), token);
  if (it == vocabulary_.end()) throw ValidationError("token '" + std::string(token) + "' not in vocabulary");
  return static_cast<std::size_t>(it - vocabulary_.begin());
}

const std::vector<double>& ToyLanguageModel::next_distribution(std::span<const std::string> sequence) const {
  const std::size_t longest = std::min(max_context_, sequence.size());
  for (std::size_t len = longest + 1; len-- > 0;) {
    Context ctx(sequence.end() - static_cast<std::ptrdiff_t>(len), sequence.end());
    if (auto it = table_.find(ctx); it != table_.end()) return it->second;
  }
  throw ValidationError("toy model has no distribution for the current context");
}

ToyLanguageModel load_toy_model(std::string_view document) {
  const auto doc = parse_doc(document, "toy model");
  try {
    std::map<ToyLanguageModel::Context, std::map<std::string, double>> transitions;
    for (const auto& row : doc.at("transitions")) {
      auto ctx = row.at("context").get<ToyLanguageModel::Context>();
      if (!transitions.emplace(ctx, row.at("probs").get<std::map<std::string, double>>()).second) {
        throw ValidationError("duplicate context in toy model");
      }
    }
    return ToyLanguageModel(doc.at("vocabulary").get<std::vector<std::string>>(), doc.at("end").get<std::string>(),
                            std::move(transitions));
  } catch (const json::exception& e) {
    throw ParseError(std::string("toy model: ") + e.what());
  }
}

ToyLanguageModel load_toy_model_file(const std::string& path) { return load_toy_model(read_file(path)); }

std::vector<std::string> greedy_decode(const ToyLanguageModel& model, std::vector<std::string> prefix,
                                       std::size_t max_len) {
  for (const auto& tok : prefix) {
    if (!model.contains(tok)) throw ValidationError("prefix token '" + tok + "' not in vocabulary");
  }
  for (std::size_t step = 0; step < max_len; ++step) {
    const auto& dist = model.next_distribution(prefix);
    // Strict '>' keeps the lowest index among ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i) {
      if (dist[i] > dist[best]) best = i;
    }
    prefix.push_back(model.vocabulary()[best]);
    if (prefix.back() == model.end_symbol()) break;
  }
  return prefix;
}

ToyAgent::ToyAgent(std::string name, std::shared_ptr<const ToyLanguageModel> model, std::size_t max_tokens)
    : name_(std::move(name)), model_(std::move(model)), max_tokens_(max_tokens) {}

std::string ToyAgent::complete(std::span<const ChatMessage> messages) const {
  std::vector<std::string> prefix;
  if (const auto* last = last_message(messages)) {
    std::istringstream in(last->text);
    for (std::string tok; in >> tok;) {
      if (model_->contains(tok) && tok != model_->end_symbol()) prefix.push_back(tok);
    }
  }
  const auto prompt_len = prefix.size();
  const auto out = greedy_decode(*model_, std::move(prefix), max_tokens_);
  std::string reply;
  for (std::size_t i = prompt_len; i < out.size(); ++i) {
    if (out[i] == model_->end_symbol()) break;
    if (!reply.empty()) reply += ' ';
    reply += out[i];
  }
  if (reply.empty()) return std::string(kEndSignal);
  return reply;
}

// ---------------------------------------------------------------------------

std::string scripted_patient_reply(std::string_view /*self_report*/, std::span<const ChatMessage> history,
                                   const FactTable& script) {
  std::vector<bool> disclosed(script.facts.size(), false);
  const ChatMessage* last_doctor = nullptr;
  for (const auto& m : history) {
    if (m.role == MessageRole::kDoctor) last_doctor = &m;
    if (m.role != MessageRole::kPatient) continue;
    for (std::size_t i = 0; i < script.facts.size(); ++i) {
      if (m.text == script.facts[i].sentence) disclosed[i] = true;
    }
  }
  if (std::all_of(disclosed.begin(), disclosed.end(), [](bool d) { return d; })) {
    return std::string(kEndSignal);
  }
  if (last_doctor) {
    const auto question = text::ascii_lower(last_doctor->text);
    for (std::size_t i = 0; i < script.facts.size(); ++i) {
      if (disclosed[i]) continue;
      for (const auto& kw : script.facts[i].keywords) {
        if (!kw.empty() && question.find(text::ascii_lower(kw)) != std::string::npos) {
          return script.facts[i].sentence;
        }
      }
    }
  }
  return script.fallback;
}

namespace {

FactTable fact_table_from_json(const json& j, const std::string& fallback) {
  FactTable table;
  table.fallback = j.value("fallback", fallback);
  for (const auto& f : j.at("facts")) {
    Fact fact{f.at("keywords").get<std::vector<std::string>>(), f.at("fact").get<std::string>()};
    if (text::trim(fact.sentence).empty()) throw ValidationError("fact with empty sentence");
    if (fact.sentence == kEndSignal) throw ValidationError("fact sentence equals the end signal");
    table.facts.push_back(std::move(fact));
  }
  return table;
}

}  // namespace

FactTable load_fact_table(std::string_view document) {
  const auto doc = parse_doc(document, "fact table");
  try {
    return fact_table_from_json(doc, FactTable{}.fallback);
  } catch (const json::exception& e) {
    throw ParseError(std::string("fact table: ") + e.what());
  }
}

FactLibrary load_fact_library(std::string_view document) {
  const auto doc = parse_doc(document, "fact library");
  FactLibrary lib;
  try {
    lib.fallback = doc.value("fallback", lib.fallback);
    for (const auto& c : doc.at("cases")) {
      auto report = c.at("self_report").get<std::string>();
      if (!lib.cases.emplace(report, fact_table_from_json(c, lib.fallback)).second) {
        throw ValidationError("duplicate self-report in fact library: '" + report + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("fact library: ") + e.what());
  }
  return lib;
}

FactLibrary load_fact_library_file(const std::string& path) { return load_fact_library(read_file(path)); }

ScriptedPatientAgent::ScriptedPatientAgent(std::string name, FactLibrary library)
    : name_(std::move(name)), library_(std::move(library)) {}

std::string ScriptedPatientAgent::complete(std::span<const ChatMessage> messages) const {
  auto first = std::find_if(messages.begin(), messages.end(),
                            [](const ChatMessage& m) { return m.role == MessageRole::kPatient; });
  const std::string self_report = first == messages.end() ? std::string() : first->text;
  if (auto it = library_.cases.find(self_report); it != library_.cases.end()) {
    return scripted_patient_reply(self_report, messages, it->second);
  }
  FactTable empty;
  empty.fallback = library_.fallback;
  return scripted_patient_reply(self_report, messages, empty);
}

// ---------------------------------------------------------------------------

MockJudgeAgent::MockJudgeAgent(std::string name, std::vector<JudgeRule> rules, std::string default_reply)
    : name_(std::move(name)), rules_(std::move(rules)), default_reply_(std::move(default_reply)) {}

std::string MockJudgeAgent::complete(std::span<const ChatMessage> messages) const {
  const auto* last = last_message(messages);
  const std::string prompt = last ? last->text : std::string();
  for (const auto& rule : rules_) {
    const bool hit = std::all_of(rule.all_of.begin(), rule.all_of.end(),
                                 [&](const std::string& s) { return prompt.find(s) != std::string::npos; });
    if (hit) return rule.reply;
  }
  return default_reply_;
}

std::shared_ptr<MockJudgeAgent> load_mock_judge_file(const std::string& path) {
  const auto doc = parse_doc(read_file(path), path.c_str());
  try {
    std::vector<JudgeRule> rules;
    for (const auto& r : doc.value("rules", json::array())) {
      rules.push_back({r.at("all_of").get<std::vector<std::string>>(), r.at("reply").get<std::string>()});
    }
    return std::make_shared<MockJudgeAgent>(doc.value("model", std::string("mock-judge")), std::move(rules),
                                            doc.value("default", std::string("yes")));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

struct SemaphoreGuard {
  std::counting_semaphore<>& sem;
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
};

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpChatAgent::HttpChatAgent(AgentConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint '" + url + "' is not a URL");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ValidationError("unsupported URL scheme '" + scheme + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ValidationError("built without TLS support; https endpoints unavailable");
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  in_flight_ = std::make_unique<std::counting_semaphore<>>(config_.max_in_flight);
}

HttpChatAgent::~HttpChatAgent() = default;

std::string HttpChatAgent::request_body(std::span<const ChatMessage> messages) const {
  const auto self = message_role(config_.self_role);
  json msgs = json::array();
  for (const auto& m : messages) {
    std::string role;
    if (m.role == MessageRole::kSystem) {
      role = "system";
    } else if (m.role == self) {
      role = "assistant";
    } else {
      role = "user";
    }
    msgs.push_back({{"role", role}, {"content", m.text}});
  }
  json body{{"model", config_.model_name},
            {"messages", std::move(msgs)},
            {"temperature", config_.temperature},
            {"max_tokens", config_.max_tokens}};
  return body.dump();
}

std::string HttpChatAgent::complete(std::span<const ChatMessage> messages) const {
  const auto body = request_body(messages);
  const std::string path = path_prefix_ + "/chat/completions";
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto backoff = config_.retry.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(backoff.count()) * config_.retry.backoff_multiplier));
    }
    httplib::Result res;
    {
      SemaphoreGuard guard(*in_flight_);
      httplib::Client client(scheme_host_port_);
      const auto secs = config_.request_timeout.count() / 1000;
      const auto usecs = (config_.request_timeout.count() % 1000) * 1000;
      client.set_connection_timeout(secs, usecs);
      client.set_read_timeout(secs, usecs);
      client.set_write_timeout(secs, usecs);
      ++g_network_requests;
      res = client.Post(path, headers, body, "application/json");
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw AgentError(config_.model_name + ": " + last_error, attempt);
    }
    try {
      const auto reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw AgentError(config_.model_name + ": malformed response: " + e.what(), attempt);
    }
  }
  throw AgentError(config_.model_name + ": giving up after " + std::to_string(config_.retry.max_attempts) +
                       " attempts (" + last_error + ")",
                   config_.retry.max_attempts);
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Agent> make_agent(const AgentConfig& config) {
  config.validate();
  const auto& ep = config.endpoint;
  const auto self = message_role(config.self_role);
  if (ep == "scripted") return load_scripted_agent(config.script, self, config.model_name);
  if (ep == "scripted-patient") {
    return std::make_shared<ScriptedPatientAgent>(config.model_name.empty() ? "scripted-patient" : config.model_name,
                                                  load_fact_library_file(config.script));
  }
  if (ep == "toy") {
    auto model = std::make_shared<const ToyLanguageModel>(load_toy_model_file(config.script));
    return std::make_shared<ToyAgent>(config.model_name.empty() ? "toy" : config.model_name, std::move(model),
                                      static_cast<std::size_t>(config.max_tokens));
  }
  if (ep == "mock-judge") return load_mock_judge_file(config.script);
  return std::make_shared<HttpChatAgent>(config);
}

}  // namespace minicex
