#include "minicex/judge.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "minicex/text.hpp"

namespace minicex {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = haystack.find(needle); p != std::string_view::npos; p = haystack.find(needle, p + needle.size())) ++n;
  return n;
}

}  // namespace

void JudgePrompt::validate() const {
  for (auto ph : {kItemPlaceholder, kDialoguePlaceholder}) {
    const auto n = count_occurrences(template_text, ph);
    if (n != 1) {
      throw ValidationError("prompt for item '" + item_id + "' must contain " + std::string(ph) +
                            " exactly once (found " + std::to_string(n) + ")");
    }
  }
}

const JudgePrompt& PromptSet::at(const std::string& item_id) const {
  auto it = prompts.find(item_id);
  if (it == prompts.end()) {
    throw ValidationError("no judge prompt for item '" + item_id + "' in version '" + version + "'");
  }
  return it->second;
}

PromptSet load_prompt_set(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("prompt directory '" + dir.string() + "' not found");
  PromptSet set;
  set.version = fs::path(dir).lexically_normal().filename().string();
  if (set.version.empty()) set.version = fs::path(dir).lexically_normal().parent_path().filename().string();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    JudgePrompt p{entry.path().stem().string(), ss.str(), set.version};
    p.validate();
    set.prompts.emplace(p.item_id, std::move(p));
  }
  return set;
}

std::string serialize_dialogue(const DialogueTranscript& t) {
  std::string out;
  for (const auto& u : t.utterances) {
    out += u.role == Role::kPatient ? "Patient: " : "Doctor: ";
    out += u.text;
    out += '\n';
  }
  return out;
}

std::string render_prompt(const JudgePrompt& prompt, const SecondaryItem& item, const DialogueTranscript& t) {
  prompt.validate();
  // Replace back to front by position; substituted text is never rescanned.
  std::string out = prompt.template_text;
  const auto item_pos = out.find(kItemPlaceholder);
  const auto dlg_pos = out.find(kDialoguePlaceholder);
  const std::string dialogue = serialize_dialogue(t);
  if (item_pos > dlg_pos) {
    out.replace(item_pos, kItemPlaceholder.size(), item.text);
    out.replace(dlg_pos, kDialoguePlaceholder.size(), dialogue);
  } else {
    out.replace(dlg_pos, kDialoguePlaceholder.size(), dialogue);
    out.replace(item_pos, kItemPlaceholder.size(), item.text);
  }
  return out;
}

std::string leading_token(std::string_view reply) {
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  // Skip anything that is neither a word character nor a CJK character.
  while (pos < reply.size()) {
    const auto here = pos;
    const char32_t cp = text::next_code_point(reply, pos);
    if (text::is_word_char(cp) || text::is_cjk(cp)) {
      start = here;
      break;
    }
  }
  if (start == std::string_view::npos) return {};
  std::size_t end = start;
  pos = start;
  while (pos < reply.size()) {
    const char32_t cp = text::next_code_point(reply, pos);
    if (!text::is_word_char(cp) && !text::is_cjk(cp)) break;
    end = pos;
  }
  return text::ascii_lower(reply.substr(start, end - start));
}

int parse_feedback(std::string_view reply, const FeedbackRules& rules) {
  if (text::trim(reply).empty()) throw ValidationError("empty judge feedback");
  return rules.negatives.count(leading_token(reply)) ? 0 : 1;
}

AnnotationRecord JudgmentVector::to_annotation() const { return {dialogue_id, labels, overall}; }

JudgmentVector JudgmentVector::from_annotation(const AnnotationRecord& a) {
  JudgmentVector v;
  v.dialogue_id = a.dialogue_id;
  v.labels = a.labels;
  v.overall = a.overall;
  return v;
}

std::string cache_key(std::string_view dialogue_id, std::string_view item_id, std::string_view prompt_version) {
  std::string material;
  for (auto part : {dialogue_id, item_id, prompt_version}) {
    material += std::to_string(part.size());
    material += ':';
    material += part;
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

JudgeCache::JudgeCache(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path JudgeCache::path_for(const std::string& key) const { return root_ / key.substr(0, 2) / (key + ".json"); }

std::optional<ItemJudgment> JudgeCache::get(std::string_view dialogue_id, std::string_view item_id,
                                            std::string_view prompt_version) const {
  const auto path = path_for(cache_key(dialogue_id, item_id, prompt_version));
  std::shared_lock lock(mutex_);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto j = json::parse(in);
    ItemJudgment out{j.at("dialogue_id"), j.at("item_id"), j.at("label"), j.at("raw_feedback"),
                     j.at("prompt_version")};
    if (out.dialogue_id != dialogue_id || out.item_id != item_id || out.prompt_version != prompt_version) {
      return std::nullopt;
    }
    return out;
  } catch (const json::exception&) {
    return std::nullopt;  // corrupt entry: treat as a miss and overwrite
  }
}

void JudgeCache::put(const ItemJudgment& judgment) {
  const auto path = path_for(cache_key(judgment.dialogue_id, judgment.item_id, judgment.prompt_version));
  const json j{{"dialogue_id", judgment.dialogue_id},
               {"item_id", judgment.item_id},
               {"label", judgment.label},
               {"raw_feedback", judgment.raw_feedback},
               {"prompt_version", judgment.prompt_version}};
  std::unique_lock lock(mutex_);
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache entry '" + tmp.string() + "'");
    out << j.dump() << '\n';
  }
  fs::rename(tmp, path);
}

JudgmentVector judge_dialogue(const Agent& judge, const RubricScale& scale, const PromptSet& prompts,
                              const DialogueTranscript& t, JudgeCache* cache, JudgeStats* stats,
                              const FeedbackRules& rules) {
  JudgmentVector v;
  v.dialogue_id = t.id;
  for (const auto& item_id : scale.scoreable_ids()) {
    const auto& prompt = prompts.at(item_id);
    if (cache) {
      if (auto hit = cache->get(t.id, item_id, prompt.version)) {
        if (stats) ++stats->cache_hits;
        v.labels[item_id] = hit->label;
        v.items.push_back(std::move(*hit));
        continue;
      }
    }
    try {
      const std::vector<ChatMessage> messages{{MessageRole::kUser, render_prompt(prompt, scale.item(item_id), t)}};
      if (stats) ++stats->agent_calls;
      auto reply = judge.complete(messages);
      ItemJudgment j{t.id, item_id, parse_feedback(reply, rules), std::move(reply), prompt.version};
      if (cache) cache->put(j);
      v.labels[item_id] = j.label;
      v.items.push_back(std::move(j));
    } catch (const std::exception& e) {
      v.failures.push_back({item_id, e.what()});
    }
  }
  return v;
}

std::vector<JudgmentVector> judge_corpus(const Agent& judge, const RubricScale& scale, const PromptSet& prompts,
                                         const Corpus& corpus, JudgeCache* cache, int parallelism, JudgeStats* stats,
                                         const FeedbackRules& rules) {
  if (parallelism < 1) throw ValidationError("parallelism must be at least 1");
  for (const auto& id : scale.scoreable_ids()) prompts.at(id);

  std::vector<JudgmentVector> out(corpus.size());
  std::vector<JudgeStats> per(corpus.size());
  const auto n = static_cast<std::int64_t>(corpus.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallelism)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx] = judge_dialogue(judge, scale, prompts, corpus[idx], cache, &per[idx], rules);
  }
  if (stats) {
    for (const auto& s : per) {
      stats->agent_calls += s.agent_calls;
      stats->cache_hits += s.cache_hits;
    }
  }
  return out;
}

}  // namespace minicex
