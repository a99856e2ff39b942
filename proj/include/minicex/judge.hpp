#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "minicex/corpus.hpp"
#include "minicex/gateway.hpp"
#include "minicex/rubric.hpp"

namespace minicex {

inline constexpr std::string_view kItemPlaceholder = "{item}";
inline constexpr std::string_view kDialoguePlaceholder = "{dialogue}";

struct JudgePrompt {
  std::string item_id;
  std::string template_text;
  std::string version;

  /// Both placeholders must appear exactly once.
  void validate() const;
};

/// Prompt templates for one version, keyed by item id.
struct PromptSet {
  std::string version;
  std::map<std::string, JudgePrompt> prompts;

  const JudgePrompt& at(const std::string& item_id) const;
};

/// Loads `<dir>/<item_id>.txt` for every file in the directory. The version
/// is the directory's name.
PromptSet load_prompt_set(const std::filesystem::path& dir);

/// "Patient: ...\nDoctor: ..." one line per utterance.
std::string serialize_dialogue(const DialogueTranscript& t);

std::string render_prompt(const JudgePrompt& prompt, const SecondaryItem& item, const DialogueTranscript& t);

struct FeedbackRules {
  std::set<std::string> negatives{"not", "no", "否", "没有"};
};

/// 0 iff the reply's leading verdict token (leading whitespace and
/// punctuation skipped, ASCII lowercased) is a negative; 1 otherwise.
/// Throws ValidationError on an empty reply.
int parse_feedback(std::string_view reply, const FeedbackRules& rules = {});

/// Leading verdict token as used by parse_feedback.
std::string leading_token(std::string_view reply);

struct ItemJudgment {
  std::string dialogue_id;
  std::string item_id;
  int label = 0;
  std::string raw_feedback;
  std::string prompt_version;

  bool operator==(const ItemJudgment&) const = default;
};

struct ItemFailure {
  std::string item_id;
  std::string message;
};

struct JudgmentVector {
  std::string dialogue_id;
  std::map<std::string, int> labels;
  std::optional<std::string> overall;
  std::vector<ItemJudgment> items;  // scale order
  std::vector<ItemFailure> failures;

  bool complete() const { return failures.empty(); }
  AnnotationRecord to_annotation() const;
  static JudgmentVector from_annotation(const AnnotationRecord& a);
};

/// Hex SHA-256 of (dialogue_id, item_id, prompt_version).
std::string cache_key(std::string_view dialogue_id, std::string_view item_id, std::string_view prompt_version);

/// On-disk judgment cache: `<root>/<key[0:2]>/<key>.json`, one file per
/// ItemJudgment. Concurrent readers, serialized writers; files are written
/// to a temporary name then renamed.
class JudgeCache {
 public:
  explicit JudgeCache(std::filesystem::path root);

  std::optional<ItemJudgment> get(std::string_view dialogue_id, std::string_view item_id,
                                  std::string_view prompt_version) const;
  void put(const ItemJudgment& judgment);
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
};

struct JudgeStats {
  std::size_t agent_calls = 0;
  std::size_t cache_hits = 0;
};

/// One verdict per scoreable item of the scale. Agent failures are recorded
/// in the returned vector's `failures`; completed items are kept. `cache`
/// may be null.
JudgmentVector judge_dialogue(const Agent& judge, const RubricScale& scale, const PromptSet& prompts,
                              const DialogueTranscript& t, JudgeCache* cache, JudgeStats* stats = nullptr,
                              const FeedbackRules& rules = {});

/// judge_dialogue over a corpus, up to `parallelism` dialogues at once.
std::vector<JudgmentVector> judge_corpus(const Agent& judge, const RubricScale& scale, const PromptSet& prompts,
                                         const Corpus& corpus, JudgeCache* cache, int parallelism,
                                         JudgeStats* stats = nullptr, const FeedbackRules& rules = {});

}  // namespace minicex
