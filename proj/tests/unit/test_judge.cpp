#include <doctest.h>

#include <atomic>

#include "minicex/corpus.hpp"
#include "minicex/error.hpp"
#include "minicex/judge.hpp"
#include "support.hpp"

using namespace minicex;

namespace {

const RubricScale& canonical() {
  static const RubricScale s = load_scale_file(MINICEX_SOURCE_DIR "/data/scale/llm_mini_cex.json");
  return s;
}

const PromptSet& prompts() {
  static const PromptSet p = load_prompt_set(MINICEX_SOURCE_DIR "/data/prompts/v1");
  return p;
}

DialogueTranscript fixture(std::size_t i = 0) {
  return read_corpus(MINICEX_SOURCE_DIR "/tests/fixtures/transcripts.jsonl").at(i);
}

/// Says "yes" when the prompt mentions `keyword`, counts calls.
class CountingJudge : public Agent {
 public:
  explicit CountingJudge(std::string keyword) : keyword_(std::move(keyword)) {}
  std::string complete(std::span<const ChatMessage> m) const override {
    ++calls;
    if (m.back().text.find("FAIL-ME") != std::string::npos) throw AgentError("boom");
    return m.back().text.find(keyword_) != std::string::npos ? "Yes, it does." : "Not really.";
  }
  std::string name() const override { return "counting"; }
  mutable std::atomic<int> calls{0};

 private:
  std::string keyword_;
};

}  // namespace

TEST_CASE("prompt set") {
  CHECK(prompts().version == "v1");
  CHECK(prompts().prompts.size() == 23);
  for (const auto& id : canonical().scoreable_ids()) CHECK_NOTHROW(prompts().at(id));
  CHECK_THROWS_AS(prompts().at("4.1"), ValidationError);
  CHECK(prompts().at("2.1").template_text.find("empathy") != std::string::npos);
  CHECK_THROWS_AS(load_prompt_set("/nonexistent/prompts"), Error);
}

TEST_CASE("render_prompt") {
  const auto t = fixture();
  const SecondaryItem item{"1.1", "Asks about {dialogue} onset", std::nullopt, 1, ItemKind::kBinary, {}};
  JudgePrompt p{"1.1", "C: {item}\n---\n{dialogue}END", "v9"};
  const auto out = render_prompt(p, item, t);
  CHECK(out == "C: Asks about {dialogue} onset\n---\n" + serialize_dialogue(t) + "END");
  CHECK(serialize_dialogue(t).rfind("Patient: I have had a headache for 3 days.\nDoctor: ", 0) == 0);
  p.template_text = "{dialogue} then {item}";
  CHECK(render_prompt(p, item, t) == serialize_dialogue(t) + " then " + item.text);
  p.template_text = "{item} {item} {dialogue}";
  CHECK_THROWS_AS(render_prompt(p, item, t), ValidationError);
  p.template_text = "{item}";
  CHECK_THROWS_AS(render_prompt(p, item, t), ValidationError);
}

TEST_CASE("parse_feedback") {
  CHECK(parse_feedback("Yes, the doctor asked.") == 1);
  CHECK(parse_feedback("yes") == 1);
  CHECK(parse_feedback("Not satisfied.") == 0);
  CHECK(parse_feedback("  **No**. The doctor did not.") == 0);
  CHECK(parse_feedback("NOT") == 0);
  CHECK(parse_feedback("Nothing was missed") == 1);
  CHECK(parse_feedback("Note: yes") == 1);
  CHECK(parse_feedback("否，医生没有询问。") == 0);
  CHECK(parse_feedback("没有") == 0);
  CHECK(parse_feedback("是的") == 1);
  CHECK(parse_feedback("Partially") == 1);
  CHECK_THROWS_AS(parse_feedback("   "), ValidationError);
  CHECK(leading_token("...Hello world") == "hello");
  CHECK(leading_token("!!!") == "");
  FeedbackRules strict;
  strict.negatives = {"partially"};
  CHECK(parse_feedback("Partially", strict) == 0);
  CHECK(parse_feedback("not", strict) == 1);
}

TEST_CASE("cache_key") {
  const auto k = cache_key("d", "1.1", "v1");
  CHECK(k.size() == 64);
  CHECK(k == cache_key("d", "1.1", "v1"));
  CHECK(k != cache_key("d", "1.1", "v2"));
  CHECK(k != cache_key("d", "1.2", "v1"));
  CHECK(cache_key("ab", "c", "v") != cache_key("a", "bc", "v"));
}

TEST_CASE("judge cache round trip") {
  const auto dir = support::temp_dir("cache");
  JudgeCache cache(dir);
  CHECK_FALSE(cache.get("d", "1.1", "v1"));
  const ItemJudgment j{"d", "1.1", 1, "Yes, \"quoted\"\nline", "v1"};
  cache.put(j);
  CHECK(*cache.get("d", "1.1", "v1") == j);
  CHECK_FALSE(cache.get("d", "1.1", "v2"));
  const auto key = cache_key("d", "1.1", "v1");
  CHECK(std::filesystem::exists(dir / key.substr(0, 2) / (key + ".json")));
  JudgeCache reopened(dir);
  CHECK(*reopened.get("d", "1.1", "v1") == j);
}

TEST_CASE("judge_dialogue with a warm cache makes no calls") {
  const auto dir = support::temp_dir("warm");
  JudgeCache cache(dir);
  const auto t = fixture();
  CountingJudge judge("Evaluation criterion: " + canonical().item("1.2").text + "\n");
  JudgeStats cold;
  const auto first = judge_dialogue(judge, canonical(), prompts(), t, &cache, &cold);
  CHECK(cold.agent_calls == 23);
  CHECK(cold.cache_hits == 0);
  CHECK(first.complete());
  CHECK(first.labels.size() == 23);
  CHECK(first.labels.at("1.2") == 1);
  CHECK(first.labels.at("1.1") == 0);
  REQUIRE(first.items.size() == 23);
  CHECK(first.items.front().item_id == "1.1");
  CHECK(first.items.front().prompt_version == "v1");

  const int before = judge.calls;
  JudgeStats warm;
  const auto second = judge_dialogue(judge, canonical(), prompts(), t, &cache, &warm);
  CHECK(judge.calls == before);
  CHECK(warm.agent_calls == 0);
  CHECK(warm.cache_hits == 23);
  CHECK(second.labels == first.labels);
  CHECK(second.items == first.items);
}

TEST_CASE("judge failures are recorded per item") {
  auto t = fixture();
  t.utterances[1].text = "FAIL-ME";
  CountingJudge judge("x");
  const auto v = judge_dialogue(judge, canonical(), prompts(), t, nullptr);
  CHECK_FALSE(v.complete());
  CHECK(v.failures.size() == 23);
  CHECK(v.labels.empty());
}

TEST_CASE("judge_corpus is independent of parallelism") {
  const auto corpus = read_corpus(MINICEX_SOURCE_DIR "/tests/fixtures/transcripts.jsonl");
  CountingJudge judge("Evaluation criterion: " + canonical().item("3.1").text + "\n");
  JudgeStats s1, s4;
  const auto serial = judge_corpus(judge, canonical(), prompts(), corpus, nullptr, 1, &s1);
  const auto parallel = judge_corpus(judge, canonical(), prompts(), corpus, nullptr, 4, &s4);
  REQUIRE(serial.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(serial[i].dialogue_id == corpus[i].id);
    CHECK(serial[i].labels == parallel[i].labels);
  }
  CHECK(s1.agent_calls == 46);
  CHECK(s4.agent_calls == 46);
  CHECK_THROWS_AS(judge_corpus(judge, canonical(), prompts(), corpus, nullptr, 0), ValidationError);
  const PromptSet partial{"v0", {}};
  CHECK_THROWS_AS(judge_corpus(judge, canonical(), partial, corpus, nullptr, 1), ValidationError);
}

TEST_CASE("judgment vector annotation round trip") {
  JudgmentVector v;
  v.dialogue_id = "x";
  v.labels = {{"1.1", 1}, {"1.2", 0}};
  v.overall = "Excellent";
  const auto back = JudgmentVector::from_annotation(v.to_annotation());
  CHECK(back.dialogue_id == "x");
  CHECK(back.labels == v.labels);
  CHECK(back.overall == v.overall);
}
