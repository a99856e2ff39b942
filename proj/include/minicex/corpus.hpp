#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace minicex {

enum class Role { kPatient, kDoctor };

std::string_view to_string(Role role);
Role parse_role(std::string_view s);

struct Utterance {
  Role role = Role::kPatient;
  std::string text;
  std::size_t index = 0;

  bool operator==(const Utterance&) const = default;
};

struct TranscriptMeta {
  std::string model;
  double temperature = 0.0;
  bool truncated = false;
  std::optional<std::int64_t> seed;

  bool operator==(const TranscriptMeta&) const = default;
};

struct DialogueTranscript {
  std::string id;
  std::string self_report;
  std::vector<Utterance> utterances;
  TranscriptMeta meta;

  bool operator==(const DialogueTranscript&) const = default;
};

using Corpus = std::vector<DialogueTranscript>;

/// Expert (or judge-exported) labels for one dialogue.
struct AnnotationRecord {
  std::string dialogue_id;
  std::map<std::string, int> labels;  // binary item id -> 0|1
  std::optional<std::string> overall;

  bool operator==(const AnnotationRecord&) const = default;
};

/// Throws ValidationError if the transcript breaks the patient-first,
/// strict-alternation or non-empty-utterance invariants.
void validate_transcript(const DialogueTranscript& t);

// Line-delimited JSON records, one dialogue per line.
DialogueTranscript parse_transcript_line(std::string_view line, std::size_t line_no = 0);
std::string transcript_to_line(const DialogueTranscript& t);
Corpus read_corpus(const std::string& path);
Corpus parse_corpus(std::string_view text);
void write_corpus(const std::string& path, const Corpus& corpus);

AnnotationRecord parse_annotation_line(std::string_view line, std::size_t line_no = 0);
std::string annotation_to_line(const AnnotationRecord& a);
std::vector<AnnotationRecord> read_annotations(const std::string& path);
void write_annotations(const std::string& path, const std::vector<AnnotationRecord>& records);

/// Checks referential integrity and label domain against a corpus.
void validate_annotations(const std::vector<AnnotationRecord>& records, const Corpus& corpus);

inline constexpr std::string_view kRedactionToken = "[REDACTED]";

struct PrivacyFlag {
  std::size_t utterance_index;
  std::string pattern;

  bool operator==(const PrivacyFlag&) const = default;
};

struct FilterResult {
  DialogueTranscript transcript;
  std::vector<PrivacyFlag> flags;
};

/// Replaces every match of every pattern (ECMAScript syntax) with
/// kRedactionToken. Matches lying inside an existing redaction token are
/// ignored, so the filter is idempotent. Throws ValidationError on an
/// invalid pattern.
FilterResult privacy_filter(const DialogueTranscript& t, const std::vector<std::string>& patterns);

/// Token count under the harness's token rule: each maximal run of
/// letters/digits is one token, and each CJK ideograph, kana or hangul
/// syllable is one token on its own.
std::size_t count_tokens(std::string_view utf8);

struct CorpusStats {
  double avg_turns = 0;                 // utterances per dialogue
  double avg_tokens_per_utterance = 0;  // over all utterances
  double avg_patient_tokens = 0;        // over patient utterances
  std::size_t dialogues = 0;
  std::size_t utterances = 0;
  std::size_t patient_utterances = 0;
};

CorpusStats corpus_stats(const Corpus& corpus);

struct CorpusSplit {
  Corpus train;
  Corpus validation;
  Corpus test;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/// Seeded shuffle then slice. Partitions are disjoint and keep their
/// shuffled order.
CorpusSplit split_corpus(const Corpus& corpus, SplitSizes sizes, std::uint64_t seed);

/// Seeded permutation of 0..n-1, identical across platforms.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace minicex
