#include "minicex/corpus.hpp"

#include <fstream>
#include <limits>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "minicex/error.hpp"
#include "minicex/text.hpp"

namespace minicex {

using json = nlohmann::json;

std::string_view to_string(Role role) { return role == Role::kPatient ? "patient" : "doctor"; }

Role parse_role(std::string_view s) {
  if (s == "patient") return Role::kPatient;
  if (s == "doctor") return Role::kDoctor;
  throw ValidationError("unknown role '" + std::string(s) + "'");
}

void validate_transcript(const DialogueTranscript& t) {
  if (t.id.empty()) throw ValidationError("transcript with empty id");
  for (std::size_t i = 0; i < t.utterances.size(); ++i) {
    const auto& u = t.utterances[i];
    const Role expected = i % 2 == 0 ? Role::kPatient : Role::kDoctor;
    if (u.role != expected) {
      throw ValidationError("dialogue '" + t.id + "': utterance " + std::to_string(i) + " has role " +
                            std::string(to_string(u.role)) + ", expected " + std::string(to_string(expected)) +
                            " (patient speaks first, roles alternate)");
    }
    if (u.index != i) {
      throw ValidationError("dialogue '" + t.id + "': utterance index " + std::to_string(u.index) +
                            " at position " + std::to_string(i));
    }
    if (text::trim(u.text).empty()) {
      throw ValidationError("dialogue '" + t.id + "': utterance " + std::to_string(i) + " is empty");
    }
  }
}

namespace {

json transcript_json(const DialogueTranscript& t) {
  json j;
  j["id"] = t.id;
  j["self_report"] = t.self_report;
  j["utterances"] = json::array();
  for (const auto& u : t.utterances) {
    j["utterances"].push_back({{"role", to_string(u.role)}, {"text", u.text}});
  }
  json meta{{"model", t.meta.model}, {"temperature", t.meta.temperature}, {"truncated", t.meta.truncated}};
  if (t.meta.seed) meta["seed"] = *t.meta.seed;
  j["meta"] = std::move(meta);
  return j;
}

json parse_json_line(std::string_view line, std::size_t line_no) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) throw ParseError("record must be a JSON object", line_no);
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_no);
  }
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    ++line_no;
    auto line = text.substr(pos, end - pos);
    if (!text::trim(line).empty()) fn(line, line_no);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

DialogueTranscript parse_transcript_line(std::string_view line, std::size_t line_no) {
  const auto j = parse_json_line(line, line_no);
  DialogueTranscript t;
  try {
    t.id = j.at("id").get<std::string>();
    t.self_report = j.at("self_report").get<std::string>();
    const auto& us = j.at("utterances");
    if (!us.is_array()) throw ParseError("'utterances' must be a list", line_no);
    for (std::size_t i = 0; i < us.size(); ++i) {
      t.utterances.push_back({parse_role(us[i].at("role").get<std::string>()),
                              us[i].at("text").get<std::string>(), i});
    }
    if (j.contains("meta")) {
      const auto& m = j["meta"];
      t.meta.model = m.value("model", "");
      t.meta.temperature = m.value("temperature", 0.0);
      t.meta.truncated = m.value("truncated", false);
      if (m.contains("seed")) t.meta.seed = m["seed"].get<std::int64_t>();
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what(), line_no);
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), line_no);
  }
  try {
    validate_transcript(t);
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), line_no);
  }
  return t;
}

std::string transcript_to_line(const DialogueTranscript& t) { return transcript_json(t).dump(); }

Corpus parse_corpus(std::string_view text) {
  Corpus out;
  std::set<std::string> ids;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    auto t = parse_transcript_line(line, line_no);
    if (!ids.insert(t.id).second) throw ParseError("duplicate dialogue id '" + t.id + "'", line_no);
    out.push_back(std::move(t));
  });
  return out;
}

Corpus read_corpus(const std::string& path) {
  try {
    return parse_corpus(slurp(path));
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  }
}

void write_corpus(const std::string& path, const Corpus& corpus) {
  std::vector<std::string> lines;
  lines.reserve(corpus.size());
  for (const auto& t : corpus) lines.push_back(transcript_to_line(t));
  write_lines(path, lines);
}

AnnotationRecord parse_annotation_line(std::string_view line, std::size_t line_no) {
  const auto j = parse_json_line(line, line_no);
  AnnotationRecord a;
  try {
    a.dialogue_id = j.at("dialogue_id").get<std::string>();
    for (const auto& [k, v] : j.at("labels").items()) {
      const int label = v.get<int>();
      if (label != 0 && label != 1) {
        throw ParseError("label for item '" + k + "' must be 0 or 1", line_no);
      }
      a.labels[k] = label;
    }
    if (j.contains("overall") && !j["overall"].is_null()) a.overall = j["overall"].get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(e.what(), line_no);
  }
  return a;
}

std::string annotation_to_line(const AnnotationRecord& a) {
  json j;
  j["dialogue_id"] = a.dialogue_id;
  j["labels"] = json::object();
  for (const auto& [k, v] : a.labels) j["labels"][k] = v;
  j["overall"] = a.overall ? json(*a.overall) : json(nullptr);
  return j.dump();
}

std::vector<AnnotationRecord> read_annotations(const std::string& path) {
  std::vector<AnnotationRecord> out;
  std::set<std::string> ids;
  try {
    for_each_line(slurp(path), [&](std::string_view line, std::size_t line_no) {
      auto a = parse_annotation_line(line, line_no);
      if (!ids.insert(a.dialogue_id).second) {
        throw ParseError("duplicate annotation for '" + a.dialogue_id + "'", line_no);
      }
      out.push_back(std::move(a));
    });
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  }
  return out;
}

void write_annotations(const std::string& path, const std::vector<AnnotationRecord>& records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& a : records) lines.push_back(annotation_to_line(a));
  write_lines(path, lines);
}

void validate_annotations(const std::vector<AnnotationRecord>& records, const Corpus& corpus) {
  std::set<std::string> ids;
  for (const auto& t : corpus) ids.insert(t.id);
  for (const auto& a : records) {
    if (!ids.count(a.dialogue_id)) {
      throw ValidationError("annotation references unknown dialogue '" + a.dialogue_id + "'");
    }
    for (const auto& [item, label] : a.labels) {
      if (label != 0 && label != 1) {
        throw ValidationError("annotation '" + a.dialogue_id + "' item " + item + " label not in {0,1}");
      }
    }
  }
}

namespace {

bool inside_redaction(const std::string& s, std::size_t begin, std::size_t end) {
  const std::string token(kRedactionToken);
  // Any redaction token occurrence that fully covers [begin, end).
  std::size_t from = begin >= token.size() ? begin - token.size() + 1 : 0;
  for (auto p = s.find(token, from); p != std::string::npos && p <= begin; p = s.find(token, p + 1)) {
    if (p + token.size() >= end) return true;
  }
  return false;
}

std::string redact(const std::string& input, const std::regex& re, const std::string& pattern,
                   std::size_t utterance_index, std::vector<PrivacyFlag>* flags) {
  std::string out;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(input.begin(), input.end(), re); it != std::sregex_iterator(); ++it) {
    const auto begin = static_cast<std::size_t>(it->position(0));
    const auto end = begin + static_cast<std::size_t>(it->length(0));
    if (end == begin || inside_redaction(input, begin, end)) continue;
    out.append(input, last, begin - last);
    out.append(kRedactionToken);
    last = end;
    if (flags) flags->push_back({utterance_index, pattern});
  }
  out.append(input, last, std::string::npos);
  return out;
}

}  // namespace

FilterResult privacy_filter(const DialogueTranscript& t, const std::vector<std::string>& patterns) {
  std::vector<std::regex> compiled;
  compiled.reserve(patterns.size());
  for (const auto& p : patterns) {
    try {
      compiled.emplace_back(p, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ValidationError("invalid privacy pattern '" + p + "': " + e.what());
    }
  }
  FilterResult result{t, {}};
  for (std::size_t k = 0; k < compiled.size(); ++k) {
    for (auto& u : result.transcript.utterances) {
      u.text = redact(u.text, compiled[k], patterns[k], u.index, &result.flags);
    }
    result.transcript.self_report = redact(result.transcript.self_report, compiled[k], patterns[k], 0, nullptr);
  }
  return result;
}

std::size_t count_tokens(std::string_view utf8) {
  std::size_t count = 0;
  bool in_word = false;
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    const char32_t cp = text::next_code_point(utf8, pos);
    if (text::is_cjk(cp)) {
      ++count;
      in_word = false;
    } else if (text::is_word_char(cp)) {
      if (!in_word) ++count;
      in_word = true;
    } else {
      in_word = false;
    }
  }
  return count;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.empty()) throw ValidationError("corpus_stats: empty corpus");
  CorpusStats s;
  std::size_t tokens = 0;
  std::size_t patient_tokens = 0;
  for (const auto& t : corpus) {
    for (const auto& u : t.utterances) {
      const auto n = count_tokens(u.text);
      tokens += n;
      ++s.utterances;
      if (u.role == Role::kPatient) {
        patient_tokens += n;
        ++s.patient_utterances;
      }
    }
  }
  s.dialogues = corpus.size();
  s.avg_turns = static_cast<double>(s.utterances) / static_cast<double>(s.dialogues);
  s.avg_tokens_per_utterance = s.utterances ? static_cast<double>(tokens) / static_cast<double>(s.utterances) : 0.0;
  s.avg_patient_tokens =
      s.patient_utterances ? static_cast<double>(patient_tokens) / static_cast<double>(s.patient_utterances) : 0.0;
  return s;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with rejection sampling; yields the same permutation on
  // every standard library.
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(perm[i - 1], perm[r % bound]);
  }
  return perm;
}

CorpusSplit split_corpus(const Corpus& corpus, SplitSizes sizes, std::uint64_t seed) {
  const auto total = sizes.train + sizes.validation + sizes.test;
  if (total > corpus.size()) {
    throw ValidationError("split sizes sum to " + std::to_string(total) + " but corpus has " +
                          std::to_string(corpus.size()) + " dialogues");
  }
  const auto perm = seeded_permutation(corpus.size(), seed);
  CorpusSplit out;
  std::size_t k = 0;
  for (; k < sizes.train; ++k) out.train.push_back(corpus[perm[k]]);
  for (; k < sizes.train + sizes.validation; ++k) out.validation.push_back(corpus[perm[k]]);
  for (; k < total; ++k) out.test.push_back(corpus[perm[k]]);
  return out;
}

}  // namespace minicex
