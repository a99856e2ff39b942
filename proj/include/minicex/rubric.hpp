#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace minicex {

enum class ItemKind { kBinary, kCategorical };

struct SecondaryItem {
  std::string id;  // dotted, e.g. "1.1"
  std::string text;
  std::optional<std::string> translation;
  int primary_id = 0;
  ItemKind kind = ItemKind::kBinary;
  std::vector<std::string> levels;  // categorical only, ordered worst to best

  bool operator==(const SecondaryItem&) const = default;
};

struct PrimaryItem {
  int id = 0;
  std::string name;
  std::vector<SecondaryItem> items;

  bool scoreable() const;
  bool operator==(const PrimaryItem&) const = default;
};

/// The LLM-specific Mini-CEX scale. Immutable once loaded; share freely
/// across threads.
class RubricScale {
 public:
  RubricScale() = default;

  /// Validates and takes ownership. Throws ValidationError.
  RubricScale(std::string version, std::vector<PrimaryItem> primaries);

  const std::string& version() const { return version_; }
  const std::vector<PrimaryItem>& primaries() const { return primaries_; }

  /// Ids of every binary item in scale order.
  const std::vector<std::string>& scoreable_ids() const { return scoreable_ids_; }

  std::size_t item_count() const;
  const SecondaryItem& item(std::string_view id) const;
  const SecondaryItem* find_item(std::string_view id) const;
  const PrimaryItem& primary(int id) const;

  /// Levels of the categorical overall rating, empty if the scale has none.
  std::vector<std::string> overall_levels() const;

  bool operator==(const RubricScale&) const = default;

 private:
  std::string version_;
  std::vector<PrimaryItem> primaries_;
  std::vector<std::string> scoreable_ids_;
};

/// Parses the JSON rubric document. Throws ParseError or ValidationError.
RubricScale load_scale(std::string_view document);
RubricScale load_scale_file(const std::string& path);

/// Serializes back to the rubric document format (pretty-printed JSON).
std::string dump_scale(const RubricScale& scale);

/// Points available per scoreable primary item over `case_count` dialogues.
std::map<int, std::int64_t> max_points(const RubricScale& scale, std::int64_t case_count);

std::string_view to_string(ItemKind kind);

}  // namespace minicex
