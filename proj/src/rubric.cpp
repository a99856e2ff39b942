#include "minicex/rubric.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "minicex/error.hpp"

namespace minicex {

using json = nlohmann::json;

namespace {

ItemKind parse_kind(const std::string& s) {
  if (s == "binary") return ItemKind::kBinary;
  if (s == "categorical") return ItemKind::kCategorical;
  throw ValidationError("unknown item kind '" + s + "'");
}

template <typename T>
T required(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

std::string_view to_string(ItemKind kind) {
  return kind == ItemKind::kBinary ? "binary" : "categorical";
}

bool PrimaryItem::scoreable() const {
  for (const auto& item : items) {
    if (item.kind != ItemKind::kBinary) return false;
  }
  return !items.empty();
}

RubricScale::RubricScale(std::string version, std::vector<PrimaryItem> primaries)
    : version_(std::move(version)), primaries_(std::move(primaries)) {
  std::set<std::string> ids;
  std::set<int> primary_ids;
  for (auto& p : primaries_) {
    if (p.id < 1 || p.id > 4) {
      throw ValidationError("primary id " + std::to_string(p.id) + " outside 1-4");
    }
    if (!primary_ids.insert(p.id).second) {
      throw ValidationError("duplicate primary id " + std::to_string(p.id));
    }
    if (p.items.empty()) {
      throw ValidationError("primary " + std::to_string(p.id) + " has no items");
    }
    for (auto& item : p.items) {
      item.primary_id = p.id;
      if (item.id.empty()) throw ValidationError("item with empty id");
      if (!ids.insert(item.id).second) {
        throw ValidationError("duplicate item id '" + item.id + "'");
      }
      if (item.kind == ItemKind::kBinary && !item.levels.empty()) {
        throw ValidationError("binary item '" + item.id + "' must not carry levels");
      }
      if (item.kind == ItemKind::kCategorical && item.levels.size() < 2) {
        throw ValidationError("categorical item '" + item.id + "' needs at least 2 levels");
      }
    }
  }
  for (const auto& p : primaries_) {
    for (const auto& item : p.items) {
      if (item.kind == ItemKind::kBinary) scoreable_ids_.push_back(item.id);
    }
  }
}

std::size_t RubricScale::item_count() const {
  std::size_t n = 0;
  for (const auto& p : primaries_) n += p.items.size();
  return n;
}

const SecondaryItem* RubricScale::find_item(std::string_view id) const {
  for (const auto& p : primaries_) {
    for (const auto& item : p.items) {
      if (item.id == id) return &item;
    }
  }
  return nullptr;
}

const SecondaryItem& RubricScale::item(std::string_view id) const {
  if (const auto* found = find_item(id)) return *found;
  throw ValidationError("unknown item id '" + std::string(id) + "'");
}

const PrimaryItem& RubricScale::primary(int id) const {
  for (const auto& p : primaries_) {
    if (p.id == id) return p;
  }
  throw ValidationError("unknown primary id " + std::to_string(id));
}

std::vector<std::string> RubricScale::overall_levels() const {
  for (const auto& p : primaries_) {
    for (const auto& item : p.items) {
      if (item.kind == ItemKind::kCategorical) return item.levels;
    }
  }
  return {};
}

RubricScale load_scale(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("rubric config: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("rubric config: top level must be an object");

  auto version = required<std::string>(doc, "version", "rubric config");
  auto primaries_json = required<json>(doc, "primary", "rubric config");
  if (!primaries_json.is_array()) throw ParseError("rubric config: 'primary' must be a list");

  std::vector<PrimaryItem> primaries;
  for (const auto& pj : primaries_json) {
    PrimaryItem p;
    p.id = required<int>(pj, "id", "primary");
    const std::string where = "primary " + std::to_string(p.id);
    p.name = required<std::string>(pj, "name", where);
    auto items_json = required<json>(pj, "item", where);
    if (!items_json.is_array()) throw ParseError(where + ": 'item' must be a list");
    for (const auto& ij : items_json) {
      SecondaryItem item;
      item.id = required<std::string>(ij, "id", where + " item");
      const std::string iwhere = "item " + item.id;
      item.text = required<std::string>(ij, "text", iwhere);
      item.kind = parse_kind(required<std::string>(ij, "kind", iwhere));
      if (ij.contains("levels")) item.levels = required<std::vector<std::string>>(ij, "levels", iwhere);
      if (ij.contains("translation")) item.translation = required<std::string>(ij, "translation", iwhere);
      p.items.push_back(std::move(item));
    }
    primaries.push_back(std::move(p));
  }
  return RubricScale(std::move(version), std::move(primaries));
}

RubricScale load_scale_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rubric config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scale(ss.str());
}

std::string dump_scale(const RubricScale& scale) {
  json doc;
  doc["version"] = scale.version();
  doc["primary"] = json::array();
  for (const auto& p : scale.primaries()) {
    json pj{{"id", p.id}, {"name", p.name}, {"item", json::array()}};
    for (const auto& item : p.items) {
      json ij{{"id", item.id}, {"text", item.text}, {"kind", to_string(item.kind)}};
      if (!item.levels.empty()) ij["levels"] = item.levels;
      if (item.translation) ij["translation"] = *item.translation;
      pj["item"].push_back(std::move(ij));
    }
    doc["primary"].push_back(std::move(pj));
  }
  return doc.dump(2) + "\n";
}

std::map<int, std::int64_t> max_points(const RubricScale& scale, std::int64_t case_count) {
  if (case_count < 1) throw ValidationError("case_count must be at least 1");
  std::map<int, std::int64_t> out;
  for (const auto& p : scale.primaries()) {
    if (p.scoreable()) out[p.id] = static_cast<std::int64_t>(p.items.size()) * case_count;
  }
  return out;
}

}  // namespace minicex
