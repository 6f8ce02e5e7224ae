#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lds/core/error.hpp"

namespace lds {

struct TextSample {
  std::string text;
  std::string label;
};

namespace detail {

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace detail

/// Labelled text samples plus a label -> sample index.
///
/// Classes are kept in first-appearance order and each class's indices in
/// file order, so iteration is deterministic. Immutable once built.
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(std::vector<TextSample> samples) : samples_(std::move(samples)) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      if (detail::is_blank(s.text)) {
        throw DataError("sample " + std::to_string(i) + ": text is empty");
      }
      if (s.label.empty()) throw DataError("sample " + std::to_string(i) + ": label is empty");
      auto [it, inserted] = class_pos_.try_emplace(s.label, classes_.size());
      if (inserted) {
        classes_.push_back(s.label);
        members_.emplace_back();
      }
      members_[it->second].push_back(i);
    }
  }

  std::size_t size() const { return samples_.size(); }
  const std::vector<TextSample>& samples() const { return samples_; }
  const TextSample& sample(std::size_t i) const { return samples_.at(i); }

  /// Class names in first-appearance order.
  const std::vector<std::string>& classes() const { return classes_; }

  bool has_class(const std::string& label) const { return class_pos_.count(label) != 0; }

  /// Sample indices of `label`, in dataset order. Throws for unknown labels.
  const std::vector<std::size_t>& members(const std::string& label) const {
    auto it = class_pos_.find(label);
    if (it == class_pos_.end()) throw DataError("unknown class '" + label + "'");
    return members_[it->second];
  }

 private:
  std::vector<TextSample> samples_;
  std::vector<std::string> classes_;
  std::vector<std::vector<std::size_t>> members_;
  std::unordered_map<std::string, std::size_t> class_pos_;
};

/// Reads newline-delimited JSON records with string fields "text" and
/// "label". Blank lines are skipped, unknown fields ignored.
inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  std::vector<TextSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_blank(line)) continue;
    const auto where = path + ":" + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!record.is_object()) throw DataError(where + ": record is not an object");
    for (const char* field : {"text", "label"}) {
      if (!record.contains(field)) throw DataError(where + ": missing field \"" + field + "\"");
      if (!record[field].is_string()) {
        throw DataError(where + ": field \"" + field + "\" is not a string");
      }
    }
    TextSample s{record["text"].get<std::string>(), record["label"].get<std::string>()};
    if (detail::is_blank(s.text)) throw DataError(where + ": empty text");
    if (s.label.empty()) throw DataError(where + ": empty label");
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw DataError("dataset '" + path + "' is empty");
  return Dataset(std::move(samples));
}

inline void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write dataset '" + path + "'");
  for (const auto& s : dataset.samples()) {
    out << nlohmann::json{{"text", s.text}, {"label", s.label}}.dump() << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

/// Disjoint train / valid / test class sets.
struct ClassSplit {
  std::vector<std::string> train;
  std::vector<std::string> valid;
  std::vector<std::string> test;
};

inline ClassSplit load_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": malformed JSON (" + e.what() + ")");
  }
  ClassSplit split;
  auto read = [&](const char* key, std::vector<std::string>& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw DataError(path + ": \"" + key + "\" is not an array");
    for (const auto& v : j[key]) {
      if (!v.is_string()) throw DataError(path + ": \"" + key + "\" holds a non-string entry");
      out.push_back(v.get<std::string>());
    }
  };
  read("train", split.train);
  read("valid", split.valid);
  read("test", split.test);
  return split;
}

inline void save_split(const ClassSplit& split, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write split '" + path + "'");
  out << nlohmann::json{{"train", split.train}, {"valid", split.valid}, {"test", split.test}}.dump(2)
      << '\n';
}

enum class ViolationKind { kSplitOverlap, kUnknownClass, kInsufficientSamples, kTooFewClasses };

struct Violation {
  ViolationKind kind;
  std::string message;
};

/// Empty when the split is usable for (n_way, k_shot, m_query) episodes.
///
/// Splits with no classes at all are allowed (e.g. no validation classes);
/// non-empty splits must hold at least n_way classes.
inline std::vector<Violation> validate_split(const Dataset& dataset, const ClassSplit& split,
                                             std::size_t n_way, std::size_t k_shot,
                                             std::size_t m_query) {
  std::vector<Violation> out;
  const std::pair<const char*, const std::vector<std::string>*> parts[] = {
      {"train", &split.train}, {"valid", &split.valid}, {"test", &split.test}};

  std::unordered_map<std::string, const char*> owner;
  for (const auto& [name, classes] : parts) {
    std::set<std::string> seen;
    for (const auto& c : *classes) {
      if (!seen.insert(c).second) {
        out.push_back({ViolationKind::kSplitOverlap,
                       "split overlap: '" + c + "' listed twice in " + name});
        continue;
      }
      auto [it, inserted] = owner.try_emplace(c, name);
      if (!inserted) {
        out.push_back({ViolationKind::kSplitOverlap, "split overlap: '" + c + "' is in both " +
                                                         it->second + " and " + name});
      }
      if (!dataset.has_class(c)) {
        out.push_back({ViolationKind::kUnknownClass, "unknown class '" + c + "' in " + name});
      } else if (dataset.members(c).size() < k_shot + m_query) {
        out.push_back({ViolationKind::kInsufficientSamples,
                       "insufficient samples: '" + c + "' has " +
                           std::to_string(dataset.members(c).size()) + ", needs " +
                           std::to_string(k_shot + m_query)});
      }
    }
    if (!classes->empty() && seen.size() < n_way) {
      out.push_back({ViolationKind::kTooFewClasses, std::string(name) + " has " +
                                                        std::to_string(seen.size()) +
                                                        " classes, needs " + std::to_string(n_way)});
    }
  }
  return out;
}

}  // namespace lds
