#pragma once

// The on-disk JSONL document format: one DocumentRecord per line.
// Sentences are stored as a list so attack and detect compose without
// re-segmentation drift.

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "samark/errors.hpp"

namespace samark {

struct DocumentRecord {
  std::string id;
  std::string prompt;
  std::vector<std::string> sentences;
  std::string condition;
  nlohmann::json meta = nlohmann::json::object();

  nlohmann::json to_json() const {
    return {{"id", id},
            {"prompt", prompt},
            {"sentences", sentences},
            {"condition", condition},
            {"meta", meta}};
  }

  static DocumentRecord from_json(const nlohmann::json& j) {
    DocumentRecord r;
    r.id = j.at("id").get<std::string>();
    if (r.id.empty()) throw ConfigError("record id must be non-empty");
    r.prompt = j.value("prompt", std::string());
    r.sentences = j.value("sentences", std::vector<std::string>());
    r.condition = j.value("condition", std::string());
    r.meta = j.value("meta", nlohmann::json::object());
    return r;
  }
};

inline std::vector<DocumentRecord> read_jsonl(std::istream& in) {
  std::vector<DocumentRecord> records;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
    auto r = DocumentRecord::from_json(j);
    if (!ids.insert(r.id).second)
      throw ConfigError("duplicate record id '" + r.id + "' at line " + std::to_string(lineno));
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<DocumentRecord> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_jsonl(in);
}

inline void write_jsonl(std::ostream& out, const std::vector<DocumentRecord>& records) {
  for (const auto& r : records) out << r.to_json().dump() << '\n';
}

}  // namespace samark
