#include "convqual/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "convqual/error.hpp"

namespace convqual::corpus {

using nlohmann::json;

std::string to_string(Speaker s) {
  return s == Speaker::User ? "user" : "system";
}

std::string to_string(Source s) {
  switch (s) {
    case Source::Human: return "human";
    case Source::Simulated: return "simulated";
    default: return "unknown";
  }
}

namespace {

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ValidationOutcome validate_conversation(const json& record) {
  ValidationOutcome out;
  auto& errs = out.errors;
  if (!record.is_object()) {
    errs.push_back("record is not an object");
    return out;
  }

  Conversation conv;
  if (!record.contains("id") || !record["id"].is_string() ||
      record["id"].get<std::string>().empty()) {
    errs.push_back("missing id");
  } else {
    conv.id = record["id"].get<std::string>();
  }

  std::string source = record.value("source", "unknown");
  if (source == "human") conv.source = Source::Human;
  else if (source == "simulated") conv.source = Source::Simulated;
  else if (source == "unknown") conv.source = Source::Unknown;
  else errs.push_back("unknown source \"" + source + "\"");

  if (record.contains("generator_version")) {
    if (record["generator_version"].is_string())
      conv.generator_version = record["generator_version"].get<std::string>();
    else
      errs.push_back("generator_version must be a string");
  }

  if (!record.contains("turns") || !record["turns"].is_array() ||
      record["turns"].empty()) {
    errs.push_back("turns must be a non-empty array");
    return out;
  }

  std::size_t idx = 0;
  for (const auto& jt : record["turns"]) {
    Turn turn;
    std::string speaker = jt.value("speaker", "");
    if (speaker == "user") turn.speaker = Speaker::User;
    else if (speaker == "system") turn.speaker = Speaker::System;
    else errs.push_back("turn " + std::to_string(idx) + ": invalid speaker");

    turn.text = jt.value("text", "");
    if (trimmed(turn.text).empty())
      errs.push_back("turn " + std::to_string(idx) + ": empty turn text");

    if (jt.contains("recommendations")) {
      for (const auto& r : jt["recommendations"])
        turn.recommendations.push_back(r.get<std::string>());
      if (turn.speaker == Speaker::User && !turn.recommendations.empty())
        errs.push_back("turn " + std::to_string(idx) +
                       ": recommendations on a User turn");
    }
    conv.turns.push_back(std::move(turn));
    ++idx;
  }

  if (conv.turns.front().speaker != Speaker::User)
    errs.push_back("conversation must begin with a User turn");
  for (std::size_t i = 1; i < conv.turns.size(); ++i) {
    if (conv.turns[i].speaker == conv.turns[i - 1].speaker) {
      errs.push_back("non-alternating speakers at turn " + std::to_string(i));
      break;
    }
  }

  if (errs.empty()) out.conversation = std::move(conv);
  return out;
}

Dataset parse_dataset(std::istream& in, const std::string& source_path,
                      bool skip_invalid) {
  Dataset ds;
  ds.source_path = source_path;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;

    json record = json::parse(line, nullptr, false);
    std::vector<std::string> errs;
    std::optional<Conversation> conv;
    if (record.is_discarded()) {
      errs.push_back("invalid JSON");
    } else {
      auto outcome = validate_conversation(record);
      errs = std::move(outcome.errors);
      conv = std::move(outcome.conversation);
    }

    if (!errs.empty()) {
      std::string msg = source_path + ": line " + std::to_string(line_no);
      for (const auto& e : errs) msg += ": " + e;
      if (skip_invalid) {
        std::fputs(("warning: skipped " + msg + "\n").c_str(), stderr);
        continue;
      }
      throw ValidationError(msg);
    }

    if (!seen_ids.insert(conv->id).second)
      throw ValidationError(source_path + ": line " + std::to_string(line_no) +
                            ": duplicate id \"" + conv->id + "\"");
    ds.conversations.push_back(std::move(*conv));
  }
  return ds;
}

Dataset load_dataset(const std::string& path, bool skip_invalid) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  return parse_dataset(in, path, skip_invalid);
}

json conversation_to_json(const Conversation& c) {
  json turns = json::array();
  for (const auto& t : c.turns) {
    json jt{{"speaker", to_string(t.speaker)}, {"text", t.text}};
    if (!t.recommendations.empty()) jt["recommendations"] = t.recommendations;
    turns.push_back(std::move(jt));
  }
  json rec{{"id", c.id}, {"source", to_string(c.source)}, {"turns", std::move(turns)}};
  if (c.generator_version) rec["generator_version"] = *c.generator_version;
  return rec;
}

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  for (const auto& c : ds.conversations) {
    out += conversation_to_json(c).dump();
    out += '\n';
  }
  return out;
}

std::string session_text(const Conversation& c, TurnFilter filter) {
  std::string out;
  for (const auto& t : c.turns) {
    if (filter == TurnFilter::UserOnly && t.speaker != Speaker::User) continue;
    if (filter == TurnFilter::SystemOnly && t.speaker != Speaker::System) continue;
    if (!out.empty()) out += '\n';
    out += t.text;
  }
  return out;
}

}  // namespace convqual::corpus
